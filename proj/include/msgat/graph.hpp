#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msgat/tensor.hpp"

namespace msgat {

struct RelationDef {
    std::string name;
    int src_type = -1;
    int dst_type = -1;
};

// An ordered sequence of node types, starting at the type whose nodes it embeds.
struct Metapath {
    std::string name;            // e.g. "A,P,A"
    std::vector<int> type_seq;   // length >= 2, consecutive pairs covered by a relation
};

struct MetapathInstance {
    std::vector<int> nodes;  // node i has type type_seq[i]; consecutive nodes linked
    int metapath = -1;       // index into HeteroGraph::metapaths
};

// Instances grouped by the metapath they follow.
struct InstanceSet {
    std::vector<std::vector<MetapathInstance>> by_metapath;  // indexed like `metapaths` arg
};

struct DeltaReport {
    std::string metapath;
    double delta_avg = 0.0;
    long quadruples_sampled = 0;
    int component_nodes = 0;
    bool exact = false;
};

// Typed nodes, undirected typed edges, per-type dense features, optional labels.
// Immutable after load; all sampling paths are read-only.
struct HeteroGraph {
    std::vector<std::string> type_names;
    std::vector<int> type_of;                     // node id -> type id
    std::vector<std::vector<int>> nodes_of_type;  // type id -> sorted node ids
    std::vector<int> index_in_type;               // node id -> feature row in its type

    std::vector<RelationDef> relations;
    // neighbors[rel][node] -> sorted neighbor ids (empty for non-endpoint types)
    std::vector<std::vector<std::vector<int>>> neighbors;

    std::vector<ad::Tensor> features;  // per type; rows = nodes_of_type[t].size(), cols = n
    int feature_dim = 0;

    std::vector<int> label_of;  // -1 when unlabeled
    int num_classes = 0;

    int target_type = -1;
    std::optional<int> target_relation;  // for link-prediction datasets
    std::vector<Metapath> metapaths;

    int num_nodes() const { return static_cast<int>(type_of.size()); }
    int type_id(const std::string& name) const;
    int relation_id(const std::string& name) const;
    int metapath_id(const std::string& name) const;
    const double* feature_row(int node) const;
    std::vector<int> labeled_nodes() const;
    // neighbors of `node` having type `t`, merged over all relations, sorted unique
    std::vector<int> neighbors_of_type(int node, int t) const;
    bool has_edge(int rel, int u, int v) const;
    void validate() const;  // enforces every structural invariant; throws DataError
};

// --- dataset directory I/O ---------------------------------------------------
// Layout (TSV, UTF-8, '#' comments):
//   nodes.tsv            node_id <TAB> type_name
//   edges.tsv            src_id <TAB> dst_id <TAB> relation_name   (undirected)
//   features_<type>.tsv  node_id <TAB> f1 <TAB> ... <TAB> fn
//   labels.tsv           node_id <TAB> class_index                 (optional)
//   schema.toml          target_type / relation / metapath entries

HeteroGraph load_dataset(const std::string& dir);
void write_dataset(const HeteroGraph& g, const std::string& dir);

// Content hash of the dataset directory (order-independent), for run manifests.
uint64_t dataset_fingerprint(const std::string& dir);

// --- metapath instance sampling (breadth-first) -------------------------------
// All distinct instances starting at v that follow some metapath in `metapaths`
// whose length is <= l; above `cap` per metapath, a seeded uniform subsample.
InstanceSet sample_instances(const HeteroGraph& g, int v, const std::vector<int>& metapaths,
                             int l, int cap, uint64_t seed);

// --- metapath-based subgraph + Gromov delta ----------------------------------

struct HomogeneousGraph {
    std::vector<int> node_ids;           // original hetero node ids
    std::vector<std::vector<int>> adj;   // by local index, sorted
};

// Nodes of the endpoint types of `phi`; undirected edge (u, w), u != w, iff some
// instance of phi starts at u and ends at w.
HomogeneousGraph metapath_subgraph(const HeteroGraph& g, int phi);

// Four-point-condition delta averaged over quadruples of the largest connected
// component; exact enumeration when the component has <= 30 nodes.
DeltaReport delta_hyperbolicity(const HomogeneousGraph& h, long quadruple_budget, uint64_t seed,
                                const std::string& metapath_name = "");

// --- synthetic generator -------------------------------------------------------

struct SyntheticMetapathSpec {
    double gamma = 2.5;          // power-law exponent of intermediate-node degrees
    int intermediate_count = 150;
    int degree_min = 1;
    int degree_max = 0;           // 0: chosen from the target count
    double attach_noise = -1.0;   // per-metapath impurity; < 0 follows the global noise
    // Heavy-tail rate of this metapath's intermediate features: per coordinate,
    // chance of an additional spike_scale-sized excursion. Models the bursty
    // magnitudes that come with power-law data.
    double feature_spike_rate = 0.0;
};

struct SyntheticSpec {
    int target_count = 300;
    int num_classes = 3;
    int feature_dim = 8;
    double noise = 0.2;          // attachment impurity (chance of a random target)
    double feature_noise = -1.0;  // feature jitter scale; < 0 follows `noise`
    double feature_signal = 1.0;  // class-prototype magnitude in target features
    // When set, an intermediate's home class follows its degree tier (hubs ->
    // class 0, leaves -> class C-1), planting class signal in the hierarchy
    // itself rather than only in flat co-membership.
    bool degree_class_tiers = false;
    double spike_scale = 8.0;     // magnitude of heavy-tail feature excursions
    std::vector<SyntheticMetapathSpec> metapaths;  // >= 2, distinct gammas
};

// Target type "T" with one intermediate type per metapath ("M1", "M2", ...).
// Labels are planted so class membership correlates with metapath neighborhoods;
// intermediate degrees follow a discrete power law with the requested exponent.
HeteroGraph generate_synthetic(const SyntheticSpec& spec, uint64_t seed);

}  // namespace msgat
