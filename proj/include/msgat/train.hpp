#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgat/metrics.hpp"
#include "msgat/model.hpp"

namespace msgat {

enum class Task { NodeClassification, NodeClustering, LinkPrediction };
std::string task_name(Task t);
Task task_from_name(const std::string& s);

struct TrainConfig {
    Task task = Task::NodeClassification;
    int epochs = 200;
    double lr = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 1e-4;  // applied to weight matrices and attention vectors
    double train_fraction = 0.6;
    int patience = 30;  // 0 disables early stopping
    uint64_t seed = 7;
    bool check_invariants = false;
    int log_every = 20;

    void validate() const;
};

struct LinkSample {
    int u = -1;
    int v = -1;
    int y = 0;  // 1: real edge, 0: sampled non-edge
};

struct Split {
    std::vector<int> train, val, test;
};

// Stratified by class over the labeled nodes; validation is half of the
// non-train remainder.
Split stratified_split(const std::vector<int>& labels, double train_fraction, uint64_t seed);

// Uniform distinct non-edges of `relation`, endpoints drawn from its declared
// types. Bounded retries; a graph too dense to supply `count` non-edges is an error.
std::vector<LinkSample> negative_sample(const HeteroGraph& g, int relation, int count,
                                        uint64_t seed);

// --- tape-level losses ---------------------------------------------------------

// -sum_v sum_c y_v[c] log f(z_v)[c]; the log argument is clamped at 1e-12.
ad::Var node_loss(ad::Tape& t, const ForwardTrace& trace, const HeteroGraph& g);

// mean binary cross-entropy of sigmoid(z_u . z_v) over the samples
ad::Var link_pair_loss(ad::Tape& t, ad::Var z_u, ad::Var z_v, int y);

// --- training --------------------------------------------------------------------

struct MetricHistory {
    std::vector<std::string> lines;  // epoch <TAB> split <TAB> metric <TAB> value
    void add(int epoch, const std::string& split, const std::string& metric, double value);
    std::string text() const;
};

struct TrainResult {
    ParameterSet params;  // best-validation snapshot
    MetricHistory history;
    int epochs_run = 0;
    double first_train_loss = 0.0;
    double last_train_loss = 0.0;
    TraceStats worst_stats;  // merged across epochs when check_invariants is on
    std::vector<double> curvatures;  // per metapath, from the returned params
    long parameter_count = 0;
};

// Adam on all parameters; curvature stays positive through the softplus
// reparameterization, so no manifold-aware optimizer is involved.
TrainResult train(const HeteroGraph& g, const ModelConfig& mcfg, const TrainConfig& tcfg);

// Embeddings z for the given nodes (row i corresponds to nodes[i]).
ad::Tensor compute_embeddings(const HeteroGraph& g, const ParameterSet& params,
                              const ModelConfig& cfg, const std::vector<int>& nodes,
                              uint64_t seed);

// --- evaluation -------------------------------------------------------------------

struct NodeEvalResult {
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
};

// Classification through a regularized linear probe fit on the train rows;
// clustering through seeded k-means over all rows.
NodeEvalResult evaluate_node(const ad::Tensor& embeddings, const std::vector<int>& labels,
                             const Split& split, int k, uint64_t seed);

struct LinkEvalResult {
    double roc_auc = 0.0;
    double f1 = 0.0;
};
LinkEvalResult evaluate_link(const std::vector<double>& scores, const std::vector<int>& labels);

// dot-product scores through a sigmoid for a set of samples
std::vector<double> link_scores(const ad::Tensor& embeddings, const std::vector<int>& row_of_node,
                                const std::vector<LinkSample>& samples);

// --- ablation ----------------------------------------------------------------------

struct AblationRow {
    Variant variant;
    long parameter_count = 0;
    double macro_f1_mean = 0, macro_f1_std = 0;
    double micro_f1_mean = 0, micro_f1_std = 0;
    double nmi_mean = 0, nmi_std = 0;
    double ari_mean = 0, ari_std = 0;
};

struct AblationReport {
    std::vector<AblationRow> rows;  // FULL, CONCAT, EUCLID, SINGLE
    std::string table() const;     // aligned plain text
};

AblationReport run_ablation(const HeteroGraph& g, const ModelConfig& base,
                            const TrainConfig& tcfg, const std::vector<uint64_t>& seeds);

}  // namespace msgat
