#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgat/autodiff.hpp"
#include "msgat/graph.hpp"

namespace msgat {

enum class Variant { Full, Concat, Euclid, Single };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

struct ModelConfig {
    int input_dim = 0;     // n, taken from the dataset
    int hidden_dim = 16;   // d, ball dimension of metapath-specific embeddings
    int semantic_dim = 16; // d', hidden width of the metapath attention scorer
    int output_dim = 0;    // d_o, class count for node tasks
    int heads = 2;         // K; hidden_dim must be divisible by K
    int max_length = 3;    // l, maximum metapath length in nodes
    int instance_cap = 64; // per (node, metapath) uniform subsample bound
    Variant variant = Variant::Full;
    double leaky_slope = 0.01;
    double eps_boundary = 1e-5;
    double curvature_floor = 0.1;  // c = softplus(theta) + floor
    // The written composition order is activation first, then the bias addition.
    // Set this to use the conventional order (bias inside the activation) instead.
    bool bias_before_activation = false;

    int head_dim() const { return hidden_dim / heads; }
    void validate() const;  // throws ConfigError
};

// All trainable tensors. Per-metapath, per-head tensors are indexed
// [metapath][head]; curvature pre-parameters are per metapath (one shared
// entry under the Single variant).
struct ParameterSet {
    ad::Tensor feat_transform;                          // n x n (Concat: n x l*n)
    std::vector<std::vector<ad::Tensor>> head_transform;  // d_k x n
    std::vector<std::vector<ad::Tensor>> head_bias;       // d_k
    std::vector<std::vector<ad::Tensor>> instance_attn;   // d_k
    ad::Tensor semantic_proj;     // d x d
    ad::Tensor metapath_attn_w;   // d' x d
    ad::Tensor metapath_attn_b;   // d'
    ad::Tensor metapath_attn_vec; // d'
    ad::Tensor output_weight;     // d_o x d
    std::vector<ad::Tensor> curvature_raw;  // theta, 1x1 each

    std::vector<ad::Tensor*> all();
    std::vector<const ad::Tensor*> all() const;
    std::vector<std::string> names() const;
    long count() const;  // total scalar parameters

    double curvature_of(int phi, double floor) const;
};

// theta is initialized so that softplus(theta) + floor == 1 exactly
ParameterSet init_parameters(const ModelConfig& cfg, int num_metapaths, uint64_t seed);

// Mirrors ParameterSet as tape leaves, in ParameterSet::all() order.
struct ParamVars {
    std::vector<ad::Var> vars;
    ad::Var feat_transform;
    std::vector<std::vector<ad::Var>> head_transform, head_bias, instance_attn;
    ad::Var semantic_proj, metapath_attn_w, metapath_attn_b, metapath_attn_vec, output_weight;
    std::vector<ad::Var> curvature_raw;
};
ParamVars bind_parameters(ad::Tape& tape, const ParameterSet& p);

// --- forward trace -----------------------------------------------------------

struct HeadTrace {
    std::vector<ad::Var> instance_scores;   // e_p, scalars
    std::vector<ad::Var> instance_weights;  // alpha_p, scalars, sum to 1
    ad::Var output;                         // d_k ball point (Euclid: plain vector)
};

struct MetapathTrace {
    int metapath = -1;
    bool degenerate = false;                // no sampled instance; the node itself stands in
    std::vector<MetapathInstance> instances;
    std::vector<std::vector<double>> instance_means;  // x_p^E (plain, features are constants)
    std::vector<ad::Var> encoded;           // x_p^H per instance
    std::vector<std::vector<ad::Var>> embedded;  // [head][instance] h_p
    std::vector<HeadTrace> heads;
    ad::Var combined;   // h_v^phi, d-dim
    ad::Var semantic;   // g_v^phi = W log0(h_v^phi)
    ad::Var score;      // e_phi, scalar
    ad::Var weight;     // beta_phi, scalar
};

struct NodeTrace {
    int node = -1;
    std::vector<MetapathTrace> per_metapath;  // metapaths applicable to this node's type
    ad::Var embedding;                        // z_v
    ad::Var output;                           // f(z_v), node tasks only
};

struct ForwardTrace {
    std::vector<NodeTrace> nodes;
};

// --- building blocks (exposed for unit tests) ---------------------------------

ad::Var encode_instance(ad::Tape& t, const HeteroGraph& g, const MetapathInstance& p,
                        const ParamVars& pv, ad::Var curvature, const ModelConfig& cfg,
                        std::vector<double>* mean_out);
ad::Var embed_instance(ad::Tape& t, ad::Var x, ad::Var w1, ad::Var b1, ad::Var curvature,
                       const ModelConfig& cfg);
HeadTrace intra_attention_head(ad::Tape& t, const std::vector<ad::Var>& embedded, ad::Var attn,
                               ad::Var curvature, const ModelConfig& cfg);
ad::Var map_to_semantic(ad::Tape& t, ad::Var h, ad::Var w2, ad::Var curvature,
                        const ModelConfig& cfg);
ad::Var inter_attention(ad::Tape& t, std::vector<MetapathTrace>& traces, const ParamVars& pv);
ad::Var output_head(ad::Tape& t, ad::Var z, ad::Var w_o);

// Full pipeline for a batch of nodes. `metapath_filter` empty means all
// metapaths; nodes use the subset starting at their own type.
ForwardTrace forward(ad::Tape& t, const HeteroGraph& g, const std::vector<int>& batch,
                     const ParamVars& pv, const ModelConfig& cfg, uint64_t sample_seed,
                     bool with_output_head = true);

// curvature Vars per metapath: softplus(theta) + floor
std::vector<ad::Var> curvature_vars(ad::Tape& t, const ParamVars& pv, const ModelConfig& cfg,
                                    int num_metapaths);

// --- trace validation ----------------------------------------------------------

struct TraceStats {
    double max_weight_sum_err = 0.0;   // max |sum(alpha)-1| and |sum(beta)-1|
    double max_containment_excess = 0.0;  // max over ball points of c||x||^2 - (1-eps)
    double min_curvature = 1e300;
};
TraceStats check_trace(const ForwardTrace& trace, const ModelConfig& cfg,
                       const std::vector<double>& curvatures);

}  // namespace msgat
