#include "msgat/model.hpp"

#include <algorithm>
#include <cmath>

#include "msgat/errors.hpp"
#include "msgat/geometry_ad.hpp"
#include "msgat/rng.hpp"

namespace msgat {

using ad::Tape;
using ad::Tensor;
using ad::Var;

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "FULL";
        case Variant::Concat: return "CONCAT";
        case Variant::Euclid: return "EUCLID";
        case Variant::Single: return "SINGLE";
    }
    return "?";
}

Variant variant_from_name(const std::string& s) {
    if (s == "FULL") return Variant::Full;
    if (s == "CONCAT") return Variant::Concat;
    if (s == "EUCLID") return Variant::Euclid;
    if (s == "SINGLE") return Variant::Single;
    throw ConfigError("unknown variant '" + s + "' (expected FULL|CONCAT|EUCLID|SINGLE)");
}

void ModelConfig::validate() const {
    if (input_dim < 1 || hidden_dim < 1 || semantic_dim < 1 || output_dim < 1)
        throw ConfigError("model: all dimensions must be >= 1");
    if (heads < 1) throw ConfigError("model: heads must be >= 1");
    if (hidden_dim % heads != 0) throw ConfigError("model: hidden_dim must be divisible by heads");
    if (max_length < 2) throw ConfigError("model: max_length must be >= 2");
    if (eps_boundary <= 0 || eps_boundary >= 1) throw ConfigError("model: bad eps_boundary");
    if (curvature_floor <= 0 && variant != Variant::Euclid)
        throw ConfigError("model: curvature_floor must stay positive");
}

std::vector<Tensor*> ParameterSet::all() {
    std::vector<Tensor*> out{&feat_transform};
    for (auto& per_phi : head_transform)
        for (auto& t : per_phi) out.push_back(&t);
    for (auto& per_phi : head_bias)
        for (auto& t : per_phi) out.push_back(&t);
    for (auto& per_phi : instance_attn)
        for (auto& t : per_phi) out.push_back(&t);
    out.push_back(&semantic_proj);
    out.push_back(&metapath_attn_w);
    out.push_back(&metapath_attn_b);
    out.push_back(&metapath_attn_vec);
    out.push_back(&output_weight);
    for (auto& t : curvature_raw) out.push_back(&t);
    return out;
}

std::vector<const Tensor*> ParameterSet::all() const {
    auto mut = const_cast<ParameterSet*>(this)->all();
    return {mut.begin(), mut.end()};
}

std::vector<std::string> ParameterSet::names() const {
    std::vector<std::string> out{"feat_transform"};
    auto push_group = [&](const char* base, const std::vector<std::vector<Tensor>>& g) {
        for (size_t p = 0; p < g.size(); ++p)
            for (size_t k = 0; k < g[p].size(); ++k)
                out.push_back(std::string(base) + "." + std::to_string(p) + "." +
                              std::to_string(k));
    };
    push_group("head_transform", head_transform);
    push_group("head_bias", head_bias);
    push_group("instance_attn", instance_attn);
    out.push_back("semantic_proj");
    out.push_back("metapath_attn_w");
    out.push_back("metapath_attn_b");
    out.push_back("metapath_attn_vec");
    out.push_back("output_weight");
    for (size_t p = 0; p < curvature_raw.size(); ++p)
        out.push_back("curvature_raw." + std::to_string(p));
    return out;
}

long ParameterSet::count() const {
    long n = 0;
    for (const Tensor* t : all()) n += t->size();
    return n;
}

double ParameterSet::curvature_of(int phi, double floor) const {
    size_t idx = curvature_raw.size() == 1 ? 0 : static_cast<size_t>(phi);
    double theta = curvature_raw[idx].v[0];
    double sp = theta > 30.0 ? theta : std::log1p(std::exp(theta));
    return sp + floor;
}

namespace {

Tensor xavier(Rng& rng, int rows, int cols) {
    Tensor t(rows, cols);
    double bound = std::sqrt(6.0 / (rows + cols));
    for (auto& x : t.v) x = rng.uniform(-bound, bound);
    return t;
}

Tensor attn_init(Rng& rng, int n) {
    Tensor t(n, 1);
    for (auto& x : t.v) x = rng.uniform(-0.1, 0.1);
    return t;
}

}  // namespace

ParameterSet init_parameters(const ModelConfig& cfg, int num_metapaths, uint64_t seed) {
    cfg.validate();
    Rng rng(split_seed(seed, 0x1417ULL));
    ParameterSet p;
    int n = cfg.input_dim;
    int dk = cfg.head_dim();
    int wt_cols = cfg.variant == Variant::Concat ? cfg.max_length * n : n;
    p.feat_transform = xavier(rng, n, wt_cols);
    p.head_transform.resize(static_cast<size_t>(num_metapaths));
    p.head_bias.resize(static_cast<size_t>(num_metapaths));
    p.instance_attn.resize(static_cast<size_t>(num_metapaths));
    for (int phi = 0; phi < num_metapaths; ++phi) {
        for (int k = 0; k < cfg.heads; ++k) {
            p.head_transform[static_cast<size_t>(phi)].push_back(xavier(rng, dk, n));
            p.head_bias[static_cast<size_t>(phi)].push_back(Tensor::zeros(dk));
            p.instance_attn[static_cast<size_t>(phi)].push_back(attn_init(rng, dk));
        }
    }
    p.semantic_proj = xavier(rng, cfg.hidden_dim, cfg.hidden_dim);
    p.metapath_attn_w = xavier(rng, cfg.semantic_dim, cfg.hidden_dim);
    p.metapath_attn_b = Tensor::zeros(cfg.semantic_dim);
    p.metapath_attn_vec = attn_init(rng, cfg.semantic_dim);
    p.output_weight = xavier(rng, cfg.output_dim, cfg.hidden_dim);
    int n_theta = cfg.variant == Variant::Single ? 1 : num_metapaths;
    // softplus(theta) + floor == 1  =>  theta = log(exp(1 - floor) - 1)
    double theta0 = std::log(std::exp(1.0 - cfg.curvature_floor) - 1.0);
    for (int i = 0; i < n_theta; ++i) p.curvature_raw.push_back(Tensor::scalar(theta0));
    return p;
}

ParamVars bind_parameters(Tape& tape, const ParameterSet& p) {
    ParamVars pv;
    auto bind = [&](const Tensor& t) {
        Var v = tape.leaf(t);
        pv.vars.push_back(v);
        return v;
    };
    pv.feat_transform = bind(p.feat_transform);
    pv.head_transform.resize(p.head_transform.size());
    pv.head_bias.resize(p.head_bias.size());
    pv.instance_attn.resize(p.instance_attn.size());
    for (size_t phi = 0; phi < p.head_transform.size(); ++phi)
        for (const Tensor& t : p.head_transform[phi]) pv.head_transform[phi].push_back(bind(t));
    for (size_t phi = 0; phi < p.head_bias.size(); ++phi)
        for (const Tensor& t : p.head_bias[phi]) pv.head_bias[phi].push_back(bind(t));
    for (size_t phi = 0; phi < p.instance_attn.size(); ++phi)
        for (const Tensor& t : p.instance_attn[phi]) pv.instance_attn[phi].push_back(bind(t));
    pv.semantic_proj = bind(p.semantic_proj);
    pv.metapath_attn_w = bind(p.metapath_attn_w);
    pv.metapath_attn_b = bind(p.metapath_attn_b);
    pv.metapath_attn_vec = bind(p.metapath_attn_vec);
    pv.output_weight = bind(p.output_weight);
    for (const Tensor& t : p.curvature_raw) pv.curvature_raw.push_back(bind(t));
    return pv;
}

std::vector<Var> curvature_vars(Tape& t, const ParamVars& pv, const ModelConfig& cfg,
                                int num_metapaths) {
    std::vector<Var> out;
    for (int phi = 0; phi < num_metapaths; ++phi) {
        size_t idx = pv.curvature_raw.size() == 1 ? 0 : static_cast<size_t>(phi);
        out.push_back(t.add_const(t.softplus(pv.curvature_raw[idx]), cfg.curvature_floor));
    }
    return out;
}

namespace {

// softmax over scalar scores; max is subtracted as a recorded-time constant,
// which softmax shift invariance makes gradient-exact
std::vector<Var> scalar_softmax(Tape& t, const std::vector<Var>& scores) {
    double mx = -1e300;
    for (const Var& s : scores) mx = std::max(mx, s.scalar());
    std::vector<Var> expd;
    expd.reserve(scores.size());
    for (const Var& s : scores) expd.push_back(t.exp(t.add_const(s, -mx)));
    Var total = expd[0];
    for (size_t i = 1; i < expd.size(); ++i) total = t.add(total, expd[i]);
    std::vector<Var> out;
    out.reserve(expd.size());
    for (const Var& e : expd) out.push_back(t.div(e, total));
    return out;
}

}  // namespace

Var encode_instance(Tape& t, const HeteroGraph& g, const MetapathInstance& p,
                    const ParamVars& pv, Var curvature, const ModelConfig& cfg,
                    std::vector<double>* mean_out) {
    int n = cfg.input_dim;
    std::vector<double> feat;
    if (cfg.variant == Variant::Concat) {
        feat.assign(static_cast<size_t>(cfg.max_length) * n, 0.0);
        for (size_t i = 0; i < p.nodes.size(); ++i) {
            const double* row = g.feature_row(p.nodes[i]);
            std::copy(row, row + n, feat.begin() + static_cast<long>(i) * n);
        }
    } else {
        feat.assign(static_cast<size_t>(n), 0.0);
        for (int node : p.nodes) {
            const double* row = g.feature_row(node);
            for (int j = 0; j < n; ++j) feat[static_cast<size_t>(j)] += row[j];
        }
        for (auto& x : feat) x /= static_cast<double>(p.nodes.size());
    }
    if (mean_out) *mean_out = feat;
    Var x_e = t.leaf(Tensor::column(feat));
    if (cfg.variant == Variant::Euclid) return t.matvec(pv.feat_transform, x_e);
    Var mapped = geo::ad::exp0(t, x_e, curvature, cfg.eps_boundary);
    return geo::ad::mobius_matvec(t, pv.feat_transform, mapped, curvature, cfg.eps_boundary);
}

Var embed_instance(Tape& t, Var x, Var w1, Var b1, Var curvature, const ModelConfig& cfg) {
    if (cfg.variant == Variant::Euclid) {
        Var u = t.matvec(w1, x);
        if (cfg.bias_before_activation) return t.leaky_relu(t.add(u, b1), cfg.leaky_slope);
        return t.add(t.leaky_relu(u, cfg.leaky_slope), b1);
    }
    Var u = geo::ad::mobius_matvec(t, w1, x, curvature, cfg.eps_boundary);
    Var bias = geo::ad::exp0(t, b1, curvature, cfg.eps_boundary);
    if (cfg.bias_before_activation) {
        Var with_bias = geo::ad::mobius_add(t, u, bias, curvature, cfg.eps_boundary);
        return geo::ad::hyperbolic_activation(t, with_bias, curvature, geo::Activation::LeakyRelu,
                                              cfg.leaky_slope, cfg.eps_boundary);
    }
    Var activated = geo::ad::hyperbolic_activation(t, u, curvature, geo::Activation::LeakyRelu,
                                                   cfg.leaky_slope, cfg.eps_boundary);
    return geo::ad::mobius_add(t, activated, bias, curvature, cfg.eps_boundary);
}

HeadTrace intra_attention_head(Tape& t, const std::vector<Var>& embedded, Var attn,
                               Var curvature, const ModelConfig& cfg) {
    HeadTrace tr;
    bool euclid = cfg.variant == Variant::Euclid;
    std::vector<Var> tangents;
    tangents.reserve(embedded.size());
    for (const Var& h : embedded)
        tangents.push_back(euclid ? h : geo::ad::log0(t, h, curvature));
    for (const Var& lg : tangents) tr.instance_scores.push_back(t.inner(attn, lg));
    tr.instance_weights = scalar_softmax(t, tr.instance_scores);
    Var combined = t.mul(tr.instance_weights[0], tangents[0]);
    for (size_t i = 1; i < tangents.size(); ++i)
        combined = t.add(combined, t.mul(tr.instance_weights[i], tangents[i]));
    if (euclid) {
        tr.output = t.leaky_relu(combined, cfg.leaky_slope);
    } else {
        Var back = geo::ad::exp0(t, combined, curvature, cfg.eps_boundary);
        tr.output = geo::ad::hyperbolic_activation(t, back, curvature, geo::Activation::LeakyRelu,
                                                   cfg.leaky_slope, cfg.eps_boundary);
    }
    return tr;
}

Var map_to_semantic(Tape& t, Var h, Var w2, Var curvature, const ModelConfig& cfg) {
    if (cfg.variant == Variant::Euclid) return t.matvec(w2, h);
    return t.matvec(w2, geo::ad::log0(t, h, curvature));
}

Var inter_attention(Tape& t, std::vector<MetapathTrace>& traces, const ParamVars& pv) {
    std::vector<Var> scores;
    for (MetapathTrace& mt : traces) {
        Var hidden = t.tanh(t.add(t.matvec(pv.metapath_attn_w, mt.semantic), pv.metapath_attn_b));
        mt.score = t.inner(pv.metapath_attn_vec, hidden);
        scores.push_back(mt.score);
    }
    std::vector<Var> weights = scalar_softmax(t, scores);
    for (size_t i = 0; i < traces.size(); ++i) traces[i].weight = weights[i];
    Var z = t.mul(weights[0], traces[0].semantic);
    for (size_t i = 1; i < traces.size(); ++i)
        z = t.add(z, t.mul(weights[i], traces[i].semantic));
    return z;
}

Var output_head(Tape& t, Var z, Var w_o) { return t.softmax(t.matvec(w_o, z)); }

ForwardTrace forward(Tape& t, const HeteroGraph& g, const std::vector<int>& batch,
                     const ParamVars& pv, const ModelConfig& cfg, uint64_t sample_seed,
                     bool with_output_head) {
    int n_phi = static_cast<int>(g.metapaths.size());
    std::vector<Var> curv = curvature_vars(t, pv, cfg, n_phi);
    std::vector<double> curv_now(curv.size());
    for (size_t i = 0; i < curv.size(); ++i) curv_now[i] = curv[i].scalar();

    ForwardTrace trace;
    trace.nodes.reserve(batch.size());
    for (int v : batch) {
        std::vector<int> applicable;
        for (int phi = 0; phi < n_phi; ++phi)
            if (g.metapaths[static_cast<size_t>(phi)].type_seq.front() ==
                g.type_of[static_cast<size_t>(v)])
                applicable.push_back(phi);
        if (applicable.empty())
            throw ConfigError("forward: no metapath starts at the type of node " +
                              std::to_string(v));
        InstanceSet inst = sample_instances(g, v, applicable, cfg.max_length, cfg.instance_cap,
                                            sample_seed);

        NodeTrace nt;
        nt.node = v;
        for (size_t k = 0; k < applicable.size(); ++k) {
            int phi = applicable[k];
            MetapathTrace mt;
            mt.metapath = phi;
            mt.instances = std::move(inst.by_metapath[k]);
            if (mt.instances.empty()) {
                // isolated for this metapath: the node itself stands in (length-1 walk)
                mt.instances.push_back(MetapathInstance{{v}, phi});
                mt.degenerate = true;
            }
            Var c = curv[static_cast<size_t>(phi)];
            for (const MetapathInstance& p : mt.instances) {
                std::vector<double> mean;
                mt.encoded.push_back(encode_instance(t, g, p, pv, c, cfg, &mean));
                mt.instance_means.push_back(std::move(mean));
            }
            mt.embedded.resize(static_cast<size_t>(cfg.heads));
            for (int head = 0; head < cfg.heads; ++head) {
                auto hk = static_cast<size_t>(head);
                auto pk = static_cast<size_t>(phi);
                for (const Var& x : mt.encoded)
                    mt.embedded[hk].push_back(embed_instance(
                        t, x, pv.head_transform[pk][hk], pv.head_bias[pk][hk], c, cfg));
                mt.heads.push_back(
                    intra_attention_head(t, mt.embedded[hk], pv.instance_attn[pk][hk], c, cfg));
            }
            std::vector<Var> head_outputs;
            head_outputs.reserve(mt.heads.size());
            for (const HeadTrace& ht : mt.heads) head_outputs.push_back(ht.output);
            Var cat = cfg.heads == 1 ? head_outputs[0] : t.concat(head_outputs);
            // a concatenation of per-head ball points need not land inside the
            // d-dimensional ball, so project once more
            mt.combined = cfg.variant == Variant::Euclid
                              ? cat
                              : geo::ad::project_to_ball(t, cat, c, cfg.eps_boundary);
            mt.semantic = map_to_semantic(t, mt.combined, pv.semantic_proj, c, cfg);
            nt.per_metapath.push_back(std::move(mt));
        }
        nt.embedding = inter_attention(t, nt.per_metapath, pv);
        if (with_output_head) nt.output = output_head(t, nt.embedding, pv.output_weight);
        trace.nodes.push_back(std::move(nt));
    }
    return trace;
}

TraceStats check_trace(const ForwardTrace& trace, const ModelConfig& cfg,
                       const std::vector<double>& curvatures) {
    TraceStats st;
    for (double c : curvatures) st.min_curvature = std::min(st.min_curvature, c);
    auto check_ball = [&](const Var& x, double c) {
        if (cfg.variant == Variant::Euclid) return;
        double sq = 0.0;
        for (double u : x.val().v) sq += u * u;
        st.max_containment_excess =
            std::max(st.max_containment_excess, c * sq - (1.0 - cfg.eps_boundary));
    };
    for (const NodeTrace& nt : trace.nodes) {
        double beta_sum = 0.0;
        for (const MetapathTrace& mt : nt.per_metapath) {
            double c = curvatures[static_cast<size_t>(mt.metapath)];
            for (const Var& x : mt.encoded) check_ball(x, c);
            for (const auto& per_head : mt.embedded)
                for (const Var& h : per_head) check_ball(h, c);
            for (const HeadTrace& ht : mt.heads) {
                check_ball(ht.output, c);
                double alpha_sum = 0.0;
                for (const Var& a : ht.instance_weights) alpha_sum += a.scalar();
                st.max_weight_sum_err = std::max(st.max_weight_sum_err, std::abs(alpha_sum - 1.0));
            }
            check_ball(mt.combined, c);
            beta_sum += mt.weight.scalar();
        }
        st.max_weight_sum_err = std::max(st.max_weight_sum_err, std::abs(beta_sum - 1.0));
    }
    return st;
}

}  // namespace msgat
