#include "msgat/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "msgat/errors.hpp"
#include "msgat/rng.hpp"

namespace msgat {

using ad::Tape;
using ad::Tensor;
using ad::Var;

std::string task_name(Task t) {
    switch (t) {
        case Task::NodeClassification: return "node-classification";
        case Task::NodeClustering: return "node-clustering";
        case Task::LinkPrediction: return "link-prediction";
    }
    return "?";
}

Task task_from_name(const std::string& s) {
    if (s == "node-classification") return Task::NodeClassification;
    if (s == "node-clustering") return Task::NodeClustering;
    if (s == "link-prediction") return Task::LinkPrediction;
    throw ConfigError("unknown task '" + s + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train: train_fraction must be in (0,1)");
    if (lr < 0.0) throw ConfigError("train: negative learning rate");
    if (patience < 0) throw ConfigError("train: negative patience");
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void MetricHistory::add(int epoch, const std::string& split, const std::string& metric,
                        double value) {
    lines.push_back(std::to_string(epoch) + "\t" + split + "\t" + metric + "\t" + fmt(value));
}

std::string MetricHistory::text() const {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

Split stratified_split(const std::vector<int>& labels, double train_fraction, uint64_t seed) {
    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
    Rng rng(split_seed(seed, 0x59117ULL));
    Split sp;
    for (auto& [cls, members] : by_class) {
        (void)cls;
        rng.shuffle(members);
        size_t n_train = static_cast<size_t>(std::floor(train_fraction * members.size() + 0.5));
        n_train = std::min(n_train, members.size());
        size_t rest = members.size() - n_train;
        size_t n_val = rest / 2;
        for (size_t i = 0; i < members.size(); ++i) {
            if (i < n_train)
                sp.train.push_back(members[i]);
            else if (i < n_train + n_val)
                sp.val.push_back(members[i]);
            else
                sp.test.push_back(members[i]);
        }
    }
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.val.begin(), sp.val.end());
    std::sort(sp.test.begin(), sp.test.end());
    if (sp.train.empty() || sp.val.empty() || sp.test.empty())
        throw DataError("stratified_split: a split came out empty; adjust the train fraction");
    return sp;
}

std::vector<LinkSample> negative_sample(const HeteroGraph& g, int relation, int count,
                                        uint64_t seed) {
    if (relation < 0 || relation >= static_cast<int>(g.relations.size()))
        throw ConfigError("negative_sample: relation does not exist");
    const RelationDef& rel = g.relations[static_cast<size_t>(relation)];
    const auto& srcs = g.nodes_of_type[static_cast<size_t>(rel.src_type)];
    const auto& dsts = g.nodes_of_type[static_cast<size_t>(rel.dst_type)];
    long edges = 0;
    for (int u : srcs) edges += static_cast<long>(g.neighbors[static_cast<size_t>(relation)][static_cast<size_t>(u)].size());
    long possible = static_cast<long>(srcs.size()) * static_cast<long>(dsts.size()) - edges;
    if (possible < count)
        throw DataError("negative_sample: graph too dense, only " + std::to_string(possible) +
                        " non-edges available");
    Rng rng(split_seed(seed, 0x4e65ULL));
    std::set<std::pair<int, int>> used;
    std::vector<LinkSample> out;
    long tries = 0;
    const long bound = 200L * count + 10000L;
    while (static_cast<int>(out.size()) < count && tries < bound) {
        ++tries;
        int u = srcs[static_cast<size_t>(rng.index(static_cast<int>(srcs.size())))];
        int v = dsts[static_cast<size_t>(rng.index(static_cast<int>(dsts.size())))];
        if (u == v) continue;
        if (g.has_edge(relation, u, v)) continue;
        if (!used.insert({u, v}).second) continue;
        out.push_back(LinkSample{u, v, 0});
    }
    if (static_cast<int>(out.size()) < count)
        throw DataError("negative_sample: retry bound exhausted (graph too dense)");
    return out;
}

Var node_loss(Tape& t, const ForwardTrace& trace, const HeteroGraph& g) {
    Var total;
    bool first = true;
    for (const NodeTrace& nt : trace.nodes) {
        int y = g.label_of[static_cast<size_t>(nt.node)];
        if (y < 0) continue;  // unlabeled nodes contribute nothing
        const Tensor& probs = nt.output.val();
        if (y >= probs.rows) throw DataError("node_loss: label out of range");
        Tensor onehot = Tensor::zeros(probs.rows);
        onehot[y] = 1.0;
        Var p_y = t.inner(nt.output, t.leaf(onehot));
        Var term = t.mul_const(t.log(t.clamp(p_y, 1e-12, 1.0)), -1.0);
        total = first ? term : t.add(total, term);
        first = false;
    }
    if (first) throw DataError("node_loss: no labeled nodes in batch");
    return total;
}

Var link_pair_loss(Tape& t, Var z_u, Var z_v, int y) {
    Var p = t.clamp(t.sigmoid(t.inner(z_u, z_v)), 1e-12, 1.0 - 1e-12);
    if (y == 1) return t.mul_const(t.log(p), -1.0);
    return t.mul_const(t.log(t.sub(t.constant(1.0), p)), -1.0);
}

namespace {

// Adam with per-tensor first/second moments. Weight decay (classic L2-into-
// gradient) applies to weight matrices and attention vectors only; biases and
// curvature pre-parameters are exempt.
struct Adam {
    std::vector<Tensor> m, v;
    std::vector<bool> decay;
    long step_count = 0;

    Adam(ParameterSet& p, const std::vector<std::string>& names) {
        for (Tensor* t : p.all()) {
            m.emplace_back(t->rows, t->cols);
            v.emplace_back(t->rows, t->cols);
        }
        for (const std::string& n : names)
            decay.push_back(n.rfind("head_bias", 0) != 0 && n.rfind("metapath_attn_b", 0) != 0 &&
                            n.rfind("curvature_raw", 0) != 0);
    }

    void step(ParameterSet& p, const std::vector<Tensor>& grads, const TrainConfig& cfg) {
        ++step_count;
        auto tensors = p.all();
        double bc1 = 1.0 - std::pow(cfg.beta1, step_count);
        double bc2 = 1.0 - std::pow(cfg.beta2, step_count);
        for (size_t k = 0; k < tensors.size(); ++k) {
            Tensor& w = *tensors[k];
            for (int i = 0; i < w.size(); ++i) {
                double g = grads[k][i];
                if (decay[k]) g += cfg.weight_decay * w[i];
                m[k][i] = cfg.beta1 * m[k][i] + (1.0 - cfg.beta1) * g;
                v[k][i] = cfg.beta2 * v[k][i] + (1.0 - cfg.beta2) * g * g;
                w[i] -= cfg.lr * (m[k][i] / bc1) / (std::sqrt(v[k][i] / bc2) + cfg.adam_eps);
            }
        }
    }
};

void merge_stats(TraceStats& acc, const TraceStats& s) {
    acc.max_weight_sum_err = std::max(acc.max_weight_sum_err, s.max_weight_sum_err);
    acc.max_containment_excess = std::max(acc.max_containment_excess, s.max_containment_excess);
    acc.min_curvature = std::min(acc.min_curvature, s.min_curvature);
}

std::vector<double> current_curvatures(const ParameterSet& p, const ModelConfig& cfg,
                                       int n_phi) {
    std::vector<double> out;
    for (int phi = 0; phi < n_phi; ++phi) out.push_back(p.curvature_of(phi, cfg.curvature_floor));
    return out;
}

// One node-task epoch: per-node tape, per-node backward, gradients accumulated
// in node order (fixed reduction order keeps runs bit-reproducible).
double node_epoch(const HeteroGraph& g, ParameterSet& params, const ModelConfig& mcfg,
                  const std::vector<int>& nodes, uint64_t sample_seed, bool update,
                  std::vector<Tensor>* grad_out, TraceStats* stats) {
    double total = 0.0;
    for (int v : nodes) {
        Tape tape;
        ParamVars pv = bind_parameters(tape, params);
        ForwardTrace trace = forward(tape, g, {v}, pv, mcfg, sample_seed);
        Var loss = node_loss(tape, trace, g);
        total += loss.scalar();
        if (stats) {
            auto curv = current_curvatures(params, mcfg, static_cast<int>(g.metapaths.size()));
            merge_stats(*stats, check_trace(trace, mcfg, curv));
        }
        if (update) {
            tape.backward(loss);
            for (size_t k = 0; k < pv.vars.size(); ++k) {
                const Tensor& gr = pv.vars[k].grad();
                if (gr.size() == 0) continue;
                for (int i = 0; i < gr.size(); ++i) (*grad_out)[k][i] += gr[i];
            }
        }
    }
    return total;
}

// One link-task pass over the sample set; pairs are independent tapes. The
// per-pair loss is scaled by 1/|S| on tape, so accumulated gradients match the
// mean binary cross-entropy.
double link_epoch(const HeteroGraph& g, ParameterSet& params, const ModelConfig& mcfg,
                  const std::vector<LinkSample>& samples, uint64_t sample_seed, bool update,
                  std::vector<Tensor>* grad_out, TraceStats* stats) {
    if (samples.empty()) throw DataError("link loss: empty sample set");
    double total = 0.0;
    double inv = 1.0 / static_cast<double>(samples.size());
    for (const LinkSample& s : samples) {
        Tape tape;
        ParamVars pv = bind_parameters(tape, params);
        ForwardTrace trace = forward(tape, g, {s.u, s.v}, pv, mcfg, sample_seed, false);
        Var pair = link_pair_loss(tape, trace.nodes[0].embedding, trace.nodes[1].embedding, s.y);
        total += pair.scalar();
        if (stats) {
            auto curv = current_curvatures(params, mcfg, static_cast<int>(g.metapaths.size()));
            merge_stats(*stats, check_trace(trace, mcfg, curv));
        }
        if (update) {
            Var scaled = tape.mul_const(pair, inv);
            tape.backward(scaled);
            for (size_t k = 0; k < pv.vars.size(); ++k) {
                const Tensor& gr = pv.vars[k].grad();
                if (gr.size() == 0) continue;
                for (int i = 0; i < gr.size(); ++i) (*grad_out)[k][i] += gr[i];
            }
        }
    }
    return total * inv;
}

}  // namespace

ad::Tensor compute_embeddings(const HeteroGraph& g, const ParameterSet& params,
                              const ModelConfig& cfg, const std::vector<int>& nodes,
                              uint64_t seed) {
    Tensor out(static_cast<int>(nodes.size()), cfg.hidden_dim);
    const size_t chunk = 32;
    for (size_t base = 0; base < nodes.size(); base += chunk) {
        Tape tape;
        ParamVars pv = bind_parameters(tape, params);
        std::vector<int> batch(nodes.begin() + static_cast<long>(base),
                               nodes.begin() + static_cast<long>(std::min(base + chunk, nodes.size())));
        ForwardTrace trace = forward(tape, g, batch, pv, cfg, seed, false);
        for (size_t i = 0; i < batch.size(); ++i) {
            const Tensor& z = trace.nodes[i].embedding.val();
            for (int j = 0; j < cfg.hidden_dim; ++j) out.at(static_cast<int>(base + i), j) = z[j];
        }
    }
    return out;
}

TrainResult train(const HeteroGraph& g, const ModelConfig& mcfg, const TrainConfig& tcfg) {
    mcfg.validate();
    tcfg.validate();
    int n_phi = static_cast<int>(g.metapaths.size());
    if (n_phi == 0) throw ConfigError("train: dataset declares no metapaths");

    ParameterSet params = init_parameters(mcfg, n_phi, tcfg.seed);
    Adam opt(params, params.names());

    TrainResult res;
    res.parameter_count = params.count();

    // task-specific preparation
    std::vector<int> labeled = g.labeled_nodes();
    Split node_split;
    std::vector<LinkSample> train_pos, val_samples, test_samples;
    if (tcfg.task == Task::LinkPrediction) {
        if (!g.target_relation) throw ConfigError("train: link task needs a target_relation");
        int rel = *g.target_relation;
        std::vector<LinkSample> pos;
        for (int u : g.nodes_of_type[static_cast<size_t>(g.relations[static_cast<size_t>(rel)].src_type)])
            for (int v : g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(u)])
                pos.push_back(LinkSample{u, v, 1});
        if (pos.size() < 4) throw DataError("train: too few edges in the target relation");
        Rng rng(split_seed(tcfg.seed, 0x11417ULL));
        rng.shuffle(pos);
        size_t n_train = static_cast<size_t>(std::floor(tcfg.train_fraction * pos.size() + 0.5));
        n_train = std::max<size_t>(1, std::min(n_train, pos.size() - 2));
        size_t n_val = (pos.size() - n_train) / 2;
        std::vector<LinkSample> val_pos(pos.begin() + static_cast<long>(n_train),
                                        pos.begin() + static_cast<long>(n_train + n_val));
        std::vector<LinkSample> test_pos(pos.begin() + static_cast<long>(n_train + n_val),
                                         pos.end());
        train_pos.assign(pos.begin(), pos.begin() + static_cast<long>(n_train));
        // fixed, balanced evaluation sets
        auto val_neg = negative_sample(g, rel, static_cast<int>(val_pos.size()),
                                       split_seed(tcfg.seed, 0x0a1dULL));
        auto test_neg = negative_sample(g, rel, static_cast<int>(test_pos.size()),
                                        split_seed(tcfg.seed, 0x7e57ULL));
        val_samples = val_pos;
        val_samples.insert(val_samples.end(), val_neg.begin(), val_neg.end());
        test_samples = test_pos;
        test_samples.insert(test_samples.end(), test_neg.begin(), test_neg.end());
    } else {
        if (labeled.empty()) throw DataError("train: node task on an unlabeled dataset");
        std::vector<int> labels;
        for (int v : labeled) labels.push_back(g.label_of[static_cast<size_t>(v)]);
        node_split = stratified_split(labels, tcfg.train_fraction, tcfg.seed);
    }

    double best_val = 1e300;
    ParameterSet best_params = params;
    int bad_epochs = 0;

    for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        uint64_t epoch_seed = split_seed(tcfg.seed, 0xe90cULL + static_cast<uint64_t>(epoch));
        std::vector<Tensor> grads;
        for (Tensor* t : params.all()) grads.emplace_back(t->rows, t->cols);
        TraceStats epoch_stats;
        double train_loss = 0.0, val_loss = 0.0;

        if (tcfg.task == Task::LinkPrediction) {
            int rel = *g.target_relation;
            auto neg = negative_sample(g, rel, static_cast<int>(train_pos.size()), epoch_seed);
            std::vector<LinkSample> batch = train_pos;
            batch.insert(batch.end(), neg.begin(), neg.end());
            train_loss = link_epoch(g, params, mcfg, batch, epoch_seed, tcfg.lr > 0.0, &grads,
                                    tcfg.check_invariants ? &epoch_stats : nullptr);
            if (tcfg.lr > 0.0) opt.step(params, grads, tcfg);
            val_loss = link_epoch(g, params, mcfg, val_samples, tcfg.seed, false, nullptr, nullptr);
        } else {
            std::vector<int> train_nodes, val_nodes;
            for (int i : node_split.train) train_nodes.push_back(labeled[static_cast<size_t>(i)]);
            for (int i : node_split.val) val_nodes.push_back(labeled[static_cast<size_t>(i)]);
            train_loss = node_epoch(g, params, mcfg, train_nodes, epoch_seed, tcfg.lr > 0.0,
                                    &grads, tcfg.check_invariants ? &epoch_stats : nullptr);
            if (tcfg.lr > 0.0) opt.step(params, grads, tcfg);
            val_loss = node_epoch(g, params, mcfg, val_nodes, tcfg.seed, false, nullptr, nullptr);
        }

        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
        res.history.add(epoch, "train", "loss", train_loss);
        res.history.add(epoch, "val", "loss", val_loss);
        if (tcfg.check_invariants) merge_stats(res.worst_stats, epoch_stats);
        if (epoch == 1) res.first_train_loss = train_loss;
        res.last_train_loss = train_loss;
        res.epochs_run = epoch;

        if (val_loss < best_val) {
            best_val = val_loss;
            best_params = params;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
        }
        if (tcfg.patience > 0 && bad_epochs >= tcfg.patience) break;
    }

    res.params = std::move(best_params);
    res.curvatures = current_curvatures(res.params, mcfg, n_phi);
    return res;
}

NodeEvalResult evaluate_node(const ad::Tensor& embeddings, const std::vector<int>& labels,
                             const Split& split, int k, uint64_t seed) {
    NodeEvalResult out;
    std::set<int> train_classes;
    for (int i : split.train) train_classes.insert(labels[static_cast<size_t>(i)]);
    if (train_classes.size() < 2) throw DataError("evaluate_node: single-class split");
    int C = 0;
    for (int y : labels) C = std::max(C, y + 1);

    Tensor train_x(static_cast<int>(split.train.size()), embeddings.cols);
    std::vector<int> train_y;
    for (size_t i = 0; i < split.train.size(); ++i) {
        for (int j = 0; j < embeddings.cols; ++j)
            train_x.at(static_cast<int>(i), j) = embeddings.at(split.train[i], j);
        train_y.push_back(labels[static_cast<size_t>(split.train[i])]);
    }
    Tensor test_x(static_cast<int>(split.test.size()), embeddings.cols);
    std::vector<int> test_y;
    for (size_t i = 0; i < split.test.size(); ++i) {
        for (int j = 0; j < embeddings.cols; ++j)
            test_x.at(static_cast<int>(i), j) = embeddings.at(split.test[i], j);
        test_y.push_back(labels[static_cast<size_t>(split.test[i])]);
    }
    auto pred = metrics::linear_probe_predict(train_x, train_y, test_x, C);
    auto f1 = metrics::f1_scores(pred, test_y, C);
    out.macro_f1 = f1.macro;
    out.micro_f1 = f1.micro;

    auto clusters = metrics::kmeans(embeddings, k, 20, 100, seed);
    out.nmi = metrics::nmi(clusters, labels);
    out.ari = metrics::ari(clusters, labels);
    return out;
}

LinkEvalResult evaluate_link(const std::vector<double>& scores, const std::vector<int>& labels) {
    LinkEvalResult out;
    out.roc_auc = metrics::roc_auc(scores, labels);
    out.f1 = metrics::binary_f1_at(scores, labels, 0.5);
    return out;
}

std::vector<double> link_scores(const ad::Tensor& embeddings, const std::vector<int>& row_of_node,
                                const std::vector<LinkSample>& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const LinkSample& s : samples) {
        double dotp = 0.0;
        int ru = row_of_node[static_cast<size_t>(s.u)];
        int rv = row_of_node[static_cast<size_t>(s.v)];
        for (int j = 0; j < embeddings.cols; ++j) dotp += embeddings.at(ru, j) * embeddings.at(rv, j);
        out.push_back(1.0 / (1.0 + std::exp(-dotp)));
    }
    return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    s = xs.size() > 1 ? std::sqrt(s / static_cast<double>(xs.size() - 1)) : 0.0;
    return {m, s};
}

}  // namespace

AblationReport run_ablation(const HeteroGraph& g, const ModelConfig& base,
                            const TrainConfig& tcfg, const std::vector<uint64_t>& seeds) {
    if (seeds.size() < 3) throw ConfigError("run_ablation: need at least 3 seeds");
    AblationReport rep;
    for (Variant var : {Variant::Full, Variant::Concat, Variant::Euclid, Variant::Single}) {
        ModelConfig mcfg = base;
        mcfg.variant = var;
        std::vector<double> macro, micro, nmi_v, ari_v;
        long pcount = 0;
        for (uint64_t seed : seeds) {
            TrainConfig t = tcfg;
            t.seed = seed;
            TrainResult r = train(g, mcfg, t);
            pcount = r.parameter_count;
            std::vector<int> labeled = g.labeled_nodes();
            std::vector<int> labels;
            for (int v : labeled) labels.push_back(g.label_of[static_cast<size_t>(v)]);
            Split sp = stratified_split(labels, t.train_fraction, seed);
            Tensor emb = compute_embeddings(g, r.params, mcfg, labeled, seed);
            NodeEvalResult ev = evaluate_node(emb, labels, sp, g.num_classes, seed);
            macro.push_back(ev.macro_f1);
            micro.push_back(ev.micro_f1);
            nmi_v.push_back(ev.nmi);
            ari_v.push_back(ev.ari);
        }
        AblationRow row;
        row.variant = var;
        row.parameter_count = pcount;
        std::tie(row.macro_f1_mean, row.macro_f1_std) = mean_std(macro);
        std::tie(row.micro_f1_mean, row.micro_f1_std) = mean_std(micro);
        std::tie(row.nmi_mean, row.nmi_std) = mean_std(nmi_v);
        std::tie(row.ari_mean, row.ari_std) = mean_std(ari_v);
        rep.rows.push_back(row);
    }
    return rep;
}

std::string AblationReport::table() const {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-8s %10s %16s %16s %16s %16s\n", "variant", "params",
                  "Macro-F1", "Micro-F1", "NMI", "ARI");
    out += buf;
    for (const AblationRow& r : rows) {
        auto cell = [](double m, double s) {
            char c[40];
            std::snprintf(c, sizeof c, "%.4f+/-%.4f", m, s);
            return std::string(c);
        };
        std::snprintf(buf, sizeof buf, "%-8s %10ld %16s %16s %16s %16s\n",
                      variant_name(r.variant).c_str(), r.parameter_count,
                      cell(r.macro_f1_mean, r.macro_f1_std).c_str(),
                      cell(r.micro_f1_mean, r.micro_f1_std).c_str(),
                      cell(r.nmi_mean, r.nmi_std).c_str(),
                      cell(r.ari_mean, r.ari_std).c_str());
        out += buf;
    }
    return out;
}

}  // namespace msgat
