#include "msgat/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "msgat/checkpoint.hpp"
#include "msgat/errors.hpp"
#include "msgat/rng.hpp"

namespace fs = std::filesystem;

namespace msgat {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::vector<std::string> kKnownKeys = {
    "run.task", "run.seed", "run.threads",
    "model.variant", "model.hidden_dim", "model.semantic_dim", "model.heads",
    "model.max_length", "model.instance_cap", "model.leaky_slope", "model.eps_boundary",
    "model.curvature_floor", "model.bias_before_activation",
    "train.epochs", "train.lr", "train.beta1", "train.beta2", "train.adam_eps",
    "train.weight_decay", "train.train_fraction", "train.patience", "train.log_every",
    // manifest metadata is accepted so a manifest can be replayed as a config
    "manifest.artifact_version", "manifest.dataset_fingerprint", "manifest.command",
    "model.input_dim", "model.output_dim",
};

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot write");
    out << body;
}

}  // namespace

ResolvedRun resolve_run(const KvConfig& cfg, const HeteroGraph& g, long seed_override) {
    cfg.require_known(kKnownKeys);
    ResolvedRun run;
    run.train.task = task_from_name(cfg.get("run.task", "node-classification"));
    run.train.seed = static_cast<uint64_t>(cfg.get_int("run.seed", 7));
    if (seed_override >= 0) run.train.seed = static_cast<uint64_t>(seed_override);
    run.threads = static_cast<int>(cfg.get_int("run.threads", 1));
    if (run.threads < 1) throw ConfigError("run.threads must be >= 1");

    run.model.variant = variant_from_name(cfg.get("model.variant", "FULL"));
    run.model.input_dim = g.feature_dim;
    run.model.hidden_dim = static_cast<int>(cfg.get_int("model.hidden_dim", 16));
    run.model.semantic_dim = static_cast<int>(cfg.get_int("model.semantic_dim", 16));
    run.model.heads = static_cast<int>(cfg.get_int("model.heads", 2));
    run.model.max_length = static_cast<int>(cfg.get_int("model.max_length", 3));
    run.model.instance_cap = static_cast<int>(cfg.get_int("model.instance_cap", 64));
    run.model.leaky_slope = cfg.get_double("model.leaky_slope", 0.01);
    run.model.eps_boundary = cfg.get_double("model.eps_boundary", 1e-5);
    run.model.curvature_floor = cfg.get_double("model.curvature_floor", 0.1);
    run.model.bias_before_activation = cfg.get_bool("model.bias_before_activation", false);
    run.model.output_dim =
        run.train.task == Task::LinkPrediction ? run.model.hidden_dim : std::max(g.num_classes, 1);

    run.train.epochs = static_cast<int>(cfg.get_int("train.epochs", 200));
    run.train.lr = cfg.get_double("train.lr", 5e-3);
    run.train.beta1 = cfg.get_double("train.beta1", 0.9);
    run.train.beta2 = cfg.get_double("train.beta2", 0.999);
    run.train.adam_eps = cfg.get_double("train.adam_eps", 1e-8);
    run.train.weight_decay = cfg.get_double("train.weight_decay", 1e-4);
    run.train.train_fraction = cfg.get_double("train.train_fraction", 0.6);
    run.train.patience = static_cast<int>(cfg.get_int("train.patience", 30));
    run.train.log_every = static_cast<int>(cfg.get_int("train.log_every", 20));

    run.model.validate();
    run.train.validate();
    return run;
}

KvConfig ResolvedRun::to_kv() const {
    KvConfig kv;
    kv.set("run.task", task_name(train.task));
    kv.set_int("run.seed", static_cast<long>(train.seed));
    kv.set_int("run.threads", threads);
    kv.set("model.variant", variant_name(model.variant));
    kv.set_int("model.hidden_dim", model.hidden_dim);
    kv.set_int("model.semantic_dim", model.semantic_dim);
    kv.set_int("model.heads", model.heads);
    kv.set_int("model.max_length", model.max_length);
    kv.set_int("model.instance_cap", model.instance_cap);
    kv.set_double("model.leaky_slope", model.leaky_slope);
    kv.set_double("model.eps_boundary", model.eps_boundary);
    kv.set_double("model.curvature_floor", model.curvature_floor);
    kv.set("model.bias_before_activation", model.bias_before_activation ? "1" : "0");
    kv.set_int("model.input_dim", model.input_dim);
    kv.set_int("model.output_dim", model.output_dim);
    kv.set_int("train.epochs", train.epochs);
    kv.set_double("train.lr", train.lr);
    kv.set_double("train.beta1", train.beta1);
    kv.set_double("train.beta2", train.beta2);
    kv.set_double("train.adam_eps", train.adam_eps);
    kv.set_double("train.weight_decay", train.weight_decay);
    kv.set_double("train.train_fraction", train.train_fraction);
    kv.set_int("train.patience", train.patience);
    kv.set_int("train.log_every", train.log_every);
    return kv;
}

KvConfig make_manifest(const ResolvedRun& run, uint64_t fingerprint) {
    KvConfig kv = run.to_kv();
    kv.set("manifest.artifact_version", kArtifactVersion);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint));
    kv.set("manifest.dataset_fingerprint", buf);
    return kv;
}

TrainOutputs run_train_job(const std::string& dataset_dir, const std::string& out_dir,
                           const KvConfig& cfg, long seed_override) {
    HeteroGraph g = load_dataset(dataset_dir);
    ResolvedRun run = resolve_run(cfg, g, seed_override);
    run.train.check_invariants = false;

    TrainOutputs out;
    out.result = train(g, run.model, run.train);

    fs::create_directories(out_dir);
    out.checkpoint_path = out_dir + "/checkpoint.txt";
    out.history_path = out_dir + "/history.tsv";
    out.results_path = out_dir + "/results.txt";
    out.manifest_path = out_dir + "/manifest.ini";

    Checkpoint ck;
    ck.config = run.model;
    ck.num_metapaths = static_cast<int>(g.metapaths.size());
    ck.params = out.result.params;
    save_checkpoint(ck, out.checkpoint_path);
    write_text(out.history_path, out.result.history.text());

    std::string results;
    results += "task = " + task_name(run.train.task) + "\n";
    results += "variant = " + variant_name(run.model.variant) + "\n";
    results += "epochs_run = " + std::to_string(out.result.epochs_run) + "\n";
    results += "first_train_loss = " + fmt(out.result.first_train_loss) + "\n";
    results += "last_train_loss = " + fmt(out.result.last_train_loss) + "\n";
    results += "parameter_count = " + std::to_string(out.result.parameter_count) + "\n";
    for (size_t i = 0; i < out.result.curvatures.size(); ++i)
        results += "curvature_" + g.metapaths[i].name + " = " + fmt(out.result.curvatures[i]) + "\n";

    if (run.train.task == Task::LinkPrediction) {
        int rel = *g.target_relation;
        std::vector<LinkSample> pos;
        for (int u : g.nodes_of_type[static_cast<size_t>(g.relations[static_cast<size_t>(rel)].src_type)])
            for (int v : g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(u)])
                pos.push_back(LinkSample{u, v, 1});
        auto neg = negative_sample(g, rel, static_cast<int>(pos.size()),
                                   split_seed(run.train.seed, 0xea1eULL));
        std::vector<LinkSample> samples = pos;
        samples.insert(samples.end(), neg.begin(), neg.end());
        std::vector<int> nodes;
        for (const LinkSample& s : samples) {
            nodes.push_back(s.u);
            nodes.push_back(s.v);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        ad::Tensor emb = compute_embeddings(g, out.result.params, run.model, nodes, run.train.seed);
        std::vector<int> row_of(static_cast<size_t>(g.num_nodes()), -1);
        for (size_t i = 0; i < nodes.size(); ++i) row_of[static_cast<size_t>(nodes[i])] = static_cast<int>(i);
        std::vector<double> scores = link_scores(emb, row_of, samples);
        std::vector<int> labels;
        for (const LinkSample& s : samples) labels.push_back(s.y);
        LinkEvalResult ev = evaluate_link(scores, labels);
        results += "roc_auc = " + fmt(ev.roc_auc) + "\n";
        results += "f1 = " + fmt(ev.f1) + "\n";
    } else {
        std::vector<int> labeled = g.labeled_nodes();
        std::vector<int> labels;
        for (int v : labeled) labels.push_back(g.label_of[static_cast<size_t>(v)]);
        Split sp = stratified_split(labels, run.train.train_fraction, run.train.seed);
        ad::Tensor emb = compute_embeddings(g, out.result.params, run.model, labeled, run.train.seed);
        NodeEvalResult ev = evaluate_node(emb, labels, sp, g.num_classes, run.train.seed);
        results += "macro_f1 = " + fmt(ev.macro_f1) + "\n";
        results += "micro_f1 = " + fmt(ev.micro_f1) + "\n";
        results += "nmi = " + fmt(ev.nmi) + "\n";
        results += "ari = " + fmt(ev.ari) + "\n";
    }
    out.results_text = results;
    write_text(out.results_path, results);

    KvConfig manifest = make_manifest(run, dataset_fingerprint(dataset_dir));
    write_text(out.manifest_path, manifest.text());
    return out;
}

std::string run_eval_job(const std::string& checkpoint_path, const std::string& dataset_dir,
                         const std::string& task, uint64_t seed) {
    HeteroGraph g = load_dataset(dataset_dir);
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (ck.num_metapaths != static_cast<int>(g.metapaths.size()))
        throw DataError("eval: checkpoint was trained with a different metapath count");
    if (ck.config.input_dim != g.feature_dim)
        throw DataError("eval: checkpoint feature dim does not match dataset");
    Task t = task_from_name(task);
    std::string results;
    if (t == Task::LinkPrediction) {
        if (!g.target_relation) throw ConfigError("eval: dataset has no target_relation");
        int rel = *g.target_relation;
        std::vector<LinkSample> pos;
        for (int u : g.nodes_of_type[static_cast<size_t>(g.relations[static_cast<size_t>(rel)].src_type)])
            for (int v : g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(u)])
                pos.push_back(LinkSample{u, v, 1});
        auto neg = negative_sample(g, rel, static_cast<int>(pos.size()), split_seed(seed, 0xea1eULL));
        std::vector<LinkSample> samples = pos;
        samples.insert(samples.end(), neg.begin(), neg.end());
        std::vector<int> nodes;
        for (const LinkSample& s : samples) {
            nodes.push_back(s.u);
            nodes.push_back(s.v);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        ad::Tensor emb = compute_embeddings(g, ck.params, ck.config, nodes, seed);
        std::vector<int> row_of(static_cast<size_t>(g.num_nodes()), -1);
        for (size_t i = 0; i < nodes.size(); ++i) row_of[static_cast<size_t>(nodes[i])] = static_cast<int>(i);
        std::vector<double> scores = link_scores(emb, row_of, samples);
        std::vector<int> labels;
        for (const LinkSample& s : samples) labels.push_back(s.y);
        LinkEvalResult ev = evaluate_link(scores, labels);
        results += "roc_auc = " + fmt(ev.roc_auc) + "\n";
        results += "f1 = " + fmt(ev.f1) + "\n";
    } else {
        std::vector<int> labeled = g.labeled_nodes();
        if (labeled.empty()) throw DataError("eval: dataset has no labels");
        std::vector<int> labels;
        for (int v : labeled) labels.push_back(g.label_of[static_cast<size_t>(v)]);
        Split sp = stratified_split(labels, 0.6, seed);
        ad::Tensor emb = compute_embeddings(g, ck.params, ck.config, labeled, seed);
        NodeEvalResult ev = evaluate_node(emb, labels, sp, g.num_classes, seed);
        results += "macro_f1 = " + fmt(ev.macro_f1) + "\n";
        results += "micro_f1 = " + fmt(ev.micro_f1) + "\n";
        results += "nmi = " + fmt(ev.nmi) + "\n";
        results += "ari = " + fmt(ev.ari) + "\n";
    }
    return results;
}

}  // namespace msgat
