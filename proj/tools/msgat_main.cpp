// msgat: multi-space hyperbolic heterogeneous graph attention, end to end.
// Subcommands: train, eval, embed, sample, delta, gen-synthetic, ablate.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "msgat/checkpoint.hpp"
#include "msgat/config.hpp"
#include "msgat/errors.hpp"
#include "msgat/graph.hpp"
#include "msgat/rng.hpp"
#include "msgat/runner.hpp"
#include "msgat/train.hpp"

namespace {

using namespace msgat;

int g_log_level = 1;  // 0=error 1=info 2=debug

void init_log_level() {
    const char* env = std::getenv("MSGAT_LOG");
    if (!env) return;
    std::string v = env;
    if (v == "error")
        g_log_level = 0;
    else if (v == "info")
        g_log_level = 1;
    else if (v == "debug")
        g_log_level = 2;
    else
        throw ConfigError("MSGAT_LOG must be one of error|info|debug");
}

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[info] " << msg << "\n";
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

KvConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return KvConfig();
    return KvConfig::parse_file(path);
}

int cmd_train(const std::string& data, const std::string& out, const std::string& config,
              long seed) {
    TrainOutputs res = run_train_job(data, out, load_config_or_default(config), seed);
    std::cout << res.results_text;
    log_info("checkpoint: " + res.checkpoint_path);
    log_info("history:    " + res.history_path);
    log_info("manifest:   " + res.manifest_path);
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& task,
             long seed) {
    std::cout << run_eval_job(checkpoint, data, task, seed < 0 ? 7u : static_cast<uint64_t>(seed));
    return 0;
}

int cmd_embed(const std::string& checkpoint, const std::string& data, const std::string& out_path,
              long seed) {
    HeteroGraph g = load_dataset(data);
    Checkpoint ck = load_checkpoint(checkpoint);
    std::vector<int> nodes;
    for (const Metapath& mp : g.metapaths) {
        for (int v : g.nodes_of_type[static_cast<size_t>(mp.type_seq.front())]) nodes.push_back(v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    ad::Tensor emb = compute_embeddings(g, ck.params, ck.config, nodes,
                                        seed < 0 ? 7u : static_cast<uint64_t>(seed));
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError(out_path + ": cannot write");
    for (size_t i = 0; i < nodes.size(); ++i) {
        out << nodes[i];
        for (int j = 0; j < emb.cols; ++j) out << '\t' << fmt(emb.at(static_cast<int>(i), j));
        out << '\n';
    }
    log_info("wrote " + std::to_string(nodes.size()) + " embeddings to " + out_path);
    return 0;
}

int cmd_sample(const std::string& data, int node, const std::string& metapaths_arg, int l,
               int cap, long seed) {
    HeteroGraph g = load_dataset(data);
    std::vector<int> phis;
    if (metapaths_arg.empty()) {
        for (size_t i = 0; i < g.metapaths.size(); ++i)
            if (g.metapaths[i].type_seq.front() == g.type_of[static_cast<size_t>(node)])
                phis.push_back(static_cast<int>(i));
    } else {
        std::istringstream ss(metapaths_arg);
        std::string name;
        while (std::getline(ss, name, ';')) {
            int id = g.metapath_id(name);
            if (id < 0) throw ConfigError("unknown metapath '" + name + "'");
            phis.push_back(id);
        }
    }
    InstanceSet set = sample_instances(g, node, phis, l, cap,
                                       seed < 0 ? 7u : static_cast<uint64_t>(seed));
    for (size_t k = 0; k < phis.size(); ++k) {
        const Metapath& mp = g.metapaths[static_cast<size_t>(phis[k])];
        for (const MetapathInstance& inst : set.by_metapath[k]) {
            std::cout << mp.name;
            for (int v : inst.nodes) std::cout << '\t' << v;
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_delta(const std::string& data, const std::string& metapath, long budget, long seed) {
    HeteroGraph g = load_dataset(data);
    int phi = g.metapath_id(metapath);
    if (phi < 0) throw ConfigError("unknown metapath '" + metapath + "'");
    HomogeneousGraph h = metapath_subgraph(g, phi);
    DeltaReport rep = delta_hyperbolicity(h, budget, seed < 0 ? 7u : static_cast<uint64_t>(seed),
                                          metapath);
    std::cout << "metapath = " << rep.metapath << "\n";
    std::cout << "delta_avg = " << fmt(rep.delta_avg) << "\n";
    std::cout << "quadruples_sampled = " << rep.quadruples_sampled << "\n";
    std::cout << "component_nodes = " << rep.component_nodes << "\n";
    std::cout << "exact = " << (rep.exact ? 1 : 0) << "\n";
    return 0;
}

int cmd_gen_synthetic(const std::string& config, const std::string& out, long seed) {
    KvConfig cfg = load_config_or_default(config);
    cfg.require_known({"synthetic.targets", "synthetic.classes", "synthetic.feature_dim",
                       "synthetic.noise", "synthetic.gammas", "synthetic.intermediates",
                       "synthetic.degree_max", "synthetic.seed"});
    SyntheticSpec spec;
    spec.target_count = static_cast<int>(cfg.get_int("synthetic.targets", 300));
    spec.num_classes = static_cast<int>(cfg.get_int("synthetic.classes", 3));
    spec.feature_dim = static_cast<int>(cfg.get_int("synthetic.feature_dim", 8));
    spec.noise = cfg.get_double("synthetic.noise", 0.2);
    std::vector<double> gammas = cfg.get_doubles("synthetic.gammas");
    if (gammas.empty()) gammas = {2.1, 3.5};
    std::vector<long> inter = cfg.get_ints("synthetic.intermediates");
    int degree_max = static_cast<int>(cfg.get_int("synthetic.degree_max", 0));
    for (size_t i = 0; i < gammas.size(); ++i) {
        SyntheticMetapathSpec ms;
        ms.gamma = gammas[i];
        ms.intermediate_count = i < inter.size() ? static_cast<int>(inter[i]) : 150;
        ms.degree_max = degree_max;
        spec.metapaths.push_back(ms);
    }
    uint64_t s = seed >= 0 ? static_cast<uint64_t>(seed)
                           : static_cast<uint64_t>(cfg.get_int("synthetic.seed", 7));
    HeteroGraph g = generate_synthetic(spec, s);
    write_dataset(g, out);

    KvConfig manifest;
    manifest.set("manifest.artifact_version", kArtifactVersion);
    manifest.set("manifest.command", "gen-synthetic");
    manifest.set_int("synthetic.seed", static_cast<long>(s));
    manifest.set_int("synthetic.targets", spec.target_count);
    manifest.set_int("synthetic.classes", spec.num_classes);
    manifest.set_int("synthetic.feature_dim", spec.feature_dim);
    manifest.set_double("synthetic.noise", spec.noise);
    std::string gs;
    for (size_t i = 0; i < gammas.size(); ++i) gs += (i ? "," : "") + fmt(gammas[i]);
    manifest.set("synthetic.gammas", gs);
    std::ofstream mf(out + "/manifest.ini", std::ios::binary);
    mf << manifest.text();
    log_info("wrote synthetic dataset to " + out);
    return 0;
}

int cmd_ablate(const std::string& data, const std::string& config, const std::string& seeds_arg,
               const std::string& out) {
    HeteroGraph g = load_dataset(data);
    KvConfig cfg = load_config_or_default(config);
    ResolvedRun run = resolve_run(cfg, g, -1);
    std::vector<uint64_t> seeds;
    {
        std::istringstream ss(seeds_arg);
        std::string item;
        while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    }
    if (seeds.size() < 3) throw ConfigError("ablate: need at least 3 comma-separated seeds");
    AblationReport rep = run_ablation(g, run.model, run.train, seeds);
    std::cout << rep.table();
    if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::ofstream f(out + "/ablation.txt", std::ios::binary);
        f << rep.table();
        KvConfig manifest = make_manifest(run, dataset_fingerprint(data));
        manifest.set("manifest.command", "ablate");
        std::ofstream mf(out + "/manifest.ini", std::ios::binary);
        mf << manifest.text();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-space hyperbolic graph attention for heterogeneous graphs"};
    app.require_subcommand(1);

    std::string data, out, config, checkpoint, task = "node-classification";
    std::string metapath, metapaths_arg, seeds_arg = "1,2,3";
    long seed = -1, budget = 5000;
    int node = 0, l = 3, cap = 64;

    auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoint + history");
    train_cmd->add_option("--data", data, "dataset directory")->required();
    train_cmd->add_option("--out", out, "output directory")->required();
    train_cmd->add_option("--config", config, "run config file (key = value with sections)");
    train_cmd->add_option("--seed", seed, "root seed (overrides config)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--data", data, "dataset directory")->required();
    eval_cmd->add_option("--task", task, "node-classification|node-clustering|link-prediction");
    eval_cmd->add_option("--seed", seed, "root seed");

    auto* embed_cmd = app.add_subcommand("embed", "write node embeddings as TSV");
    embed_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    embed_cmd->add_option("--data", data, "dataset directory")->required();
    embed_cmd->add_option("--out", out, "output TSV path")->required();
    embed_cmd->add_option("--seed", seed, "root seed");

    auto* sample_cmd = app.add_subcommand("sample", "print metapath instances for a node");
    sample_cmd->add_option("--data", data, "dataset directory")->required();
    sample_cmd->add_option("--node", node, "start node id")->required();
    sample_cmd->add_option("--metapaths", metapaths_arg, "semicolon-joined names (default: all)");
    sample_cmd->add_option("--max-length", l, "maximum instance length in nodes");
    sample_cmd->add_option("--cap", cap, "per-metapath instance cap");
    sample_cmd->add_option("--seed", seed, "root seed");

    auto* delta_cmd = app.add_subcommand("delta", "Gromov delta of a metapath-based subgraph");
    delta_cmd->add_option("--data", data, "dataset directory")->required();
    delta_cmd->add_option("--metapath", metapath, "metapath name, e.g. A,P,A")->required();
    delta_cmd->add_option("--budget", budget, "quadruple sample budget");
    delta_cmd->add_option("--seed", seed, "root seed");

    auto* gen_cmd = app.add_subcommand("gen-synthetic", "write a planted synthetic dataset");
    gen_cmd->add_option("--config", config, "generator config file");
    gen_cmd->add_option("--out", out, "output dataset directory")->required();
    gen_cmd->add_option("--seed", seed, "root seed (overrides config)");

    auto* ablate_cmd = app.add_subcommand("ablate", "compare FULL/CONCAT/EUCLID/SINGLE variants");
    ablate_cmd->add_option("--data", data, "dataset directory")->required();
    ablate_cmd->add_option("--config", config, "run config file");
    ablate_cmd->add_option("--seeds", seeds_arg, "comma-separated seeds (>= 3)");
    ablate_cmd->add_option("--out", out, "output directory for the table");

    try {
        init_log_level();
        app.parse(argc, argv);
        if (train_cmd->parsed()) return cmd_train(data, out, config, seed);
        if (eval_cmd->parsed()) return cmd_eval(checkpoint, data, task, seed);
        if (embed_cmd->parsed()) return cmd_embed(checkpoint, data, out, seed);
        if (sample_cmd->parsed()) return cmd_sample(data, node, metapaths_arg, l, cap, seed);
        if (delta_cmd->parsed()) return cmd_delta(data, metapath, budget, seed);
        if (gen_cmd->parsed()) return cmd_gen_synthetic(config, out, seed);
        if (ablate_cmd->parsed()) return cmd_ablate(data, config, seeds_arg, out);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
