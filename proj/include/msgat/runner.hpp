#pragma once

#include <cstdint>
#include <string>

#include "msgat/config.hpp"
#include "msgat/graph.hpp"
#include "msgat/train.hpp"

namespace msgat {

// A run configuration with every default materialized.
struct ResolvedRun {
    ModelConfig model;
    TrainConfig train;
    int threads = 1;

    KvConfig to_kv() const;
};

// Fills defaults from `cfg` ([run]/[model]/[train] sections) and the dataset;
// rejects unknown keys. `seed_override` < 0 keeps the config's seed.
ResolvedRun resolve_run(const KvConfig& cfg, const HeteroGraph& g, long seed_override);

// Manifest written next to every output; feeding it back as --config reproduces
// the run bit-for-bit in single-threaded mode.
KvConfig make_manifest(const ResolvedRun& run, uint64_t fingerprint);

struct TrainOutputs {
    std::string checkpoint_path;
    std::string history_path;
    std::string results_path;
    std::string manifest_path;
    TrainResult result;
    std::string results_text;  // final key=value block
};

// train + evaluate + write checkpoint/history/results/manifest under out_dir
TrainOutputs run_train_job(const std::string& dataset_dir, const std::string& out_dir,
                           const KvConfig& cfg, long seed_override);

// evaluation of a stored checkpoint on a dataset; returns the key=value block
std::string run_eval_job(const std::string& checkpoint_path, const std::string& dataset_dir,
                         const std::string& task, uint64_t seed);

}  // namespace msgat
