#pragma once

#include <cstdint>
#include <vector>

#include "msgat/tensor.hpp"

namespace msgat::metrics {

// Macro-F1: unweighted mean of per-class F1 (0/0 counted as 0).
// Micro-F1: F1 of the pooled confusion counts.
struct F1Scores {
    double macro = 0.0;
    double micro = 0.0;
};
F1Scores f1_scores(const std::vector<int>& predicted, const std::vector<int>& actual,
                   int num_classes);

// Normalized mutual information, arithmetic-mean normalization.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Adjusted Rand index.
double ari(const std::vector<int>& a, const std::vector<int>& b);

// Rank-statistic ROC-AUC with midrank tie handling.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// F1 of the positive class at a fixed threshold.
double binary_f1_at(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold);

// Lloyd's k-means with `restarts` seeded random initializations; the labeling
// with the best inertia wins. Rows of `points` are observations.
std::vector<int> kmeans(const ad::Tensor& points, int k, int restarts, int max_iters,
                        uint64_t seed);

// L2-regularized multinomial logistic probe on frozen embeddings. Deterministic
// (zero init + full-batch Adam). Returns predicted classes for `eval_rows`.
struct ProbeConfig {
    int iters = 300;
    double lr = 0.1;
    double l2 = 1e-3;
};
std::vector<int> linear_probe_predict(const ad::Tensor& train_x, const std::vector<int>& train_y,
                                      const ad::Tensor& eval_x, int num_classes,
                                      const ProbeConfig& cfg = {});

}  // namespace msgat::metrics
