#include "msgat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "msgat/rng.hpp"

namespace msgat::metrics {

F1Scores f1_scores(const std::vector<int>& predicted, const std::vector<int>& actual,
                   int num_classes) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("f1_scores: size mismatch");
    std::vector<long> tp(static_cast<size_t>(num_classes), 0),
        fp(static_cast<size_t>(num_classes), 0), fn(static_cast<size_t>(num_classes), 0);
    for (size_t i = 0; i < predicted.size(); ++i) {
        int p = predicted[i], a = actual[i];
        if (p < 0 || p >= num_classes || a < 0 || a >= num_classes)
            throw std::invalid_argument("f1_scores: class index out of range");
        if (p == a) {
            ++tp[static_cast<size_t>(p)];
        } else {
            ++fp[static_cast<size_t>(p)];
            ++fn[static_cast<size_t>(a)];
        }
    }
    F1Scores out;
    long tp_all = 0, fp_all = 0, fn_all = 0;
    for (int c = 0; c < num_classes; ++c) {
        auto ci = static_cast<size_t>(c);
        double denom = 2.0 * tp[ci] + fp[ci] + fn[ci];
        out.macro += denom > 0 ? 2.0 * tp[ci] / denom : 0.0;
        tp_all += tp[ci];
        fp_all += fp[ci];
        fn_all += fn[ci];
    }
    out.macro /= num_classes;
    double denom = 2.0 * tp_all + fp_all + fn_all;
    out.micro = denom > 0 ? 2.0 * tp_all / denom : 0.0;
    return out;
}

namespace {

// contingency table and marginals of two labelings
struct Contingency {
    std::map<std::pair<int, int>, long> cells;
    std::map<int, long> row, col;
    long n = 0;
};

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("contingency: size mismatch");
    Contingency t;
    for (size_t i = 0; i < a.size(); ++i) {
        ++t.cells[{a[i], b[i]}];
        ++t.row[a[i]];
        ++t.col[b[i]];
        ++t.n;
    }
    return t;
}

double entropy(const std::map<int, long>& marg, long n) {
    double h = 0.0;
    for (auto& [_, cnt] : marg) {
        double p = static_cast<double>(cnt) / static_cast<double>(n);
        if (p > 0) h -= p * std::log(p);
    }
    return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    Contingency t = contingency(a, b);
    double n = static_cast<double>(t.n);
    double mi = 0.0;
    for (auto& [cell, cnt] : t.cells) {
        double pij = cnt / n;
        double pi = t.row.at(cell.first) / n;
        double pj = t.col.at(cell.second) / n;
        if (pij > 0) mi += pij * std::log(pij / (pi * pj));
    }
    double ha = entropy(t.row, t.n);
    double hb = entropy(t.col, t.n);
    double denom = (ha + hb) / 2.0;
    if (denom <= 0.0) return 1.0;  // both labelings constant
    return mi / denom;
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
    Contingency t = contingency(a, b);
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (auto& [_, cnt] : t.cells) sum_cells += choose2(static_cast<double>(cnt));
    for (auto& [_, cnt] : t.row) sum_rows += choose2(static_cast<double>(cnt));
    for (auto& [_, cnt] : t.col) sum_cols += choose2(static_cast<double>(cnt));
    double total = choose2(static_cast<double>(t.n));
    double expected = sum_rows * sum_cols / total;
    double max_index = (sum_rows + sum_cols) / 2.0;
    if (max_index == expected) return 1.0;  // degenerate: single cluster both sides
    return (sum_cells - expected) / (max_index - expected);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
    long npos = std::count(labels.begin(), labels.end(), 1);
    long nneg = static_cast<long>(labels.size()) - npos;
    if (npos == 0 || nneg == 0)
        throw std::invalid_argument("roc_auc: needs both positive and negative labels");
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return scores[i] < scores[j]; });
    // midranks over ties
    std::vector<double> rank(scores.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_sum = 0.0;
    for (size_t k = 0; k < labels.size(); ++k)
        if (labels[k] == 1) rank_sum += rank[k];
    double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double binary_f1_at(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t k = 0; k < scores.size(); ++k) {
        bool pred = scores[k] >= threshold;
        if (pred && labels[k] == 1)
            ++tp;
        else if (pred && labels[k] == 0)
            ++fp;
        else if (!pred && labels[k] == 1)
            ++fn;
    }
    double denom = 2.0 * tp + fp + fn;
    return denom > 0 ? 2.0 * tp / denom : 0.0;
}

std::vector<int> kmeans(const ad::Tensor& points, int k, int restarts, int max_iters,
                        uint64_t seed) {
    int n = points.rows, dim = points.cols;
    if (k < 1 || n < k) throw std::invalid_argument("kmeans: need at least k points");
    std::vector<int> best_assign(static_cast<size_t>(n), 0);
    double best_inertia = -1.0;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(split_seed(seed, 0x6b6dULL + static_cast<uint64_t>(r)));
        auto centers_idx = rng.sample_without_replacement(n, k);
        std::vector<std::vector<double>> centers(static_cast<size_t>(k),
                                                 std::vector<double>(static_cast<size_t>(dim)));
        for (int c = 0; c < k; ++c)
            for (int j = 0; j < dim; ++j)
                centers[static_cast<size_t>(c)][static_cast<size_t>(j)] =
                    points.at(centers_idx[static_cast<size_t>(c)], j);
        std::vector<int> assign(static_cast<size_t>(n), -1);
        for (int iter = 0; iter < max_iters; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double best = -1.0;
                for (int c = 0; c < k; ++c) {
                    double d2 = 0.0;
                    for (int j = 0; j < dim; ++j) {
                        double diff =
                            points.at(i, j) - centers[static_cast<size_t>(c)][static_cast<size_t>(j)];
                        d2 += diff * diff;
                    }
                    if (best < 0 || d2 < best) {
                        best = d2;
                        arg = c;
                    }
                }
                if (assign[static_cast<size_t>(i)] != arg) {
                    assign[static_cast<size_t>(i)] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            std::vector<int> count(static_cast<size_t>(k), 0);
            for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
            for (int i = 0; i < n; ++i) {
                auto c = static_cast<size_t>(assign[static_cast<size_t>(i)]);
                ++count[c];
                for (int j = 0; j < dim; ++j) centers[c][static_cast<size_t>(j)] += points.at(i, j);
            }
            for (int c = 0; c < k; ++c) {
                if (count[static_cast<size_t>(c)] == 0) continue;  // empty cluster keeps its spot
                for (int j = 0; j < dim; ++j)
                    centers[static_cast<size_t>(c)][static_cast<size_t>(j)] /=
                        count[static_cast<size_t>(c)];
            }
        }
        double inertia = 0.0;
        for (int i = 0; i < n; ++i) {
            auto c = static_cast<size_t>(assign[static_cast<size_t>(i)]);
            for (int j = 0; j < dim; ++j) {
                double diff = points.at(i, j) - centers[c][static_cast<size_t>(j)];
                inertia += diff * diff;
            }
        }
        if (best_inertia < 0 || inertia < best_inertia) {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    return best_assign;
}

std::vector<int> linear_probe_predict(const ad::Tensor& train_x, const std::vector<int>& train_y,
                                      const ad::Tensor& eval_x, int num_classes,
                                      const ProbeConfig& cfg) {
    int n = train_x.rows, dim = train_x.cols, C = num_classes;
    if (n != static_cast<int>(train_y.size()))
        throw std::invalid_argument("linear_probe: label count mismatch");
    // W: C x (dim+1) with bias column; zero init keeps the fit deterministic.
    ad::Tensor w(C, dim + 1), m(C, dim + 1), v(C, dim + 1);
    std::vector<double> logits(static_cast<size_t>(C));
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int it = 1; it <= cfg.iters; ++it) {
        ad::Tensor grad(C, dim + 1);
        for (int i = 0; i < n; ++i) {
            double mx = -1e300;
            for (int c = 0; c < C; ++c) {
                double s = w.at(c, dim);
                for (int j = 0; j < dim; ++j) s += w.at(c, j) * train_x.at(i, j);
                logits[static_cast<size_t>(c)] = s;
                mx = std::max(mx, s);
            }
            double z = 0.0;
            for (int c = 0; c < C; ++c) {
                logits[static_cast<size_t>(c)] = std::exp(logits[static_cast<size_t>(c)] - mx);
                z += logits[static_cast<size_t>(c)];
            }
            for (int c = 0; c < C; ++c) {
                double p = logits[static_cast<size_t>(c)] / z;
                double err = p - (train_y[static_cast<size_t>(i)] == c ? 1.0 : 0.0);
                for (int j = 0; j < dim; ++j) grad.at(c, j) += err * train_x.at(i, j);
                grad.at(c, dim) += err;
            }
        }
        for (int idx = 0; idx < grad.size(); ++idx) {
            double gg = grad[idx] / n + cfg.l2 * w[idx];
            m[idx] = b1 * m[idx] + (1 - b1) * gg;
            v[idx] = b2 * v[idx] + (1 - b2) * gg * gg;
            double mh = m[idx] / (1 - std::pow(b1, it));
            double vh = v[idx] / (1 - std::pow(b2, it));
            w[idx] -= cfg.lr * mh / (std::sqrt(vh) + eps);
        }
    }
    std::vector<int> pred(static_cast<size_t>(eval_x.rows));
    for (int i = 0; i < eval_x.rows; ++i) {
        int arg = 0;
        double best = -1e300;
        for (int c = 0; c < C; ++c) {
            double s = w.at(c, dim);
            for (int j = 0; j < dim; ++j) s += w.at(c, j) * eval_x.at(i, j);
            if (s > best) {
                best = s;
                arg = c;
            }
        }
        pred[static_cast<size_t>(i)] = arg;
    }
    return pred;
}

}  // namespace msgat::metrics
