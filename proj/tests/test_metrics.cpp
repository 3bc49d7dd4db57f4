#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msgat/metrics.hpp"
#include "msgat/rng.hpp"
#include "oracles.hpp"

using namespace msgat;

TEST_CASE("perfect predictions give F1 = 1") {
    std::vector<int> y{0, 1, 2, 1, 0, 2};
    auto f1 = metrics::f1_scores(y, y, 3);
    CHECK(f1.macro == doctest::Approx(1.0));
    CHECK(f1.micro == doctest::Approx(1.0));
}

TEST_CASE("F1 matches confusion-count oracle on small fixtures") {
    Rng rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        int n = 5 + rng.index(15);
        int C = 2 + rng.index(3);
        std::vector<int> pred, truth;
        for (int i = 0; i < n; ++i) {
            pred.push_back(rng.index(C));
            truth.push_back(rng.index(C));
        }
        auto f1 = metrics::f1_scores(pred, truth, C);
        CHECK(f1.macro == doctest::Approx(oracle::macro_f1_oracle(pred, truth, C)).epsilon(1e-12));
        CHECK(f1.micro == doctest::Approx(oracle::micro_f1_oracle(pred, truth, C)).epsilon(1e-12));
    }
}

TEST_CASE("clustering identical to labels up to relabeling scores 1") {
    std::vector<int> labels{0, 0, 1, 1, 2, 2};
    std::vector<int> clusters{2, 2, 0, 0, 1, 1};  // a permutation of the labels
    CHECK(metrics::nmi(clusters, labels) == doctest::Approx(1.0));
    CHECK(metrics::ari(clusters, labels) == doctest::Approx(1.0));
}

TEST_CASE("NMI and ARI match contingency-table oracles") {
    Rng rng(33);
    for (int rep = 0; rep < 50; ++rep) {
        int n = 6 + rng.index(14);
        std::vector<int> a, b;
        for (int i = 0; i < n; ++i) {
            a.push_back(rng.index(3));
            b.push_back(rng.index(4));
        }
        CHECK(metrics::nmi(a, b) == doctest::Approx(oracle::nmi_oracle(a, b)).epsilon(1e-12));
        CHECK(metrics::ari(a, b) == doctest::Approx(oracle::ari_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("AUC: perfectly ordered scores give 1") {
    std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
    std::vector<int> labels{1, 1, 0, 0};
    CHECK(metrics::roc_auc(scores, labels) == doctest::Approx(1.0));
}

TEST_CASE("AUC of random scores on balanced labels is near one half") {
    Rng rng(44);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 10000; ++i) {
        scores.push_back(rng.real());
        labels.push_back(i % 2);
    }
    CHECK(std::abs(metrics::roc_auc(scores, labels) - 0.5) < 0.05);
}

TEST_CASE("AUC matches the pairwise-comparison oracle, ties included") {
    Rng rng(55);
    for (int rep = 0; rep < 50; ++rep) {
        int n = 8 + rng.index(12);
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            // coarse grid forces ties
            scores.push_back(rng.index(5) / 4.0);
            labels.push_back(rng.index(2));
        }
        bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
        bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
        if (!has_pos || !has_neg) continue;
        CHECK(metrics::roc_auc(scores, labels) ==
              doctest::Approx(oracle::auc_oracle(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("AUC rejects single-sided labels") {
    CHECK_THROWS(metrics::roc_auc({0.1, 0.2}, {1, 1}));
    CHECK_THROWS(metrics::roc_auc({0.1, 0.2}, {0, 0}));
}

TEST_CASE("binary F1 at a threshold") {
    std::vector<double> scores{0.9, 0.4, 0.8, 0.3};
    std::vector<int> labels{1, 1, 0, 0};
    // at 0.5: tp=1 fp=1 fn=1
    CHECK(metrics::binary_f1_at(scores, labels, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("k-means recovers well-separated blobs") {
    Rng rng(66);
    int per = 20;
    ad::Tensor pts(3 * per, 2);
    std::vector<int> truth;
    double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < per; ++i) {
            int row = c * per + i;
            pts.at(row, 0) = centers[c][0] + 0.3 * rng.gaussian();
            pts.at(row, 1) = centers[c][1] + 0.3 * rng.gaussian();
            truth.push_back(c);
        }
    auto assign = metrics::kmeans(pts, 3, 20, 100, 7);
    CHECK(metrics::nmi(assign, truth) == doctest::Approx(1.0));
    CHECK(metrics::ari(assign, truth) == doctest::Approx(1.0));
    // determinism
    auto assign2 = metrics::kmeans(pts, 3, 20, 100, 7);
    CHECK(assign == assign2);
}

TEST_CASE("linear probe separates a linearly separable set") {
    Rng rng(77);
    ad::Tensor x(40, 2);
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        int cls = i % 2;
        x.at(i, 0) = (cls ? 2.0 : -2.0) + 0.2 * rng.gaussian();
        x.at(i, 1) = rng.gaussian();
        y.push_back(cls);
    }
    auto pred = metrics::linear_probe_predict(x, y, x, 2);
    CHECK(pred == y);
}
