#include <algorithm>
#include <cmath>
#include <set>

#include "msgat/errors.hpp"
#include "msgat/graph.hpp"
#include "msgat/rng.hpp"

namespace msgat {

namespace {

// inverse-CDF sampler for P(k) proportional to k^(-gamma) on [kmin, kmax]
struct PowerLawSampler {
    std::vector<double> cdf;
    int kmin;

    PowerLawSampler(double gamma, int kmin_, int kmax) : kmin(kmin_) {
        double z = 0.0;
        for (int k = kmin_; k <= kmax; ++k) z += std::pow(static_cast<double>(k), -gamma);
        double acc = 0.0;
        for (int k = kmin_; k <= kmax; ++k) {
            acc += std::pow(static_cast<double>(k), -gamma) / z;
            cdf.push_back(acc);
        }
        cdf.back() = 1.0;
    }

    int sample(Rng& rng) const {
        double u = rng.real();
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return kmin + static_cast<int>(it - cdf.begin());
    }
};

}  // namespace

HeteroGraph generate_synthetic(const SyntheticSpec& spec, uint64_t seed) {
    if (spec.metapaths.size() < 2)
        throw ConfigError("generate_synthetic: at least 2 metapaths required");
    for (size_t i = 0; i < spec.metapaths.size(); ++i)
        for (size_t j = i + 1; j < spec.metapaths.size(); ++j)
            if (spec.metapaths[i].gamma == spec.metapaths[j].gamma)
                throw ConfigError("generate_synthetic: metapath exponents must be distinct");
    if (spec.target_count < spec.num_classes || spec.num_classes < 2 || spec.feature_dim < 1)
        throw ConfigError("generate_synthetic: degenerate size parameters");

    Rng rng(split_seed(seed, 0x5f3759dfULL));
    HeteroGraph g;

    const int nt = spec.target_count;
    const int C = spec.num_classes;
    const int dim = spec.feature_dim;

    g.type_names.push_back("T");
    int total = nt;
    std::vector<int> inter_base;
    for (size_t m = 0; m < spec.metapaths.size(); ++m) {
        g.type_names.push_back("M" + std::to_string(m + 1));
        inter_base.push_back(total);
        total += spec.metapaths[m].intermediate_count;
    }
    g.type_of.assign(static_cast<size_t>(total), 0);
    for (size_t m = 0; m < spec.metapaths.size(); ++m)
        for (int i = 0; i < spec.metapaths[m].intermediate_count; ++i)
            g.type_of[static_cast<size_t>(inter_base[m] + i)] = static_cast<int>(m) + 1;

    g.nodes_of_type.assign(g.type_names.size(), {});
    g.index_in_type.assign(static_cast<size_t>(total), -1);
    for (int v = 0; v < total; ++v)
        g.nodes_of_type[static_cast<size_t>(g.type_of[static_cast<size_t>(v)])].push_back(v);
    for (auto& members : g.nodes_of_type)
        for (size_t i = 0; i < members.size(); ++i)
            g.index_in_type[static_cast<size_t>(members[i])] = static_cast<int>(i);

    g.target_type = 0;
    for (size_t m = 0; m < spec.metapaths.size(); ++m) {
        std::string mt = g.type_names[m + 1];
        g.relations.push_back(RelationDef{"T-" + mt, 0, static_cast<int>(m) + 1});
        g.metapaths.push_back(
            Metapath{"T," + mt + ",T", {0, static_cast<int>(m) + 1, 0}});
    }
    g.neighbors.assign(g.relations.size(),
                       std::vector<std::vector<int>>(static_cast<size_t>(total)));

    // balanced labels, shuffled
    std::vector<int> labels(static_cast<size_t>(nt));
    for (int i = 0; i < nt; ++i) labels[static_cast<size_t>(i)] = i % C;
    rng.shuffle(labels);
    g.label_of.assign(static_cast<size_t>(total), -1);
    for (int i = 0; i < nt; ++i) g.label_of[static_cast<size_t>(i)] = labels[static_cast<size_t>(i)];
    g.num_classes = C;
    std::vector<std::vector<int>> by_class(static_cast<size_t>(C));
    for (int i = 0; i < nt; ++i) by_class[static_cast<size_t>(labels[static_cast<size_t>(i)])].push_back(i);

    // wiring: each intermediate node picks a home class and a power-law degree,
    // then attaches to that many distinct targets, mostly within its home class
    const int retry_bound = 100;
    std::vector<int> home_of(static_cast<size_t>(total), -1);
    for (size_t m = 0; m < spec.metapaths.size(); ++m) {
        const auto& ms = spec.metapaths[m];
        int kmax = ms.degree_max > 0 ? ms.degree_max : std::max(4, nt / 5);
        kmax = std::min(kmax, nt);
        PowerLawSampler deg(ms.gamma, std::max(1, ms.degree_min), kmax);
        double impurity = ms.attach_noise < 0 ? spec.noise : ms.attach_noise;
        // log-spaced degree tier boundaries, one tier per class
        std::vector<double> tier_edge;
        for (int c = 1; c < C; ++c)
            tier_edge.push_back(std::pow(static_cast<double>(kmax),
                                         static_cast<double>(C - c) / C));
        for (int i = 0; i < ms.intermediate_count; ++i) {
            int node = inter_base[m] + i;
            int home = rng.index(C);
            std::set<int> chosen;
            bool placed = false;
            for (int attempt = 0; attempt < retry_bound && !placed; ++attempt) {
                int k = deg.sample(rng);
                if (spec.degree_class_tiers && rng.real() >= impurity) {
                    home = 0;
                    while (home < C - 1 && k < tier_edge[static_cast<size_t>(home)]) ++home;
                }
                chosen.clear();
                int tries = 0;
                const int try_bound = 50 * k + 100;
                while (static_cast<int>(chosen.size()) < k && tries < try_bound) {
                    ++tries;
                    int tgt;
                    if (rng.real() >= impurity) {
                        const auto& pool = by_class[static_cast<size_t>(home)];
                        tgt = pool[static_cast<size_t>(rng.index(static_cast<int>(pool.size())))];
                    } else {
                        tgt = rng.index(nt);
                    }
                    chosen.insert(tgt);
                }
                placed = static_cast<int>(chosen.size()) == k;
            }
            if (!placed)
                throw DataError("generate_synthetic: infeasible degree sequence for metapath " +
                                g.metapaths[m].name);
            home_of[static_cast<size_t>(node)] = home;
            for (int tgt : chosen) {
                g.neighbors[m][static_cast<size_t>(tgt)].push_back(node);
                g.neighbors[m][static_cast<size_t>(node)].push_back(tgt);
            }
        }
        // coverage sweep: a target left without any intermediate would carry no
        // planted signal for this metapath, so attach it to one of its class
        for (int tgt = 0; tgt < nt; ++tgt) {
            if (!g.neighbors[m][static_cast<size_t>(tgt)].empty()) continue;
            int cls = labels[static_cast<size_t>(tgt)];
            std::vector<int> pool;
            for (int i = 0; i < ms.intermediate_count; ++i)
                if (home_of[static_cast<size_t>(inter_base[m] + i)] == cls)
                    pool.push_back(inter_base[m] + i);
            int node = pool.empty() ? inter_base[m] + rng.index(ms.intermediate_count)
                                    : pool[static_cast<size_t>(rng.index(static_cast<int>(pool.size())))];
            g.neighbors[m][static_cast<size_t>(tgt)].push_back(node);
            g.neighbors[m][static_cast<size_t>(node)].push_back(tgt);
        }
    }
    for (auto& rel_adj : g.neighbors)
        for (auto& ns : rel_adj) std::sort(ns.begin(), ns.end());

    // features: class prototypes for targets, damped home-class prototypes for
    // intermediates, plus Gaussian jitter
    double fnoise = spec.feature_noise < 0 ? spec.noise : spec.feature_noise;
    g.feature_dim = dim;
    auto prototype = [&](int cls, int j) { return (j % C) == cls ? 1.0 : 0.0; };
    for (size_t t = 0; t < g.type_names.size(); ++t) {
        const auto& members = g.nodes_of_type[t];
        ad::Tensor f(static_cast<int>(members.size()), dim);
        for (size_t i = 0; i < members.size(); ++i) {
            int v = members[i];
            int cls;
            double scale;
            if (t == 0) {
                cls = g.label_of[static_cast<size_t>(v)];
                scale = spec.feature_signal;
            } else {
                // intermediates lean toward the majority class of their targets
                std::vector<int> votes(static_cast<size_t>(C), 0);
                for (int nb : g.neighbors[t - 1][static_cast<size_t>(v)])
                    ++votes[static_cast<size_t>(g.label_of[static_cast<size_t>(nb)])];
                cls = static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                                       votes.begin());
                scale = 0.5 * spec.feature_signal;
            }
            double spike_rate =
                t == 0 ? 0.0 : spec.metapaths[t - 1].feature_spike_rate;
            for (int j = 0; j < dim; ++j) {
                double x = scale * prototype(cls, j) + fnoise * 0.5 * rng.gaussian();
                if (spike_rate > 0.0 && rng.real() < spike_rate)
                    x += spec.spike_scale * rng.gaussian();
                f.at(static_cast<int>(i), j) = x;
            }
        }
        g.features.push_back(std::move(f));
    }

    g.validate();
    return g;
}

}  // namespace msgat
