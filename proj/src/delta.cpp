#include <algorithm>
#include <queue>

#include "msgat/errors.hpp"
#include "msgat/graph.hpp"
#include "msgat/rng.hpp"

namespace msgat {

namespace {

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int src) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<int> q;
    dist[static_cast<size_t>(src)] = 0;
    q.push(src);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[static_cast<size_t>(u)])
            if (dist[static_cast<size_t>(v)] < 0) {
                dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
                q.push(v);
            }
    }
    return dist;
}

std::vector<int> largest_component(const std::vector<std::vector<int>>& adj) {
    std::vector<int> comp(adj.size(), -1);
    int n_comp = 0;
    for (size_t s = 0; s < adj.size(); ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(static_cast<int>(s));
        comp[s] = n_comp;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[static_cast<size_t>(u)])
                if (comp[static_cast<size_t>(v)] < 0) {
                    comp[static_cast<size_t>(v)] = n_comp;
                    q.push(v);
                }
        }
        ++n_comp;
    }
    std::vector<int> count(static_cast<size_t>(n_comp), 0);
    for (int c : comp) ++count[static_cast<size_t>(c)];
    int best = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
    std::vector<int> members;
    for (size_t v = 0; v < adj.size(); ++v)
        if (comp[v] == best) members.push_back(static_cast<int>(v));
    return members;
}

// four-point condition on one quadruple, given pairwise distances
double four_point_delta(double d01, double d23, double d02, double d13, double d03, double d12) {
    double s1 = d01 + d23;
    double s2 = d02 + d13;
    double s3 = d03 + d12;
    if (s1 < s2) std::swap(s1, s2);
    if (s2 < s3) std::swap(s2, s3);
    if (s1 < s2) std::swap(s1, s2);
    return (s1 - s2) / 2.0;
}

}  // namespace

DeltaReport delta_hyperbolicity(const HomogeneousGraph& h, long quadruple_budget, uint64_t seed,
                                const std::string& metapath_name) {
    if (h.node_ids.size() < 4)
        throw DataError("delta_hyperbolicity: fewer than 4 nodes");
    std::vector<int> comp = largest_component(h.adj);
    int n = static_cast<int>(comp.size());
    if (n < 4) throw DataError("delta_hyperbolicity: largest component has fewer than 4 nodes");

    // all-pairs BFS inside the component
    std::vector<int> local(h.adj.size(), -1);
    for (int i = 0; i < n; ++i) local[static_cast<size_t>(comp[static_cast<size_t>(i)])] = i;
    std::vector<std::vector<int>> dist(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto full = bfs_distances(h.adj, comp[static_cast<size_t>(i)]);
        std::vector<int> row(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
            row[static_cast<size_t>(j)] = full[static_cast<size_t>(comp[static_cast<size_t>(j)])];
        dist[static_cast<size_t>(i)] = std::move(row);
    }
    auto d = [&](int a, int b) {
        return static_cast<double>(dist[static_cast<size_t>(a)][static_cast<size_t>(b)]);
    };

    DeltaReport rep;
    rep.metapath = metapath_name;
    rep.component_nodes = n;
    double sum = 0.0;
    long count = 0;
    if (n <= 30) {
        rep.exact = true;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int c = b + 1; c < n; ++c)
                    for (int e = c + 1; e < n; ++e) {
                        sum += four_point_delta(d(a, b), d(c, e), d(a, c), d(b, e), d(a, e),
                                                d(b, c));
                        ++count;
                    }
    } else {
        Rng rng(split_seed(seed, 0xde17aULL));
        for (long it = 0; it < quadruple_budget; ++it) {
            auto q = rng.sample_without_replacement(n, 4);
            sum += four_point_delta(d(q[0], q[1]), d(q[2], q[3]), d(q[0], q[2]), d(q[1], q[3]),
                                    d(q[0], q[3]), d(q[1], q[2]));
            ++count;
        }
    }
    rep.quadruples_sampled = count;
    rep.delta_avg = count > 0 ? sum / static_cast<double>(count) : 0.0;
    return rep;
}

}  // namespace msgat
