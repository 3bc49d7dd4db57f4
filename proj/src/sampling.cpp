#include <algorithm>

#include "msgat/errors.hpp"
#include "msgat/graph.hpp"
#include "msgat/rng.hpp"

namespace msgat {

namespace {

// Breadth-first expansion of partial walks along the metapath's type sequence.
// Every complete, type-conforming walk starting at v is produced exactly once.
std::vector<MetapathInstance> enumerate_metapath(const HeteroGraph& g, int v, int phi) {
    const Metapath& mp = g.metapaths[static_cast<size_t>(phi)];
    std::vector<std::vector<int>> frontier{{v}};
    for (size_t step = 1; step < mp.type_seq.size(); ++step) {
        std::vector<std::vector<int>> next;
        for (const auto& path : frontier) {
            for (int nb : g.neighbors_of_type(path.back(), mp.type_seq[step])) {
                auto extended = path;
                extended.push_back(nb);
                next.push_back(std::move(extended));
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    std::vector<MetapathInstance> out;
    out.reserve(frontier.size());
    for (auto& path : frontier) out.push_back(MetapathInstance{std::move(path), phi});
    return out;
}

}  // namespace

InstanceSet sample_instances(const HeteroGraph& g, int v, const std::vector<int>& metapaths,
                             int l, int cap, uint64_t seed) {
    InstanceSet set;
    set.by_metapath.resize(metapaths.size());
    for (size_t k = 0; k < metapaths.size(); ++k) {
        int phi = metapaths[k];
        const Metapath& mp = g.metapaths[static_cast<size_t>(phi)];
        if (g.type_of[static_cast<size_t>(v)] != mp.type_seq.front())
            throw DataError("sample_instances: node " + std::to_string(v) +
                            " is not of the start type of metapath " + mp.name);
        if (static_cast<int>(mp.type_seq.size()) > l) continue;  // longer than the budget
        auto all = enumerate_metapath(g, v, phi);
        if (cap > 0 && static_cast<int>(all.size()) > cap) {
            Rng rng(split_seed(seed, 0x5a5aULL * (k + 1) + static_cast<uint64_t>(v)));
            auto keep = rng.sample_without_replacement(static_cast<int>(all.size()), cap);
            std::sort(keep.begin(), keep.end());
            std::vector<MetapathInstance> sub;
            sub.reserve(keep.size());
            for (int idx : keep) sub.push_back(std::move(all[static_cast<size_t>(idx)]));
            all = std::move(sub);
        }
        set.by_metapath[k] = std::move(all);
    }
    return set;
}

HomogeneousGraph metapath_subgraph(const HeteroGraph& g, int phi) {
    const Metapath& mp = g.metapaths[static_cast<size_t>(phi)];
    int start_t = mp.type_seq.front();
    int end_t = mp.type_seq.back();

    HomogeneousGraph h;
    std::vector<int> local(static_cast<size_t>(g.num_nodes()), -1);
    auto add_nodes = [&](int t) {
        for (int v : g.nodes_of_type[static_cast<size_t>(t)])
            if (local[static_cast<size_t>(v)] < 0) {
                local[static_cast<size_t>(v)] = static_cast<int>(h.node_ids.size());
                h.node_ids.push_back(v);
            }
    };
    add_nodes(start_t);
    if (end_t != start_t) add_nodes(end_t);
    h.adj.resize(h.node_ids.size());

    // endpoint reachability: level sets along the type sequence
    for (int u : g.nodes_of_type[static_cast<size_t>(start_t)]) {
        std::vector<int> level{u};
        for (size_t step = 1; step < mp.type_seq.size(); ++step) {
            std::vector<int> next;
            for (int x : level)
                for (int nb : g.neighbors_of_type(x, mp.type_seq[step])) next.push_back(nb);
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            level = std::move(next);
            if (level.empty()) break;
        }
        int lu = local[static_cast<size_t>(u)];
        for (int w : level) {
            if (w == u) continue;
            int lw = local[static_cast<size_t>(w)];
            h.adj[static_cast<size_t>(lu)].push_back(lw);
            h.adj[static_cast<size_t>(lw)].push_back(lu);
        }
    }
    for (auto& ns : h.adj) {
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    }
    return h;
}

}  // namespace msgat
