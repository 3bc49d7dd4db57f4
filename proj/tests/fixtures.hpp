// Shared in-memory fixtures for the model/train/acceptance suites.
#pragma once

#include <string>
#include <vector>

#include "msgat/graph.hpp"
#include "msgat/rng.hpp"

namespace fixtures {

// 10 nodes, 2 metapaths (T-M1-T and T-M2-T), 4-dim features, 3 classes.
// Small enough for finite-difference checks over every parameter.
inline msgat::HeteroGraph two_metapath_fixture() {
    using namespace msgat;
    HeteroGraph g;
    g.type_names = {"T", "M1", "M2"};
    // nodes 0-5: targets, 6-7: M1, 8-9: M2
    g.type_of = {0, 0, 0, 0, 0, 0, 1, 1, 2, 2};
    int n = 10;
    g.nodes_of_type.assign(3, {});
    g.index_in_type.assign(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        g.nodes_of_type[static_cast<size_t>(g.type_of[static_cast<size_t>(v)])].push_back(v);
    for (auto& members : g.nodes_of_type)
        for (size_t i = 0; i < members.size(); ++i)
            g.index_in_type[static_cast<size_t>(members[i])] = static_cast<int>(i);
    g.relations = {RelationDef{"T-M1", 0, 1}, RelationDef{"T-M2", 0, 2}};
    g.neighbors.assign(2, std::vector<std::vector<int>>(static_cast<size_t>(n)));
    auto link = [&](int rel, int a, int b) {
        g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(a)].push_back(b);
        g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(b)].push_back(a);
    };
    // M1 hubs: 6 covers {0,1,2}, 7 covers {3,4}
    link(0, 0, 6);
    link(0, 1, 6);
    link(0, 2, 6);
    link(0, 3, 7);
    link(0, 4, 7);
    // M2: 8 covers {0,3,5}, 9 covers {1,5}
    link(1, 0, 8);
    link(1, 3, 8);
    link(1, 5, 8);
    link(1, 1, 9);
    link(1, 5, 9);
    g.feature_dim = 4;
    Rng rng(2024);
    for (int t = 0; t < 3; ++t) {
        ad::Tensor f(static_cast<int>(g.nodes_of_type[static_cast<size_t>(t)].size()), 4);
        for (auto& x : f.v) x = rng.uniform(-0.8, 0.8);
        g.features.push_back(std::move(f));
    }
    g.label_of = {0, 1, 2, 0, 1, 2, -1, -1, -1, -1};
    g.num_classes = 3;
    g.target_type = 0;
    g.metapaths = {Metapath{"T,M1,T", {0, 1, 0}}, Metapath{"T,M2,T", {0, 2, 0}}};
    g.validate();
    return g;
}

// bipartite user/item fixture with a target relation, for the link task
inline msgat::HeteroGraph link_fixture() {
    using namespace msgat;
    HeteroGraph g;
    g.type_names = {"U", "I"};
    int nu = 6, ni = 6, n = nu + ni;
    g.type_of.assign(static_cast<size_t>(n), 0);
    for (int v = nu; v < n; ++v) g.type_of[static_cast<size_t>(v)] = 1;
    g.nodes_of_type.assign(2, {});
    g.index_in_type.assign(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        g.nodes_of_type[static_cast<size_t>(g.type_of[static_cast<size_t>(v)])].push_back(v);
    for (auto& members : g.nodes_of_type)
        for (size_t i = 0; i < members.size(); ++i)
            g.index_in_type[static_cast<size_t>(members[i])] = static_cast<int>(i);
    g.relations = {RelationDef{"U-I", 0, 1}};
    g.target_relation = 0;
    g.neighbors.assign(1, std::vector<std::vector<int>>(static_cast<size_t>(n)));
    Rng rng(99);
    for (int u = 0; u < nu; ++u)
        for (int i = nu; i < n; ++i)
            if (rng.real() < 0.4) {
                g.neighbors[0][static_cast<size_t>(u)].push_back(i);
                g.neighbors[0][static_cast<size_t>(i)].push_back(u);
            }
    g.feature_dim = 4;
    for (int t = 0; t < 2; ++t) {
        ad::Tensor f(static_cast<int>(g.nodes_of_type[static_cast<size_t>(t)].size()), 4);
        for (auto& x : f.v) x = rng.uniform(-0.5, 0.5);
        g.features.push_back(std::move(f));
    }
    g.label_of.assign(static_cast<size_t>(n), -1);
    g.target_type = 0;
    g.metapaths = {Metapath{"U,I,U", {0, 1, 0}}, Metapath{"I,U,I", {1, 0, 1}}};
    g.validate();
    return g;
}

}  // namespace fixtures
