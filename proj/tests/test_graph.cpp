#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "msgat/errors.hpp"
#include "msgat/graph.hpp"
#include "msgat/metrics.hpp"
#include "msgat/rng.hpp"
#include "oracles.hpp"

using namespace msgat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("msgat_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

// tiny Author/Paper/Conference fixture shaped like a bibliographic graph
void write_dblp_fixture(const fs::path& dir) {
    write_file(dir / "schema.toml",
               "target_type = \"A\"\n"
               "relation = \"A-P : A , P\"\n"
               "relation = \"P-C : P , C\"\n"
               "metapath = \"A,P,A\"\n"
               "metapath = \"A,P,C,P,A\"\n");
    write_file(dir / "nodes.tsv",
               "0\tA\n1\tA\n2\tA\n"
               "3\tP\n4\tP\n5\tP\n"
               "6\tC\n");
    write_file(dir / "edges.tsv",
               "0\t3\tA-P\n"
               "1\t3\tA-P\n"
               "1\t4\tA-P\n"
               "2\t4\tA-P\n"
               "2\t5\tA-P\n"
               "3\t6\tP-C\n"
               "4\t6\tP-C\n"
               "5\t6\tP-C\n");
    write_file(dir / "features_A.tsv", "0\t1\t0\n1\t0\t1\n2\t1\t1\n");
    write_file(dir / "features_P.tsv", "3\t0.5\t0\n4\t0\t0.5\n5\t0.5\t0.5\n");
    write_file(dir / "features_C.tsv", "6\t0.1\t0.1\n");
    write_file(dir / "labels.tsv", "0\t0\n1\t1\n2\t0\n");
}

// random small heterograph with 2 types and one relation; used for oracle checks
HeteroGraph random_bipartite(Rng& rng, int na, int nb, double p) {
    HeteroGraph g;
    g.type_names = {"A", "B"};
    int n = na + nb;
    g.type_of.assign(static_cast<size_t>(n), 0);
    for (int v = na; v < n; ++v) g.type_of[static_cast<size_t>(v)] = 1;
    g.nodes_of_type.assign(2, {});
    g.index_in_type.assign(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        g.nodes_of_type[static_cast<size_t>(g.type_of[static_cast<size_t>(v)])].push_back(v);
    for (auto& members : g.nodes_of_type)
        for (size_t i = 0; i < members.size(); ++i)
            g.index_in_type[static_cast<size_t>(members[i])] = static_cast<int>(i);
    g.relations.push_back(RelationDef{"A-B", 0, 1});
    g.neighbors.assign(1, std::vector<std::vector<int>>(static_cast<size_t>(n)));
    for (int a = 0; a < na; ++a)
        for (int b = na; b < n; ++b)
            if (rng.real() < p) {
                g.neighbors[0][static_cast<size_t>(a)].push_back(b);
                g.neighbors[0][static_cast<size_t>(b)].push_back(a);
            }
    g.feature_dim = 2;
    for (int t = 0; t < 2; ++t)
        g.features.push_back(
            ad::Tensor(static_cast<int>(g.nodes_of_type[static_cast<size_t>(t)].size()), 2));
    g.label_of.assign(static_cast<size_t>(n), -1);
    g.target_type = 0;
    g.metapaths.push_back(Metapath{"A,B,A", {0, 1, 0}});
    g.metapaths.push_back(Metapath{"A,B", {0, 1}});
    g.validate();
    return g;
}

std::set<std::vector<int>> as_set(const std::vector<MetapathInstance>& xs) {
    std::set<std::vector<int>> out;
    for (const auto& x : xs) out.insert(x.nodes);
    return out;
}

std::set<std::vector<int>> as_set(const std::vector<std::vector<int>>& xs) {
    return {xs.begin(), xs.end()};
}

}  // namespace

TEST_CASE("load_dataset on a minimal two-type fixture") {
    TempDir dir("minimal");
    write_file(dir.path / "schema.toml",
               "target_type = \"A\"\nrelation = \"A-B : A , B\"\nmetapath = \"A,B\"\n");
    write_file(dir.path / "nodes.tsv", "0\tA\n1\tB\n");
    write_file(dir.path / "edges.tsv", "0\t1\tA-B\n");
    write_file(dir.path / "features_A.tsv", "0\t1.0\n");
    write_file(dir.path / "features_B.tsv", "1\t2.0\n");
    HeteroGraph g = load_dataset(dir.str());
    CHECK(g.num_nodes() == 2);
    CHECK(g.neighbors[0][0].size() == 1);
    CHECK(g.feature_dim == 1);
}

TEST_CASE("load errors carry file and line") {
    TempDir dir("badedge");
    write_file(dir.path / "schema.toml",
               "target_type = \"A\"\nrelation = \"A-B : A , B\"\nmetapath = \"A,B\"\n");
    write_file(dir.path / "nodes.tsv", "0\tA\n1\tB\n");
    write_file(dir.path / "edges.tsv", "# comment\n0\t7\tA-B\n");
    write_file(dir.path / "features_A.tsv", "0\t1.0\n");
    write_file(dir.path / "features_B.tsv", "1\t2.0\n");
    try {
        load_dataset(dir.str());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("edges.tsv:2") != std::string::npos);
    }
}

TEST_CASE("feature dimension mismatch is rejected") {
    TempDir dir("badfeat");
    write_file(dir.path / "schema.toml",
               "target_type = \"A\"\nrelation = \"A-B : A , B\"\nmetapath = \"A,B\"\n");
    write_file(dir.path / "nodes.tsv", "0\tA\n1\tB\n");
    write_file(dir.path / "edges.tsv", "0\t1\tA-B\n");
    write_file(dir.path / "features_A.tsv", "0\t1.0\t3.0\n");
    write_file(dir.path / "features_B.tsv", "1\t2.0\n");
    CHECK_THROWS_AS(load_dataset(dir.str()), DataError);
}

TEST_CASE("bibliographic fixture round trip") {
    TempDir dir("dblp");
    write_dblp_fixture(dir.path);
    HeteroGraph g = load_dataset(dir.str());
    CHECK(g.type_names.size() == 3);
    CHECK(g.relations.size() == 2);
    CHECK(g.metapaths.size() == 2);
    CHECK(g.num_classes == 2);
    CHECK(g.labeled_nodes().size() == 3);

    // writing and re-reading reproduces the same content
    TempDir dir2("dblp_rt");
    write_dataset(g, dir2.str());
    HeteroGraph g2 = load_dataset(dir2.str());
    CHECK(g2.num_nodes() == g.num_nodes());
    CHECK(g2.neighbors == g.neighbors);
    CHECK(g2.label_of == g.label_of);
    for (size_t t = 0; t < g.features.size(); ++t) CHECK(g2.features[t].v == g.features[t].v);
}

TEST_CASE("sampler: isolated node yields the empty set") {
    Rng rng(1);
    HeteroGraph g = random_bipartite(rng, 4, 3, 0.0);
    InstanceSet s = sample_instances(g, 0, {0}, 3, 64, 7);
    CHECK(s.by_metapath[0].empty());
}

TEST_CASE("sampler: star graph enumerates exactly the leaves") {
    TempDir dir("star");
    write_file(dir.path / "schema.toml",
               "target_type = \"A\"\nrelation = \"A-P : A , P\"\nmetapath = \"A,P\"\n");
    write_file(dir.path / "nodes.tsv", "0\tA\n1\tP\n2\tP\n3\tP\n");
    write_file(dir.path / "edges.tsv", "0\t1\tA-P\n0\t2\tA-P\n0\t3\tA-P\n");
    write_file(dir.path / "features_A.tsv", "0\t1.0\n");
    write_file(dir.path / "features_P.tsv", "1\t0.0\n2\t0.0\n3\t0.0\n");
    HeteroGraph g = load_dataset(dir.str());
    InstanceSet s = sample_instances(g, 0, {0}, 2, 64, 7);
    auto got = as_set(s.by_metapath[0]);
    std::set<std::vector<int>> want{{0, 1}, {0, 2}, {0, 3}};
    CHECK(got == want);
}

TEST_CASE("sampler equals recursive enumeration on random fixtures") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        int na = 3 + rng.index(10);
        int nb = 3 + rng.index(10);
        HeteroGraph g = random_bipartite(rng, na, nb, 0.25);
        for (int v = 0; v < na; ++v) {
            InstanceSet s = sample_instances(g, v, {0, 1}, 3, 1 << 20, seed);
            CHECK(as_set(s.by_metapath[0]) == as_set(oracle::enumerate_walks(g, v, 0)));
            CHECK(as_set(s.by_metapath[1]) == as_set(oracle::enumerate_walks(g, v, 1)));
        }
    }
}

TEST_CASE("sampler cap subsamples deterministically") {
    Rng rng(55);
    HeteroGraph g = random_bipartite(rng, 8, 8, 0.8);
    InstanceSet a = sample_instances(g, 0, {0}, 3, 5, 99);
    InstanceSet b = sample_instances(g, 0, {0}, 3, 5, 99);
    CHECK(a.by_metapath[0].size() == 5);
    CHECK(as_set(a.by_metapath[0]) == as_set(b.by_metapath[0]));
    InstanceSet c = sample_instances(g, 0, {0}, 3, 5, 100);
    // different seed: still 5 instances, all valid walks
    CHECK(c.by_metapath[0].size() == 5);
    auto all = as_set(oracle::enumerate_walks(g, 0, 0));
    for (const auto& inst : c.by_metapath[0]) CHECK(all.count(inst.nodes) == 1);
}

TEST_CASE("sampler rejects wrong start type") {
    Rng rng(3);
    HeteroGraph g = random_bipartite(rng, 3, 3, 0.5);
    CHECK_THROWS_AS(sample_instances(g, 3, {0}, 3, 64, 7), DataError);
}

TEST_CASE("metapath subgraph endpoints") {
    TempDir dir("sub");
    write_file(dir.path / "schema.toml",
               "target_type = \"A\"\nrelation = \"A-P : A , P\"\nmetapath = \"A,P,A\"\n");
    write_file(dir.path / "nodes.tsv", "0\tA\n1\tA\n2\tP\n");
    write_file(dir.path / "edges.tsv", "0\t2\tA-P\n1\t2\tA-P\n");
    write_file(dir.path / "features_A.tsv", "0\t1.0\n1\t1.0\n");
    write_file(dir.path / "features_P.tsv", "2\t0.0\n");
    HeteroGraph g = load_dataset(dir.str());
    HomogeneousGraph h = metapath_subgraph(g, 0);
    // shared paper with two authors: a single A-A edge
    CHECK(h.node_ids == std::vector<int>{0, 1});
    CHECK(h.adj[0] == std::vector<int>{1});
    CHECK(h.adj[1] == std::vector<int>{0});
}

TEST_CASE("metapath subgraph equals brute-force endpoint enumeration") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(300 + seed);
        HeteroGraph g = random_bipartite(rng, 6, 5, 0.3);
        HomogeneousGraph h = metapath_subgraph(g, 0);
        std::set<std::pair<int, int>> expect;
        for (int v = 0; v < 6; ++v)
            for (const auto& walk : oracle::enumerate_walks(g, v, 0))
                if (walk.front() != walk.back())
                    expect.insert({std::min(walk.front(), walk.back()),
                                   std::max(walk.front(), walk.back())});
        std::set<std::pair<int, int>> got;
        for (size_t i = 0; i < h.adj.size(); ++i)
            for (int j : h.adj[i])
                got.insert({std::min(h.node_ids[i], h.node_ids[static_cast<size_t>(j)]),
                            std::max(h.node_ids[i], h.node_ids[static_cast<size_t>(j)])});
        CHECK(got == expect);
    }
}

namespace {

HomogeneousGraph make_homogeneous(int n, const std::vector<std::pair<int, int>>& edges) {
    HomogeneousGraph h;
    for (int i = 0; i < n; ++i) h.node_ids.push_back(i);
    h.adj.resize(static_cast<size_t>(n));
    for (auto [u, v] : edges) {
        h.adj[static_cast<size_t>(u)].push_back(v);
        h.adj[static_cast<size_t>(v)].push_back(u);
    }
    for (auto& ns : h.adj) std::sort(ns.begin(), ns.end());
    return h;
}

}  // namespace

TEST_CASE("delta of trees is zero") {
    // 7-node star
    HomogeneousGraph star = make_homogeneous(7, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}});
    DeltaReport rep = delta_hyperbolicity(star, 1000, 7);
    CHECK(rep.exact);
    CHECK(rep.delta_avg == 0.0);
    // a path
    HomogeneousGraph path = make_homogeneous(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
    CHECK(delta_hyperbolicity(path, 1000, 7).delta_avg == 0.0);
}

TEST_CASE("delta of the 4-cycle") {
    HomogeneousGraph cyc = make_homogeneous(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    DeltaReport rep = delta_hyperbolicity(cyc, 1000, 7);
    CHECK(rep.exact);
    CHECK(rep.quadruples_sampled == 1);
    // opposite pairs at distance 2, adjacent at 1: sums are 4, 2, 2
    CHECK(rep.delta_avg == doctest::Approx(1.0));
}

TEST_CASE("delta is invariant under relabeling") {
    Rng rng(77);
    HomogeneousGraph h = make_homogeneous(12, {});
    // random connected-ish graph
    for (int v = 1; v < 12; ++v) {
        int u = rng.index(v);
        h.adj[static_cast<size_t>(u)].push_back(v);
        h.adj[static_cast<size_t>(v)].push_back(u);
    }
    for (int extra = 0; extra < 6; ++extra) {
        int u = rng.index(12), v = rng.index(12);
        if (u == v) continue;
        h.adj[static_cast<size_t>(u)].push_back(v);
        h.adj[static_cast<size_t>(v)].push_back(u);
    }
    for (auto& ns : h.adj) {
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    }
    std::vector<int> perm(12);
    for (int i = 0; i < 12; ++i) perm[static_cast<size_t>(i)] = i;
    rng.shuffle(perm);
    HomogeneousGraph relabeled;
    relabeled.node_ids.assign(12, 0);
    relabeled.adj.assign(12, {});
    for (int v = 0; v < 12; ++v) {
        relabeled.node_ids[static_cast<size_t>(perm[static_cast<size_t>(v)])] = v;
        for (int u : h.adj[static_cast<size_t>(v)])
            relabeled.adj[static_cast<size_t>(perm[static_cast<size_t>(v)])].push_back(
                perm[static_cast<size_t>(u)]);
    }
    for (auto& ns : relabeled.adj) std::sort(ns.begin(), ns.end());
    double d1 = delta_hyperbolicity(h, 0, 7).delta_avg;
    double d2 = delta_hyperbolicity(relabeled, 0, 7).delta_avg;
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
}

TEST_CASE("delta rejects tiny graphs") {
    HomogeneousGraph h = make_homogeneous(3, {{0, 1}, {1, 2}});
    CHECK_THROWS_AS(delta_hyperbolicity(h, 10, 7), DataError);
}

TEST_CASE("synthetic generator is deterministic and writes loadable datasets") {
    SyntheticSpec spec;
    spec.target_count = 60;
    spec.num_classes = 3;
    spec.feature_dim = 6;
    spec.noise = 0.2;
    spec.metapaths = {{2.1, 30, 1, 0}, {3.5, 30, 1, 0}};
    HeteroGraph a = generate_synthetic(spec, 42);
    HeteroGraph b = generate_synthetic(spec, 42);
    TempDir da("synth_a"), db("synth_b");
    write_dataset(a, da.str());
    write_dataset(b, db.str());
    CHECK(dataset_fingerprint(da.str()) == dataset_fingerprint(db.str()));
    HeteroGraph back = load_dataset(da.str());
    CHECK(back.num_nodes() == a.num_nodes());
    CHECK(back.metapaths.size() == 2);

    HeteroGraph c = generate_synthetic(spec, 43);
    TempDir dc("synth_c");
    write_dataset(c, dc.str());
    CHECK(dataset_fingerprint(da.str()) != dataset_fingerprint(dc.str()));
}

TEST_CASE("synthetic generator rejects duplicate exponents") {
    SyntheticSpec spec;
    spec.metapaths = {{2.5, 30, 1, 0}, {2.5, 30, 1, 0}};
    CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
}

TEST_CASE("synthetic degree sequences order by exponent") {
    SyntheticSpec spec;
    spec.target_count = 300;
    spec.num_classes = 3;
    spec.feature_dim = 6;
    spec.noise = 0.1;
    spec.metapaths = {{2.1, 220, 1, 0}, {3.5, 220, 1, 0}};
    HeteroGraph g = generate_synthetic(spec, 11);
    // log-log CCDF slope: steeper (more negative) for the larger exponent
    auto ccdf_slope = [&](int rel) {
        std::vector<int> degs;
        for (int v : g.nodes_of_type[static_cast<size_t>(rel + 1)])
            degs.push_back(static_cast<int>(g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(v)].size()));
        std::sort(degs.begin(), degs.end());
        int n = static_cast<int>(degs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int pts = 0;
        for (int i = 0; i < n; ++i) {
            if (i > 0 && degs[static_cast<size_t>(i)] == degs[static_cast<size_t>(i - 1)]) continue;
            double x = std::log(static_cast<double>(degs[static_cast<size_t>(i)]));
            double y = std::log(static_cast<double>(n - i) / n);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++pts;
        }
        return (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    };
    double s_heavy = ccdf_slope(0);   // gamma 2.1
    double s_light = ccdf_slope(1);   // gamma 3.5
    CHECK(s_heavy > s_light);
}

TEST_CASE("zero-noise synthetic graph has a linearly separable planted signal") {
    SyntheticSpec spec;
    spec.target_count = 150;
    spec.num_classes = 3;
    spec.feature_dim = 6;
    spec.noise = 0.0;
    spec.metapaths = {{2.1, 90, 1, 0}, {3.5, 90, 1, 0}};
    HeteroGraph g = generate_synthetic(spec, 5);
    // raw metapath-neighbor count features: per class, neighbors reached via
    // each relation's intermediates
    int C = spec.num_classes;
    ad::Tensor counts(spec.target_count, C * 2);
    std::vector<int> labels;
    for (int v = 0; v < spec.target_count; ++v) {
        labels.push_back(g.label_of[static_cast<size_t>(v)]);
        for (int rel = 0; rel < 2; ++rel) {
            for (int mid : g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(v)])
                for (int other : g.neighbors[static_cast<size_t>(rel)][static_cast<size_t>(mid)])
                    if (other != v)
                        counts.at(v, rel * C + g.label_of[static_cast<size_t>(other)]) += 1.0;
        }
    }
    auto pred = metrics::linear_probe_predict(counts, labels, counts, C);
    int hits = 0;
    for (int v = 0; v < spec.target_count; ++v)
        if (pred[static_cast<size_t>(v)] == labels[static_cast<size_t>(v)]) ++hits;
    CHECK(static_cast<double>(hits) / spec.target_count >= 0.95);
}
