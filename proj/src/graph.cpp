#include "msgat/graph.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "msgat/errors.hpp"

namespace fs = std::filesystem;

namespace msgat {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string unquote(std::string v) {
    v = trim(v);
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

[[noreturn]] void fail(const std::string& file, int line, const std::string& msg) {
    throw DataError(file + ":" + std::to_string(line) + ": " + msg);
}

// Iterates non-comment lines of a TSV file, reporting 1-based line numbers.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        fn(t, lineno);
    }
}

long parse_long(const std::string& s, const std::string& file, int line) {
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        fail(file, line, "expected an integer, got '" + s + "'");
    }
}

double parse_double(const std::string& s, const std::string& file, int line) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        fail(file, line, "expected a number, got '" + s + "'");
    }
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

int HeteroGraph::type_id(const std::string& name) const {
    for (size_t i = 0; i < type_names.size(); ++i)
        if (type_names[i] == name) return static_cast<int>(i);
    return -1;
}

int HeteroGraph::relation_id(const std::string& name) const {
    for (size_t i = 0; i < relations.size(); ++i)
        if (relations[i].name == name) return static_cast<int>(i);
    return -1;
}

int HeteroGraph::metapath_id(const std::string& name) const {
    for (size_t i = 0; i < metapaths.size(); ++i)
        if (metapaths[i].name == name) return static_cast<int>(i);
    return -1;
}

const double* HeteroGraph::feature_row(int node) const {
    int t = type_of[static_cast<size_t>(node)];
    const ad::Tensor& f = features[static_cast<size_t>(t)];
    return &f.v[static_cast<size_t>(index_in_type[static_cast<size_t>(node)]) *
                static_cast<size_t>(f.cols)];
}

std::vector<int> HeteroGraph::labeled_nodes() const {
    std::vector<int> out;
    for (int v = 0; v < num_nodes(); ++v)
        if (label_of[static_cast<size_t>(v)] >= 0) out.push_back(v);
    return out;
}

std::vector<int> HeteroGraph::neighbors_of_type(int node, int t) const {
    int my_type = type_of[static_cast<size_t>(node)];
    std::vector<int> out;
    for (size_t r = 0; r < relations.size(); ++r) {
        const RelationDef& rel = relations[r];
        bool touches = (rel.src_type == my_type && rel.dst_type == t) ||
                       (rel.dst_type == my_type && rel.src_type == t);
        if (!touches) continue;
        for (int nb : neighbors[r][static_cast<size_t>(node)])
            if (type_of[static_cast<size_t>(nb)] == t) out.push_back(nb);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool HeteroGraph::has_edge(int rel, int u, int v) const {
    const auto& ns = neighbors[static_cast<size_t>(rel)][static_cast<size_t>(u)];
    return std::binary_search(ns.begin(), ns.end(), v);
}

void HeteroGraph::validate() const {
    int n = num_nodes();
    if (static_cast<int>(index_in_type.size()) != n || static_cast<int>(label_of.size()) != n)
        throw DataError("graph: inconsistent node table sizes");
    if (target_type < 0 || target_type >= static_cast<int>(type_names.size()))
        throw DataError("graph: target type undefined");
    for (size_t t = 0; t < type_names.size(); ++t) {
        if (features.size() != type_names.size())
            throw DataError("graph: missing per-type feature matrices");
        const ad::Tensor& f = features[t];
        if (f.rows != static_cast<int>(nodes_of_type[t].size()))
            throw DataError("graph: feature row count != node count for type " + type_names[t]);
        if (f.cols != feature_dim)
            throw DataError("graph: feature dim mismatch for type " + type_names[t]);
    }
    for (size_t r = 0; r < relations.size(); ++r) {
        for (int u = 0; u < n; ++u) {
            for (int v : neighbors[r][static_cast<size_t>(u)]) {
                if (v < 0 || v >= n) throw DataError("graph: dangling edge endpoint");
                int tu = type_of[static_cast<size_t>(u)];
                int tv = type_of[static_cast<size_t>(v)];
                const RelationDef& rel = relations[r];
                bool ok = (tu == rel.src_type && tv == rel.dst_type) ||
                          (tu == rel.dst_type && tv == rel.src_type);
                if (!ok)
                    throw DataError("graph: edge endpoint types do not match relation " +
                                    rel.name);
            }
        }
    }
    for (int v = 0; v < n; ++v)
        if (label_of[static_cast<size_t>(v)] >= 0 && type_of[static_cast<size_t>(v)] != target_type)
            throw DataError("graph: label on non-target node " + std::to_string(v));
    for (const Metapath& mp : metapaths) {
        if (mp.type_seq.size() < 2) throw DataError("graph: metapath shorter than 2: " + mp.name);
        for (size_t i = 0; i + 1 < mp.type_seq.size(); ++i) {
            bool covered = false;
            for (const RelationDef& rel : relations) {
                if ((rel.src_type == mp.type_seq[i] && rel.dst_type == mp.type_seq[i + 1]) ||
                    (rel.dst_type == mp.type_seq[i] && rel.src_type == mp.type_seq[i + 1])) {
                    covered = true;
                    break;
                }
            }
            if (!covered)
                throw DataError("graph: metapath step " + mp.name +
                                " has no relation between consecutive types");
        }
    }
}

namespace {

struct Schema {
    std::string target_type;
    std::string target_relation;
    std::vector<std::array<std::string, 3>> relations;  // name, src, dst
    std::vector<std::string> metapaths;                 // comma-joined type names
};

Schema parse_schema(const std::string& path) {
    Schema sc;
    for_each_line(path, [&](const std::string& line, int lineno) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(path, lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = unquote(line.substr(eq + 1));
        if (key == "target_type") {
            sc.target_type = val;
        } else if (key == "target_relation") {
            sc.target_relation = val;
        } else if (key == "relation") {
            // "NAME : SRC , DST"
            auto colon = val.find(':');
            if (colon == std::string::npos) fail(path, lineno, "relation needs 'name : src , dst'");
            std::string name = trim(val.substr(0, colon));
            auto ends = split(val.substr(colon + 1), ',');
            if (ends.size() != 2) fail(path, lineno, "relation needs two endpoint types");
            sc.relations.push_back({name, trim(ends[0]), trim(ends[1])});
        } else if (key == "metapath") {
            sc.metapaths.push_back(val);
        } else {
            fail(path, lineno, "unknown schema key '" + key + "'");
        }
    });
    if (sc.target_type.empty()) throw DataError(path + ": target_type missing");
    if (sc.relations.empty()) throw DataError(path + ": no relations declared");
    if (sc.metapaths.empty()) throw DataError(path + ": no metapaths declared");
    return sc;
}

}  // namespace

HeteroGraph load_dataset(const std::string& dir) {
    const std::string schema_path = dir + "/schema.toml";
    const std::string nodes_path = dir + "/nodes.tsv";
    const std::string edges_path = dir + "/edges.tsv";
    if (!fs::exists(dir)) throw DataError(dir + ": dataset directory does not exist");
    Schema sc = parse_schema(schema_path);

    HeteroGraph g;

    // nodes
    std::vector<std::pair<long, std::string>> raw_nodes;
    for_each_line(nodes_path, [&](const std::string& line, int lineno) {
        auto f = split(line, '\t');
        if (f.size() != 2) fail(nodes_path, lineno, "expected node_id <TAB> type_name");
        raw_nodes.emplace_back(parse_long(trim(f[0]), nodes_path, lineno), trim(f[1]));
    });
    long n = static_cast<long>(raw_nodes.size());
    if (n == 0) throw DataError(nodes_path + ": no nodes");
    g.type_of.assign(static_cast<size_t>(n), -1);
    for (auto& [id, tname] : raw_nodes) {
        if (id < 0 || id >= n)
            throw DataError(nodes_path + ": node ids must be dense 0.." + std::to_string(n - 1) +
                            " (got " + std::to_string(id) + ")");
        if (g.type_of[static_cast<size_t>(id)] != -1)
            throw DataError(nodes_path + ": duplicate node id " + std::to_string(id));
        int t = g.type_id(tname);
        if (t < 0) {
            g.type_names.push_back(tname);
            t = static_cast<int>(g.type_names.size()) - 1;
        }
        g.type_of[static_cast<size_t>(id)] = t;
    }
    g.nodes_of_type.assign(g.type_names.size(), {});
    g.index_in_type.assign(static_cast<size_t>(n), -1);
    for (long v = 0; v < n; ++v)
        g.nodes_of_type[static_cast<size_t>(g.type_of[static_cast<size_t>(v)])].push_back(
            static_cast<int>(v));
    for (auto& members : g.nodes_of_type)
        for (size_t i = 0; i < members.size(); ++i)
            g.index_in_type[static_cast<size_t>(members[i])] = static_cast<int>(i);

    g.target_type = g.type_id(sc.target_type);
    if (g.target_type < 0)
        throw DataError(schema_path + ": target type '" + sc.target_type + "' has no nodes");

    // relations
    for (auto& [name, src, dst] : sc.relations) {
        int st = g.type_id(src), dt = g.type_id(dst);
        if (st < 0 || dt < 0)
            throw DataError(schema_path + ": relation " + name + " uses unknown type");
        g.relations.push_back(RelationDef{name, st, dt});
    }
    if (!sc.target_relation.empty()) {
        int r = g.relation_id(sc.target_relation);
        if (r < 0)
            throw DataError(schema_path + ": target_relation '" + sc.target_relation +
                            "' not declared");
        g.target_relation = r;
    }
    g.neighbors.assign(g.relations.size(),
                       std::vector<std::vector<int>>(static_cast<size_t>(n)));

    // edges
    for_each_line(edges_path, [&](const std::string& line, int lineno) {
        auto f = split(line, '\t');
        if (f.size() != 3) fail(edges_path, lineno, "expected src <TAB> dst <TAB> relation");
        long u = parse_long(trim(f[0]), edges_path, lineno);
        long v = parse_long(trim(f[1]), edges_path, lineno);
        int r = g.relation_id(trim(f[2]));
        if (r < 0) fail(edges_path, lineno, "undeclared relation '" + trim(f[2]) + "'");
        if (u < 0 || u >= n || v < 0 || v >= n)
            fail(edges_path, lineno, "edge endpoint does not exist");
        int tu = g.type_of[static_cast<size_t>(u)];
        int tv = g.type_of[static_cast<size_t>(v)];
        const RelationDef& rel = g.relations[static_cast<size_t>(r)];
        bool ok = (tu == rel.src_type && tv == rel.dst_type) ||
                  (tu == rel.dst_type && tv == rel.src_type);
        if (!ok) fail(edges_path, lineno, "endpoint types do not match relation " + rel.name);
        g.neighbors[static_cast<size_t>(r)][static_cast<size_t>(u)].push_back(static_cast<int>(v));
        g.neighbors[static_cast<size_t>(r)][static_cast<size_t>(v)].push_back(static_cast<int>(u));
    });
    for (auto& rel_adj : g.neighbors)
        for (auto& ns : rel_adj) {
            std::sort(ns.begin(), ns.end());
            ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        }

    // features, one file per type
    g.feature_dim = -1;
    for (size_t t = 0; t < g.type_names.size(); ++t) {
        std::string path = dir + "/features_" + g.type_names[t] + ".tsv";
        if (!fs::exists(path)) throw DataError(path + ": missing feature file");
        std::vector<std::vector<double>> rows(g.nodes_of_type[t].size());
        std::vector<bool> seen(g.nodes_of_type[t].size(), false);
        for_each_line(path, [&](const std::string& line, int lineno) {
            auto f = split(line, '\t');
            if (f.size() < 2) fail(path, lineno, "expected node_id <TAB> f1 ...");
            long id = parse_long(trim(f[0]), path, lineno);
            if (id < 0 || id >= n) fail(path, lineno, "unknown node id");
            if (g.type_of[static_cast<size_t>(id)] != static_cast<int>(t))
                fail(path, lineno, "node is not of type " + g.type_names[t]);
            std::vector<double> row;
            for (size_t i = 1; i < f.size(); ++i)
                row.push_back(parse_double(trim(f[i]), path, lineno));
            if (g.feature_dim == -1) g.feature_dim = static_cast<int>(row.size());
            if (static_cast<int>(row.size()) != g.feature_dim)
                fail(path, lineno, "feature dimension mismatch (expected " +
                                       std::to_string(g.feature_dim) + ")");
            int idx = g.index_in_type[static_cast<size_t>(id)];
            if (seen[static_cast<size_t>(idx)]) fail(path, lineno, "duplicate feature row");
            seen[static_cast<size_t>(idx)] = true;
            rows[static_cast<size_t>(idx)] = std::move(row);
        });
        for (size_t i = 0; i < seen.size(); ++i)
            if (!seen[i])
                throw DataError(path + ": missing feature row for node " +
                                std::to_string(g.nodes_of_type[t][i]));
        ad::Tensor mat(static_cast<int>(rows.size()), g.feature_dim);
        for (size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < g.feature_dim; ++j)
                mat.at(static_cast<int>(i), j) = rows[i][static_cast<size_t>(j)];
        g.features.push_back(std::move(mat));
    }

    // labels (optional file)
    g.label_of.assign(static_cast<size_t>(n), -1);
    const std::string labels_path = dir + "/labels.tsv";
    if (fs::exists(labels_path)) {
        for_each_line(labels_path, [&](const std::string& line, int lineno) {
            auto f = split(line, '\t');
            if (f.size() != 2) fail(labels_path, lineno, "expected node_id <TAB> class");
            long id = parse_long(trim(f[0]), labels_path, lineno);
            long cls = parse_long(trim(f[1]), labels_path, lineno);
            if (id < 0 || id >= n) fail(labels_path, lineno, "unknown node id");
            if (g.type_of[static_cast<size_t>(id)] != g.target_type)
                fail(labels_path, lineno, "label on non-target-type node");
            if (cls < 0) fail(labels_path, lineno, "negative class index");
            g.label_of[static_cast<size_t>(id)] = static_cast<int>(cls);
            g.num_classes = std::max(g.num_classes, static_cast<int>(cls) + 1);
        });
    }

    // metapaths
    for (const std::string& mp : sc.metapaths) {
        Metapath m;
        m.name = mp;
        for (const std::string& tn : split(mp, ',')) {
            int t = g.type_id(trim(tn));
            if (t < 0) throw DataError(schema_path + ": metapath '" + mp + "' uses unknown type");
            m.type_seq.push_back(t);
        }
        g.metapaths.push_back(std::move(m));
    }

    g.validate();
    return g;
}

void write_dataset(const HeteroGraph& g, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir + "/schema.toml");
        out << "target_type = \"" << g.type_names[static_cast<size_t>(g.target_type)] << "\"\n";
        if (g.target_relation)
            out << "target_relation = \"" << g.relations[static_cast<size_t>(*g.target_relation)].name
                << "\"\n";
        for (const RelationDef& r : g.relations)
            out << "relation = \"" << r.name << " : "
                << g.type_names[static_cast<size_t>(r.src_type)] << " , "
                << g.type_names[static_cast<size_t>(r.dst_type)] << "\"\n";
        for (const Metapath& m : g.metapaths) out << "metapath = \"" << m.name << "\"\n";
    }
    {
        std::ofstream out(dir + "/nodes.tsv");
        for (int v = 0; v < g.num_nodes(); ++v)
            out << v << '\t' << g.type_names[static_cast<size_t>(g.type_of[static_cast<size_t>(v)])]
                << '\n';
    }
    {
        std::ofstream out(dir + "/edges.tsv");
        for (size_t r = 0; r < g.relations.size(); ++r)
            for (int u = 0; u < g.num_nodes(); ++u)
                for (int v : g.neighbors[r][static_cast<size_t>(u)])
                    if (u < v) out << u << '\t' << v << '\t' << g.relations[r].name << '\n';
    }
    for (size_t t = 0; t < g.type_names.size(); ++t) {
        std::ofstream out(dir + "/features_" + g.type_names[t] + ".tsv");
        const ad::Tensor& f = g.features[t];
        for (size_t i = 0; i < g.nodes_of_type[t].size(); ++i) {
            out << g.nodes_of_type[t][i];
            for (int j = 0; j < f.cols; ++j)
                out << '\t' << fmt_double(f.at(static_cast<int>(i), j));
            out << '\n';
        }
    }
    {
        bool any = false;
        for (int v = 0; v < g.num_nodes(); ++v) any = any || g.label_of[static_cast<size_t>(v)] >= 0;
        if (any) {
            std::ofstream out(dir + "/labels.tsv");
            for (int v = 0; v < g.num_nodes(); ++v)
                if (g.label_of[static_cast<size_t>(v)] >= 0)
                    out << v << '\t' << g.label_of[static_cast<size_t>(v)] << '\n';
        }
    }
}

uint64_t dataset_fingerprint(const std::string& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    auto mix = [&h](const char* data, size_t len) {
        for (size_t i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 0x100000001b3ULL;
        }
    };
    for (const std::string& name : names) {
        mix(name.data(), name.size());
        std::ifstream in(dir + "/" + name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string body = ss.str();
        mix(body.data(), body.size());
    }
    return h;
}

}  // namespace msgat
