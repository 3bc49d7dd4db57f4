#include "msgat/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "msgat/errors.hpp"

namespace msgat {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_tensor(std::ostream& out, const std::string& name, const ad::Tensor& t) {
    out << "tensor " << name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (int r = 0; r < t.rows; ++r) {
        for (int c = 0; c < t.cols; ++c) {
            if (c) out << ' ';
            out << fmt(t.at(r, c));
        }
        out << '\n';
    }
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot write checkpoint");
    out << "msgat-checkpoint version=" << ck.version << '\n';
    out << "variant = " << variant_name(ck.config.variant) << '\n';
    out << "input_dim = " << ck.config.input_dim << '\n';
    out << "hidden_dim = " << ck.config.hidden_dim << '\n';
    out << "semantic_dim = " << ck.config.semantic_dim << '\n';
    out << "output_dim = " << ck.config.output_dim << '\n';
    out << "heads = " << ck.config.heads << '\n';
    out << "max_length = " << ck.config.max_length << '\n';
    out << "instance_cap = " << ck.config.instance_cap << '\n';
    out << "leaky_slope = " << fmt(ck.config.leaky_slope) << '\n';
    out << "eps_boundary = " << fmt(ck.config.eps_boundary) << '\n';
    out << "curvature_floor = " << fmt(ck.config.curvature_floor) << '\n';
    out << "bias_before_activation = " << (ck.config.bias_before_activation ? 1 : 0) << '\n';
    out << "num_metapaths = " << ck.num_metapaths << '\n';
    auto tensors = ck.params.all();
    auto names = ck.params.names();
    out << "tensors = " << tensors.size() << '\n';
    for (size_t i = 0; i < tensors.size(); ++i) write_tensor(out, names[i], *tensors[i]);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open checkpoint");
    std::string header;
    std::getline(in, header);
    if (header.rfind("msgat-checkpoint version=", 0) != 0)
        throw DataError(path + ": not a checkpoint file (missing version header)");
    Checkpoint ck;
    ck.version = std::stoi(header.substr(header.find('=') + 1));
    if (ck.version != 1) throw DataError(path + ": unsupported checkpoint version");

    std::map<std::string, std::string> kv;
    long n_tensors = -1;
    std::string line;
    while (n_tensors < 0 && std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError(path + ": malformed checkpoint line");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto strip = [](std::string s) {
            size_t a = s.find_first_not_of(' ');
            size_t b = s.find_last_not_of(' ');
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        key = strip(key);
        val = strip(val);
        if (key == "tensors")
            n_tensors = std::stol(val);
        else
            kv[key] = val;
    }
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError(path + ": checkpoint missing field " + key);
        return it->second;
    };
    ck.config.variant = variant_from_name(need("variant"));
    ck.config.input_dim = std::stoi(need("input_dim"));
    ck.config.hidden_dim = std::stoi(need("hidden_dim"));
    ck.config.semantic_dim = std::stoi(need("semantic_dim"));
    ck.config.output_dim = std::stoi(need("output_dim"));
    ck.config.heads = std::stoi(need("heads"));
    ck.config.max_length = std::stoi(need("max_length"));
    ck.config.instance_cap = std::stoi(need("instance_cap"));
    ck.config.leaky_slope = std::stod(need("leaky_slope"));
    ck.config.eps_boundary = std::stod(need("eps_boundary"));
    ck.config.curvature_floor = std::stod(need("curvature_floor"));
    ck.config.bias_before_activation = need("bias_before_activation") == "1";
    ck.num_metapaths = std::stoi(need("num_metapaths"));

    ck.params = init_parameters(ck.config, ck.num_metapaths, 0);
    auto tensors = ck.params.all();
    auto names = ck.params.names();
    if (n_tensors != static_cast<long>(tensors.size()))
        throw DataError(path + ": checkpoint tensor count mismatch");
    for (size_t i = 0; i < tensors.size(); ++i) {
        std::string tag, name;
        int rows, cols;
        if (!(in >> tag >> name >> rows >> cols) || tag != "tensor" || name != names[i])
            throw DataError(path + ": unexpected tensor record (wanted " + names[i] + ")");
        if (rows != tensors[i]->rows || cols != tensors[i]->cols)
            throw DataError(path + ": tensor shape mismatch for " + name);
        for (int j = 0; j < tensors[i]->size(); ++j)
            if (!(in >> tensors[i]->v[static_cast<size_t>(j)]))
                throw DataError(path + ": truncated tensor " + name);
    }
    return ck;
}

}  // namespace msgat
