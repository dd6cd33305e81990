#include "heurlink/data.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "heurlink/errors.hpp"
#include "heurlink/rng.hpp"

namespace heurlink {

using nlohmann::json;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string base_name(const std::string& path) {
    const auto slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

std::uint64_t norm_key(Index a, Index b, Index n) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(b);
}

std::vector<Edge> edges_from_json(const json& j, const char* field) {
    std::vector<Edge> out;
    for (const auto& item : j.at(field)) {
        if (!item.is_array() || item.size() != 2) {
            throw ContractError(std::string("split: ") + field + " entries must be [u, v] pairs");
        }
        out.emplace_back(item[0].get<Index>(), item[1].get<Index>());
    }
    return out;
}

json edges_to_json(const std::vector<Edge>& edges) {
    json arr = json::array();
    for (const auto& [u, v] : edges) arr.push_back(json::array({u, v}));
    return arr;
}

Dataset cycle_dataset(Index count, Index cycle_len, std::uint64_t seed, const char* tag) {
    if (count < 1) throw std::invalid_argument("generator: need at least one component");
    const Index n = count * cycle_len;
    std::vector<Index> label(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = i;
    Rng rng(Rng::mix(seed, 0x73796e7468ULL));
    for (Index i = n; i > 1; --i) {
        const Index j = rng.below(i);
        std::swap(label[static_cast<std::size_t>(i - 1)], label[static_cast<std::size_t>(j)]);
    }
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n));
    for (Index c = 0; c < count; ++c) {
        const Index base = c * cycle_len;
        for (Index s = 0; s < cycle_len; ++s) {
            const Index u = label[static_cast<std::size_t>(base + s)];
            const Index v = label[static_cast<std::size_t>(base + (s + 1) % cycle_len)];
            edges.emplace_back(u, v);
        }
    }
    Dataset ds;
    ds.name = tag;
    ds.source = std::string(tag) + ":" + std::to_string(count) + ":" + std::to_string(seed);
    ds.graph = build_graph(edges, n);
    return ds;
}

}  // namespace

DenseMatrix load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("features: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("features: empty file '" + path + "'");
    // Header row defines the width.
    Index cols = line.empty() ? 0 : 1;
    for (char ch : line) {
        if (ch == ',') ++cols;
    }
    if (cols < 1) throw std::invalid_argument("features: header has no columns");

    std::vector<double> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        Index c = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::invalid_argument("features: bad number '" + cell + "' in '" + path + "'");
            }
            ++c;
        }
        if (c != cols) {
            throw std::invalid_argument("features: ragged row in '" + path + "'");
        }
        ++rows;
    }
    if (rows == 0) throw std::invalid_argument("features: no data rows in '" + path + "'");
    DenseMatrix m(rows, cols);
    m.values = std::move(values);
    return m;
}

DenseMatrix load_features_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("features: cannot open '" + path + "'");
    std::uint64_t dims[2] = {0, 0};
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw std::invalid_argument("features: truncated header in '" + path + "'");
    if (dims[0] == 0 || dims[1] == 0 || dims[0] > (1ull << 32) || dims[1] > (1ull << 32)) {
        throw std::invalid_argument("features: implausible dimensions in '" + path + "'");
    }
    DenseMatrix m(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
    in.read(reinterpret_cast<char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(double)));
    if (!in) throw std::invalid_argument("features: truncated values in '" + path + "'");
    return m;
}

Dataset load_dataset(const std::string& edge_path, const std::string& features_path,
                     Index num_nodes_override) {
    std::ifstream in(edge_path);
    if (!in) throw std::invalid_argument("dataset: cannot open '" + edge_path + "'");
    std::vector<Edge> edges;
    Index max_id = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ss(line);
        long long u = 0, v = 0;
        if (!(ss >> u)) continue;  // blank or comment-only line
        if (!(ss >> v)) {
            throw std::invalid_argument("dataset: line " + std::to_string(line_no) +
                                        " of '" + edge_path + "' has a lone endpoint");
        }
        long long extra;
        if (ss >> extra) {
            throw std::invalid_argument("dataset: line " + std::to_string(line_no) +
                                        " of '" + edge_path + "' has trailing fields");
        }
        if (u < 0 || v < 0) {
            throw std::invalid_argument("dataset: negative node id at line " +
                                        std::to_string(line_no));
        }
        edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
        max_id = std::max({max_id, static_cast<Index>(u), static_cast<Index>(v)});
    }
    if (edges.empty()) throw std::invalid_argument("dataset: no edges in '" + edge_path + "'");
    const Index n = num_nodes_override > 0 ? num_nodes_override : max_id + 1;

    Dataset ds;
    ds.name = base_name(edge_path);
    ds.source = edge_path;
    ds.graph = build_graph(edges, n);
    if (!features_path.empty()) {
        DenseMatrix f = ends_with(features_path, ".csv") ? load_features_csv(features_path)
                                                         : load_features_bin(features_path);
        if (f.rows != ds.graph.num_nodes) {
            throw std::invalid_argument("dataset: feature rows (" + std::to_string(f.rows) +
                                        ") do not match node count (" +
                                        std::to_string(ds.graph.num_nodes) + ")");
        }
        ds.features = std::move(f);
    }
    return ds;
}

Dataset generate_triangular(Index num_triangles, std::uint64_t seed) {
    return cycle_dataset(num_triangles, 3, seed, "triangular");
}

Dataset generate_hexagonal(Index num_hexagons, std::uint64_t seed) {
    return cycle_dataset(num_hexagons, 6, seed, "hexagonal");
}

void save_split(const EdgeSplit& split, const std::string& path) {
    json j;
    j["version"] = 1;
    j["seed"] = split.seed;
    j["ratios"] = json{{"valid", split.valid_ratio}, {"test", split.test_ratio}};
    j["train"] = edges_to_json(split.train);
    j["valid_pos"] = edges_to_json(split.valid_pos);
    j["valid_neg"] = edges_to_json(split.valid_neg);
    j["test_pos"] = edges_to_json(split.test_pos);
    j["test_neg"] = edges_to_json(split.test_neg);
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("save_split: cannot open '" + path + "'");
    out << j.dump(2) << "\n";
}

EdgeSplit load_split(const std::string& path, Index num_nodes) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_split: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ContractError(std::string("load_split: malformed JSON: ") + e.what());
    }
    if (j.at("version").get<int>() != 1) throw ContractError("load_split: unsupported version");

    EdgeSplit split;
    split.seed = j.at("seed").get<std::uint64_t>();
    split.valid_ratio = j.at("ratios").at("valid").get<double>();
    split.test_ratio = j.at("ratios").at("test").get<double>();
    split.train = edges_from_json(j, "train");
    split.valid_pos = edges_from_json(j, "valid_pos");
    split.valid_neg = edges_from_json(j, "valid_neg");
    split.test_pos = edges_from_json(j, "test_pos");
    split.test_neg = edges_from_json(j, "test_neg");

    auto check_range = [&](const std::vector<Edge>& edges, const char* field) {
        for (const auto& [u, v] : edges) {
            if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
                throw ContractError(std::string("load_split: ") + field + " id out of range");
            }
            if (u == v) {
                throw ContractError(std::string("load_split: ") + field + " contains a self loop");
            }
        }
    };
    check_range(split.train, "train");
    check_range(split.valid_pos, "valid_pos");
    check_range(split.valid_neg, "valid_neg");
    check_range(split.test_pos, "test_pos");
    check_range(split.test_neg, "test_neg");

    // Positives must be pairwise disjoint; negatives must miss all of them.
    std::unordered_set<std::uint64_t> pos_keys;
    auto insert_pos = [&](const std::vector<Edge>& edges, const char* field) {
        for (const auto& [u, v] : edges) {
            if (!pos_keys.insert(norm_key(u, v, num_nodes)).second) {
                throw ContractError(std::string("load_split: duplicate positive in ") + field);
            }
        }
    };
    insert_pos(split.train, "train");
    insert_pos(split.valid_pos, "valid_pos");
    insert_pos(split.test_pos, "test_pos");
    auto check_neg = [&](const std::vector<Edge>& edges, const char* field) {
        for (const auto& [u, v] : edges) {
            if (pos_keys.count(norm_key(u, v, num_nodes))) {
                throw ContractError(std::string("load_split: ") + field +
                                    " overlaps a positive edge");
            }
        }
    };
    check_neg(split.valid_neg, "valid_neg");
    check_neg(split.test_neg, "test_neg");
    return split;
}

}  // namespace heurlink
