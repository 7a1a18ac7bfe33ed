#include "amgae/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace amgae {

namespace {

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& msg) {
    throw std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + msg);
}

std::ifstream open_or_throw(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("missing dataset file: " + p.string());
    return in;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<std::pair<index_t, index_t>> read_edges(const fs::path& p) {
    std::ifstream in = open_or_throw(p);
    std::vector<std::pair<index_t, index_t>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        std::istringstream row(line);
        long long u, v;
        if (!(row >> u >> v)) fail(p, lineno, "expected two integers");
        edges.emplace_back(static_cast<index_t>(u), static_cast<index_t>(v));
    }
    return edges;
}

Tensor read_features(const fs::path& p) {
    std::ifstream in = open_or_throw(p);
    std::vector<double> data;
    std::string line;
    std::size_t lineno = 0;
    index_t rows = 0, cols = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        index_t c = 0;
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        while (ptr < end) {
            double value;
            auto [next, ec] = std::from_chars(ptr, end, value);
            if (ec != std::errc{}) fail(p, lineno, "bad numeric field");
            data.push_back(value);
            ++c;
            ptr = next;
            while (ptr < end && (*ptr == ',' || *ptr == ' ' || *ptr == '\r')) ++ptr;
        }
        if (cols < 0) cols = c;
        else if (c != cols)
            fail(p, lineno, "row has " + std::to_string(c) + " fields, expected " +
                                std::to_string(cols));
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("empty feature file: " + p.string());
    return Tensor(rows, cols, std::move(data));
}

std::vector<std::int32_t> read_int_column(const fs::path& p) {
    std::ifstream in = open_or_throw(p);
    std::vector<std::int32_t> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        std::istringstream row(line);
        long long v;
        if (!(row >> v)) fail(p, lineno, "expected an integer");
        out.push_back(static_cast<std::int32_t>(v));
    }
    return out;
}

SplitMasks read_splits(const fs::path& p, index_t num_nodes) {
    std::ifstream in = open_or_throw(p);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(p.string() + ": " + e.what());
    }
    SplitMasks masks;
    auto load_mask = [&](const char* key, std::vector<std::uint8_t>& mask) {
        if (!j.contains(key)) throw std::runtime_error(p.string() + ": missing key " + key);
        mask.assign(static_cast<std::size_t>(num_nodes), 0);
        for (const auto& id : j.at(key)) {
            auto v = id.get<index_t>();
            if (v < 0 || v >= num_nodes)
                throw std::runtime_error(p.string() + ": split node id " + std::to_string(v) +
                                         " out of range");
            mask[static_cast<std::size_t>(v)] = 1;
        }
    };
    load_mask("train", masks.train);
    load_mask("val", masks.val);
    load_mask("test", masks.test);
    for (index_t i = 0; i < num_nodes; ++i) {
        int count = masks.train[static_cast<std::size_t>(i)] +
                    masks.val[static_cast<std::size_t>(i)] +
                    masks.test[static_cast<std::size_t>(i)];
        if (count > 1)
            throw std::runtime_error(p.string() + ": node " + std::to_string(i) +
                                     " appears in multiple splits");
    }
    return masks;
}

}  // namespace

Graph load_node_dataset(const fs::path& dir) {
    Tensor features = read_features(dir / "features.csv");
    const index_t n = features.rows();
    auto edges = read_edges(dir / "edges.tsv");
    auto labels = read_int_column(dir / "labels.txt");
    if (static_cast<index_t>(labels.size()) != n)
        throw std::runtime_error(dir.string() + ": labels.txt has " +
                                 std::to_string(labels.size()) + " rows, features.csv has " +
                                 std::to_string(n));
    SplitMasks splits = read_splits(dir / "splits.json", n);
    return Graph::from_edges(n, edges, std::move(features), std::move(labels),
                             std::move(splits));
}

GraphCollection load_graph_dataset(const fs::path& dir, index_t max_degree_onehot) {
    auto indicator = read_int_column(dir / "graph_indicator.txt");
    const index_t total_nodes = static_cast<index_t>(indicator.size());
    if (total_nodes == 0) throw std::runtime_error(dir.string() + ": empty graph_indicator.txt");

    index_t num_graphs = 0;
    for (std::int32_t gid : indicator) {
        if (gid < 0) throw std::runtime_error(dir.string() + ": negative graph id");
        num_graphs = std::max<index_t>(num_graphs, gid + 1);
    }
    std::vector<index_t> graph_size(static_cast<std::size_t>(num_graphs), 0);
    for (std::int32_t gid : indicator) ++graph_size[static_cast<std::size_t>(gid)];
    for (index_t gidx = 0; gidx < num_graphs; ++gidx)
        if (graph_size[static_cast<std::size_t>(gidx)] == 0)
            throw std::runtime_error(dir.string() + ": graph id " + std::to_string(gidx) +
                                     " has no nodes (dangling id)");

    auto labels = read_int_column(dir / "graph_labels.txt");
    if (static_cast<index_t>(labels.size()) != num_graphs)
        throw std::runtime_error(dir.string() + ": graph_labels.txt has " +
                                 std::to_string(labels.size()) + " rows, expected " +
                                 std::to_string(num_graphs));

    // global -> (graph, local) index maps
    std::vector<index_t> local_id(static_cast<std::size_t>(total_nodes));
    std::vector<index_t> next_local(static_cast<std::size_t>(num_graphs), 0);
    for (index_t v = 0; v < total_nodes; ++v) {
        auto gidx = static_cast<std::size_t>(indicator[static_cast<std::size_t>(v)]);
        local_id[static_cast<std::size_t>(v)] = next_local[gidx]++;
    }

    std::vector<std::vector<std::pair<index_t, index_t>>> per_graph_edges(
        static_cast<std::size_t>(num_graphs));
    for (auto [u, v] : read_edges(dir / "edges.tsv")) {
        if (u < 0 || u >= total_nodes || v < 0 || v >= total_nodes)
            throw std::runtime_error(dir.string() + ": edge node id out of range");
        auto gu = indicator[static_cast<std::size_t>(u)];
        auto gv = indicator[static_cast<std::size_t>(v)];
        if (gu != gv)
            throw std::runtime_error(dir.string() + ": edge (" + std::to_string(u) + "," +
                                     std::to_string(v) + ") crosses graphs");
        per_graph_edges[static_cast<std::size_t>(gu)].emplace_back(
            local_id[static_cast<std::size_t>(u)], local_id[static_cast<std::size_t>(v)]);
    }

    std::optional<Tensor> features;
    if (fs::exists(dir / "features.csv")) {
        features = read_features(dir / "features.csv");
        if (features->rows() != total_nodes)
            throw std::runtime_error(dir.string() + ": features.csv has " +
                                     std::to_string(features->rows()) + " rows, expected " +
                                     std::to_string(total_nodes));
    }

    GraphCollection coll;
    coll.graph_labels = labels;
    std::int32_t max_label = -1;
    for (std::int32_t l : labels) {
        if (l < 0) throw std::runtime_error(dir.string() + ": negative graph label");
        max_label = std::max(max_label, l);
    }
    coll.num_classes = max_label + 1;

    // Degree one-hot surrogate dimension (shared by all graphs in the set).
    index_t surrogate_dim = 0;
    std::vector<std::vector<index_t>> global_of(static_cast<std::size_t>(num_graphs));
    for (index_t gidx = 0; gidx < num_graphs; ++gidx)
        global_of[static_cast<std::size_t>(gidx)].resize(
            static_cast<std::size_t>(graph_size[static_cast<std::size_t>(gidx)]));
    for (index_t v = 0; v < total_nodes; ++v)
        global_of[static_cast<std::size_t>(indicator[static_cast<std::size_t>(v)])]
                 [static_cast<std::size_t>(local_id[static_cast<std::size_t>(v)])] = v;

    std::vector<Graph> structural(static_cast<std::size_t>(num_graphs));
    index_t max_deg = 0;
    for (index_t gidx = 0; gidx < num_graphs; ++gidx) {
        const index_t n = graph_size[static_cast<std::size_t>(gidx)];
        Graph skeleton = Graph::from_edges(n, per_graph_edges[static_cast<std::size_t>(gidx)],
                                           Tensor(n, 1));
        for (index_t v = 0; v < n; ++v) max_deg = std::max(max_deg, skeleton.degree(v));
        structural[static_cast<std::size_t>(gidx)] = std::move(skeleton);
    }
    if (!features) surrogate_dim = std::min(max_deg, max_degree_onehot) + 1;

    for (index_t gidx = 0; gidx < num_graphs; ++gidx) {
        const Graph& skeleton = structural[static_cast<std::size_t>(gidx)];
        const index_t n = skeleton.num_nodes();
        Tensor feats;
        if (features) {
            feats = Tensor(n, features->cols());
            for (index_t v = 0; v < n; ++v) {
                index_t gv = global_of[static_cast<std::size_t>(gidx)][static_cast<std::size_t>(v)];
                const double* src = features->row(gv);
                std::copy(src, src + features->cols(), feats.row(v));
            }
        } else {
            feats = Tensor(n, surrogate_dim);
            for (index_t v = 0; v < n; ++v)
                feats.at(v, std::min(skeleton.degree(v), max_degree_onehot)) = 1.0;
        }
        coll.graphs.push_back(Graph::from_edges(n, skeleton.undirected_edge_list(),
                                                std::move(feats)));
    }
    return coll;
}

void write_node_dataset(const fs::path& dir, const Graph& g) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "edges.tsv");
        for (auto [u, v] : g.undirected_edge_list()) out << u << "\t" << v << "\n";
    }
    {
        std::ofstream out(dir / "features.csv");
        out.precision(17);
        for (index_t i = 0; i < g.num_nodes(); ++i) {
            const double* row = g.features().row(i);
            for (index_t j = 0; j < g.feature_dim(); ++j) {
                if (j) out << ",";
                out << row[j];
            }
            out << "\n";
        }
    }
    {
        std::ofstream out(dir / "labels.txt");
        for (index_t i = 0; i < g.num_nodes(); ++i)
            out << (g.labels() ? (*g.labels())[static_cast<std::size_t>(i)] : -1) << "\n";
    }
    {
        json j;
        auto ids = [&](const std::vector<std::uint8_t>& mask) {
            std::vector<index_t> v;
            for (index_t i = 0; i < static_cast<index_t>(mask.size()); ++i)
                if (mask[static_cast<std::size_t>(i)]) v.push_back(i);
            return v;
        };
        if (g.splits()) {
            j["train"] = ids(g.splits()->train);
            j["val"] = ids(g.splits()->val);
            j["test"] = ids(g.splits()->test);
        } else {
            j["train"] = json::array();
            j["val"] = json::array();
            j["test"] = json::array();
        }
        std::ofstream out(dir / "splits.json");
        out << j.dump(2) << "\n";
    }
}

void write_graph_dataset(const fs::path& dir, const GraphCollection& coll) {
    fs::create_directories(dir);
    std::ofstream ind(dir / "graph_indicator.txt");
    std::ofstream edges(dir / "edges.tsv");
    std::ofstream labels(dir / "graph_labels.txt");
    std::ofstream feats(dir / "features.csv");
    feats.precision(17);
    index_t base = 0;
    for (std::size_t gidx = 0; gidx < coll.graphs.size(); ++gidx) {
        const Graph& g = coll.graphs[gidx];
        labels << coll.graph_labels[gidx] << "\n";
        for (index_t v = 0; v < g.num_nodes(); ++v) {
            ind << gidx << "\n";
            const double* row = g.features().row(v);
            for (index_t j = 0; j < g.feature_dim(); ++j) {
                if (j) feats << ",";
                feats << row[j];
            }
            feats << "\n";
        }
        for (auto [u, v] : g.undirected_edge_list())
            edges << (base + u) << "\t" << (base + v) << "\n";
        base += g.num_nodes();
    }
}

}  // namespace amgae
