#include "amgae/convert.hpp"

#include "amgae/dataset.hpp"
#include "amgae/rng.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace fs = std::filesystem;

namespace amgae {

namespace {

std::ifstream open_or_throw(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("missing input file: " + p.string());
    return in;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string f;
    while (row >> f) fields.push_back(std::move(f));
    return fields;
}

// "12, 34" / "12 34" / "12,34" -> two integers
std::pair<long long, long long> parse_pair(const std::string& line, const fs::path& p,
                                           std::size_t lineno) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream row(cleaned);
    long long a, b;
    if (!(row >> a >> b))
        throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                 ": expected two integers");
    return {a, b};
}

std::vector<long long> read_ll_column(const fs::path& p) {
    std::ifstream in = open_or_throw(p);
    std::vector<long long> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        long long v;
        if (!(row >> v))
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": expected an integer");
        out.push_back(v);
    }
    return out;
}

}  // namespace

SplitMasks make_stratified_splits(const std::vector<std::int32_t>& labels,
                                  index_t train_per_class, index_t val_count,
                                  index_t test_count, std::uint64_t seed) {
    const index_t n = static_cast<index_t>(labels.size());
    std::vector<index_t> labeled;
    for (index_t i = 0; i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] >= 0) labeled.push_back(i);

    RngStream rng(seed);
    rng.shuffle(labeled);

    SplitMasks masks;
    masks.train.assign(static_cast<std::size_t>(n), 0);
    masks.val.assign(static_cast<std::size_t>(n), 0);
    masks.test.assign(static_cast<std::size_t>(n), 0);

    std::map<std::int32_t, index_t> taken;
    std::vector<index_t> rest;
    for (index_t v : labeled) {
        std::int32_t c = labels[static_cast<std::size_t>(v)];
        if (taken[c] < train_per_class) {
            masks.train[static_cast<std::size_t>(v)] = 1;
            ++taken[c];
        } else {
            rest.push_back(v);
        }
    }
    if (static_cast<index_t>(rest.size()) < val_count + test_count)
        throw std::runtime_error("not enough labeled nodes for requested val/test sizes");
    for (index_t i = 0; i < val_count; ++i)
        masks.val[static_cast<std::size_t>(rest[static_cast<std::size_t>(i)])] = 1;
    for (index_t i = 0; i < test_count; ++i)
        masks.test[static_cast<std::size_t>(rest[static_cast<std::size_t>(val_count + i)])] = 1;
    return masks;
}

ContentCitesStats convert_content_cites(const fs::path& content_file, const fs::path& cites_file,
                                        const fs::path& out_dir, index_t train_per_class,
                                        index_t val_count, index_t test_count,
                                        std::uint64_t split_seed) {
    std::ifstream content = open_or_throw(content_file);
    std::string line;
    std::size_t lineno = 0;

    std::unordered_map<std::string, index_t> node_of;
    std::vector<std::vector<double>> feature_rows;
    std::vector<std::string> class_names;
    std::map<std::string, std::int32_t> class_id;  // assigned after full read, sorted
    std::vector<std::string> node_class;

    index_t d_f = -1;
    while (std::getline(content, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_fields(line);
        if (fields.size() < 3)
            throw std::runtime_error(content_file.string() + ":" + std::to_string(lineno) +
                                     ": expected id, features, class");
        const index_t width = static_cast<index_t>(fields.size()) - 2;
        if (d_f < 0) d_f = width;
        else if (width != d_f)
            throw std::runtime_error(content_file.string() + ":" + std::to_string(lineno) +
                                     ": inconsistent feature width");
        if (!node_of.emplace(fields.front(), static_cast<index_t>(feature_rows.size())).second)
            throw std::runtime_error(content_file.string() + ":" + std::to_string(lineno) +
                                     ": duplicate paper id " + fields.front());
        std::vector<double> row(static_cast<std::size_t>(d_f));
        for (index_t j = 0; j < d_f; ++j) {
            const std::string& f = fields[static_cast<std::size_t>(j) + 1];
            auto [next, ec] = std::from_chars(f.data(), f.data() + f.size(), row[static_cast<std::size_t>(j)]);
            if (ec != std::errc{} || next != f.data() + f.size())
                throw std::runtime_error(content_file.string() + ":" + std::to_string(lineno) +
                                         ": bad feature value " + f);
        }
        feature_rows.push_back(std::move(row));
        node_class.push_back(fields.back());
        class_id.emplace(fields.back(), 0);
    }
    const index_t n = static_cast<index_t>(feature_rows.size());
    if (n == 0) throw std::runtime_error("empty content file: " + content_file.string());

    std::int32_t next_class = 0;
    for (auto& [name, id] : class_id) {
        id = next_class++;
        class_names.push_back(name);
    }
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] = class_id.at(node_class[static_cast<std::size_t>(i)]);

    Tensor features(n, d_f);
    for (index_t i = 0; i < n; ++i)
        std::copy(feature_rows[static_cast<std::size_t>(i)].begin(),
                  feature_rows[static_cast<std::size_t>(i)].end(), features.row(i));

    ContentCitesStats stats;
    std::vector<std::pair<index_t, index_t>> edges;
    {
        std::ifstream cites = open_or_throw(cites_file);
        lineno = 0;
        while (std::getline(cites, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto fields = split_fields(line);
            if (fields.size() != 2)
                throw std::runtime_error(cites_file.string() + ":" + std::to_string(lineno) +
                                         ": expected two paper ids");
            auto a = node_of.find(fields[0]);
            auto b = node_of.find(fields[1]);
            if (a == node_of.end() || b == node_of.end()) {
                ++stats.dangling_citations;  // citation to a paper outside .content
                continue;
            }
            edges.emplace_back(a->second, b->second);
        }
    }

    SplitMasks splits =
        make_stratified_splits(labels, train_per_class, val_count, test_count, split_seed);
    Graph g = Graph::from_edges(n, edges, std::move(features), std::move(labels),
                                std::move(splits));
    write_node_dataset(out_dir, g);

    stats.num_nodes = g.num_nodes();
    stats.num_edges = g.num_edges();
    stats.feature_dim = g.feature_dim();
    stats.num_classes = g.num_label_classes();
    return stats;
}

TuStats convert_tu(const fs::path& input_dir, const std::string& name, const fs::path& out_dir) {
    const fs::path base = input_dir / name;
    auto indicator_raw = read_ll_column(fs::path(base.string() + "_graph_indicator.txt"));
    auto labels_raw = read_ll_column(fs::path(base.string() + "_graph_labels.txt"));
    const index_t total_nodes = static_cast<index_t>(indicator_raw.size());
    if (total_nodes == 0) throw std::runtime_error("empty graph indicator for " + name);

    // TU files are 1-based; remap graph labels to dense 0-based ids by sorted value.
    std::map<long long, std::int32_t> label_map;
    for (long long l : labels_raw) label_map.emplace(l, 0);
    std::int32_t next_label = 0;
    for (auto& [raw, id] : label_map) id = next_label++;

    const index_t num_graphs = static_cast<index_t>(labels_raw.size());
    std::vector<std::int32_t> indicator(static_cast<std::size_t>(total_nodes));
    for (index_t v = 0; v < total_nodes; ++v) {
        long long gid = indicator_raw[static_cast<std::size_t>(v)] - 1;
        if (gid < 0 || gid >= num_graphs)
            throw std::runtime_error(name + ": graph indicator value out of range");
        indicator[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(gid);
    }

    std::vector<std::pair<index_t, index_t>> edges;
    {
        const fs::path p = fs::path(base.string() + "_A.txt");
        std::ifstream in = open_or_throw(p);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto [u, v] = parse_pair(line, p, lineno);
            if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
                throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                         ": node id out of range");
            edges.emplace_back(static_cast<index_t>(u - 1), static_cast<index_t>(v - 1));
        }
    }

    // Feature source precedence: continuous attributes, then one-hot node labels.
    std::optional<Tensor> features;
    const fs::path attr_path = fs::path(base.string() + "_node_attributes.txt");
    const fs::path nlab_path = fs::path(base.string() + "_node_labels.txt");
    if (fs::exists(attr_path)) {
        std::ifstream in = open_or_throw(attr_path);
        std::vector<double> data;
        std::string line;
        std::size_t lineno = 0;
        index_t cols = -1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double v;
            index_t c = 0;
            while (row >> v) {
                data.push_back(v);
                ++c;
            }
            if (cols < 0) cols = c;
            else if (c != cols)
                throw std::runtime_error(attr_path.string() + ":" + std::to_string(lineno) +
                                         ": inconsistent attribute width");
        }
        features = Tensor(static_cast<index_t>(data.size()) / cols, cols, std::move(data));
        if (features->rows() != total_nodes)
            throw std::runtime_error(attr_path.string() + ": attribute row count mismatch");
    } else if (fs::exists(nlab_path)) {
        auto node_labels = read_ll_column(nlab_path);
        if (static_cast<index_t>(node_labels.size()) != total_nodes)
            throw std::runtime_error(nlab_path.string() + ": node label count mismatch");
        std::map<long long, index_t> nl_map;
        for (long long l : node_labels) nl_map.emplace(l, 0);
        index_t next_nl = 0;
        for (auto& [raw, id] : nl_map) id = next_nl++;
        features = Tensor(total_nodes, next_nl);
        for (index_t v = 0; v < total_nodes; ++v)
            features->at(v, nl_map.at(node_labels[static_cast<std::size_t>(v)])) = 1.0;
    }

    // Build per-graph structures through the shared loader path: write the
    // canonical files, then reload to validate.
    fs::create_directories(out_dir);
    {
        std::ofstream ind(out_dir / "graph_indicator.txt");
        for (std::int32_t g : indicator) ind << g << "\n";
        std::ofstream lab(out_dir / "graph_labels.txt");
        for (long long l : labels_raw) lab << label_map.at(l) << "\n";
        std::ofstream e(out_dir / "edges.tsv");
        for (auto [u, v] : edges) e << u << "\t" << v << "\n";
        if (features) {
            std::ofstream f(out_dir / "features.csv");
            f.precision(17);
            for (index_t i = 0; i < features->rows(); ++i) {
                const double* row = features->row(i);
                for (index_t j = 0; j < features->cols(); ++j) {
                    if (j) f << ",";
                    f << row[j];
                }
                f << "\n";
            }
        }
    }

    GraphCollection coll = load_graph_dataset(out_dir);
    TuStats stats;
    stats.num_graphs = static_cast<index_t>(coll.graphs.size());
    stats.num_classes = coll.num_classes;
    stats.has_features = features.has_value();
    for (const Graph& g : coll.graphs) {
        stats.total_nodes += g.num_nodes();
        stats.total_edges += g.num_edges();
    }
    stats.avg_nodes = static_cast<double>(stats.total_nodes) /
                      static_cast<double>(stats.num_graphs);
    return stats;
}

}  // namespace amgae
