#include "amgae/graph.hpp"

#include "amgae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace amgae {

Graph Graph::from_edges(index_t num_nodes, const std::vector<std::pair<index_t, index_t>>& edges,
                        Tensor features, std::optional<std::vector<std::int32_t>> labels,
                        std::optional<SplitMasks> splits) {
    if (features.rows() != num_nodes)
        throw std::runtime_error("Graph: feature row count " + std::to_string(features.rows()) +
                                 " != num_nodes " + std::to_string(num_nodes));
    if (labels && static_cast<index_t>(labels->size()) != num_nodes)
        throw std::runtime_error("Graph: label count mismatch");
    if (splits) {
        for (const auto* m : {&splits->train, &splits->val, &splits->test})
            if (static_cast<index_t>(m->size()) != num_nodes)
                throw std::runtime_error("Graph: split mask length mismatch");
    }

    std::vector<std::vector<index_t>> adj(static_cast<std::size_t>(num_nodes));
    for (const auto& [u, v] : edges) {
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
            throw std::runtime_error("Graph: node index out of range in edge (" +
                                     std::to_string(u) + "," + std::to_string(v) + ")");
        if (u == v) continue;  // self-loops dropped
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& nbrs : adj) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }

    Graph g;
    g.num_nodes_ = num_nodes;
    g.csr_offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (index_t i = 0; i < num_nodes; ++i)
        g.csr_offsets_[static_cast<std::size_t>(i) + 1] =
            g.csr_offsets_[static_cast<std::size_t>(i)] +
            static_cast<index_t>(adj[static_cast<std::size_t>(i)].size());
    g.csr_targets_.reserve(static_cast<std::size_t>(g.csr_offsets_.back()));
    for (const auto& nbrs : adj) g.csr_targets_.insert(g.csr_targets_.end(), nbrs.begin(), nbrs.end());
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.splits_ = std::move(splits);
    return g;
}

bool Graph::has_edge(index_t u, index_t v) const {
    auto nbrs = neighbors(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<std::pair<index_t, index_t>> Graph::undirected_edge_list() const {
    std::vector<std::pair<index_t, index_t>> out;
    out.reserve(static_cast<std::size_t>(num_edges()));
    for (index_t u = 0; u < num_nodes_; ++u)
        for (index_t v : neighbors(u))
            if (u < v) out.emplace_back(u, v);
    return out;
}

index_t Graph::num_label_classes() const {
    if (!labels_) return 0;
    std::int32_t mx = -1;
    for (std::int32_t l : *labels_) mx = std::max(mx, l);
    return static_cast<index_t>(mx) + 1;
}

Graph induced_subgraph(const Graph& g, const std::vector<index_t>& nodes) {
    const index_t n = static_cast<index_t>(nodes.size());
    std::unordered_map<index_t, index_t> to_local;
    to_local.reserve(nodes.size());
    for (index_t i = 0; i < n; ++i) {
        index_t u = nodes[static_cast<std::size_t>(i)];
        if (u < 0 || u >= g.num_nodes())
            throw std::runtime_error("induced_subgraph: node " + std::to_string(u) +
                                     " out of range");
        if (!to_local.emplace(u, i).second)
            throw std::runtime_error("induced_subgraph: duplicate node " + std::to_string(u));
    }

    std::vector<std::pair<index_t, index_t>> edges;
    for (index_t i = 0; i < n; ++i) {
        for (index_t nb : g.neighbors(nodes[static_cast<std::size_t>(i)])) {
            auto it = to_local.find(nb);
            if (it != to_local.end() && i < it->second) edges.emplace_back(i, it->second);
        }
    }

    Tensor feats(n, g.feature_dim());
    for (index_t i = 0; i < n; ++i) {
        const double* src = g.features().row(nodes[static_cast<std::size_t>(i)]);
        std::copy(src, src + g.feature_dim(), feats.row(i));
    }

    std::optional<std::vector<std::int32_t>> labels;
    if (g.labels()) {
        labels.emplace(static_cast<std::size_t>(n));
        for (index_t i = 0; i < n; ++i)
            (*labels)[static_cast<std::size_t>(i)] =
                (*g.labels())[static_cast<std::size_t>(nodes[static_cast<std::size_t>(i)])];
    }
    return Graph::from_edges(n, edges, std::move(feats), std::move(labels));
}

SubgraphBatch assemble_batch(std::vector<BatchItem> items) {
    if (items.empty()) throw std::runtime_error("assemble_batch: empty list");
    const index_t d = items.front().graph.feature_dim();
    index_t total_nodes = 0;
    bool any_label = false;
    for (const auto& it : items) {
        if (it.graph.feature_dim() != d)
            throw std::runtime_error("assemble_batch: feature width mismatch (" +
                                     std::to_string(it.graph.feature_dim()) + " vs " +
                                     std::to_string(d) + ")");
        total_nodes += it.graph.num_nodes();
        any_label = any_label || it.label.has_value();
    }

    SubgraphBatch batch;
    batch.boundaries.reserve(items.size() + 1);
    batch.boundaries.push_back(0);

    std::vector<std::pair<index_t, index_t>> edges;
    Tensor feats(total_nodes, d);
    index_t base = 0;
    for (const auto& it : items) {
        const Graph& sg = it.graph;
        for (auto [u, v] : sg.undirected_edge_list()) edges.emplace_back(base + u, base + v);
        for (index_t i = 0; i < sg.num_nodes(); ++i) {
            const double* src = sg.features().row(i);
            std::copy(src, src + d, feats.row(base + i));
        }
        base += sg.num_nodes();
        batch.boundaries.push_back(base);
        batch.provenance.push_back(it.provenance);
    }

    batch.union_graph = Graph::from_edges(total_nodes, edges, std::move(feats));
    if (any_label) {
        batch.sub_labels.emplace();
        for (const auto& it : items) batch.sub_labels->push_back(it.label.value_or(-1));
    }
    return batch;
}

SparseOp normalize_adjacency(const Graph& g) {
    const index_t n = g.num_nodes();
    SparseOp op;
    op.n = n;
    op.offsets.assign(static_cast<std::size_t>(n) + 1, 0);

    std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i)
        inv_sqrt_deg[static_cast<std::size_t>(i)] =
            1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));

    for (index_t i = 0; i < n; ++i)
        op.offsets[static_cast<std::size_t>(i) + 1] =
            op.offsets[static_cast<std::size_t>(i)] + g.degree(i) + 1;  // +1 self-loop
    op.targets.reserve(static_cast<std::size_t>(op.offsets.back()));
    op.values.reserve(static_cast<std::size_t>(op.offsets.back()));

    for (index_t i = 0; i < n; ++i) {
        auto nbrs = g.neighbors(i);
        auto push = [&](index_t j) {
            op.targets.push_back(j);
            op.values.push_back(inv_sqrt_deg[static_cast<std::size_t>(i)] *
                                inv_sqrt_deg[static_cast<std::size_t>(j)]);
        };
        // keep targets sorted while inserting the diagonal entry
        std::size_t k = 0;
        for (; k < nbrs.size() && nbrs[k] < i; ++k) push(nbrs[k]);
        push(i);
        for (; k < nbrs.size(); ++k) push(nbrs[k]);
    }
    return op;
}

std::uint64_t graph_hash(const Graph& g) {
    std::uint64_t h = fnv1a("graph");
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(g.num_nodes()));
    for (index_t u = 0; u < g.num_nodes(); ++u)
        for (index_t v : g.neighbors(u)) mix(static_cast<std::uint64_t>(v));
    const Tensor& x = g.features();
    mix(static_cast<std::uint64_t>(x.cols()));
    for (index_t i = 0; i < x.size(); ++i) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(double));
        std::memcpy(&bits, &x.data()[i], sizeof(bits));
        mix(bits);
    }
    return h;
}

}  // namespace amgae
