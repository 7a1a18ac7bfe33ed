#pragma once

#include "amgae/sparse.hpp"
#include "amgae/tensor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace amgae {

struct SplitMasks {
    std::vector<std::uint8_t> train;
    std::vector<std::uint8_t> val;
    std::vector<std::uint8_t> test;
};

// Immutable undirected graph: symmetric CSR adjacency (no self-loops, no
// duplicate entries, neighbor lists sorted ascending) plus dense node features.
class Graph {
public:
    Graph() = default;

    // Symmetrizes, deduplicates and drops self-loops; edge list may be directed
    // or contain duplicates. Feature row count must equal num_nodes.
    static Graph from_edges(index_t num_nodes,
                            const std::vector<std::pair<index_t, index_t>>& edges,
                            Tensor features,
                            std::optional<std::vector<std::int32_t>> labels = std::nullopt,
                            std::optional<SplitMasks> splits = std::nullopt);

    index_t num_nodes() const { return num_nodes_; }
    // Undirected edge count (each edge stored twice in CSR).
    index_t num_edges() const { return static_cast<index_t>(csr_targets_.size()) / 2; }
    index_t feature_dim() const { return features_.cols(); }

    const std::vector<index_t>& csr_offsets() const { return csr_offsets_; }
    const std::vector<index_t>& csr_targets() const { return csr_targets_; }
    const Tensor& features() const { return features_; }
    const std::optional<std::vector<std::int32_t>>& labels() const { return labels_; }
    const std::optional<SplitMasks>& splits() const { return splits_; }

    std::span<const index_t> neighbors(index_t u) const {
        return {csr_targets_.data() + csr_offsets_[u],
                static_cast<std::size_t>(csr_offsets_[u + 1] - csr_offsets_[u])};
    }
    index_t degree(index_t u) const { return csr_offsets_[u + 1] - csr_offsets_[u]; }
    bool has_edge(index_t u, index_t v) const;

    // Directed pair list (u < v only).
    std::vector<std::pair<index_t, index_t>> undirected_edge_list() const;

    index_t num_label_classes() const;

private:
    index_t num_nodes_ = 0;
    std::vector<index_t> csr_offsets_{0};
    std::vector<index_t> csr_targets_;
    Tensor features_;
    std::optional<std::vector<std::int32_t>> labels_;
    std::optional<SplitMasks> splits_;
};

struct GraphCollection {
    std::vector<Graph> graphs;
    std::vector<std::int32_t> graph_labels;
    index_t num_classes = 0;
};

// Where a subgraph came from.
struct Provenance {
    enum class Kind { node, edge, whole_graph };
    Kind kind = Kind::whole_graph;
    index_t seed_u = -1;       // node tasks: the seed node; edge tasks: endpoint u
    index_t seed_v = -1;       // edge tasks: endpoint v
    index_t source_graph = 0;  // graph tasks: index into the collection
    bool truncated = false;    // RWR hit its step guard before filling the target size
};

// Block-diagonal disjoint union of subgraphs; boundaries[b]..boundaries[b+1]
// is the node range of subgraph b.
struct SubgraphBatch {
    Graph union_graph;
    std::vector<index_t> boundaries;  // length B+1
    std::optional<std::vector<std::int32_t>> sub_labels;
    std::vector<Provenance> provenance;

    index_t batch_size() const { return static_cast<index_t>(boundaries.size()) - 1; }
};

// Subgraph induced on `nodes` (order preserved; feature rows copied in that
// order). Throws on duplicate or out-of-range indices.
Graph induced_subgraph(const Graph& g, const std::vector<index_t>& nodes);

struct BatchItem {
    Graph graph;
    Provenance provenance;
    std::optional<std::int32_t> label;
};

SubgraphBatch assemble_batch(std::vector<BatchItem> items);

// A_hat = D~^{-1/2} (A + I) D~^{-1/2} with D~ the degree of A + I.
SparseOp normalize_adjacency(const Graph& g);

// Stable content hash over structure and features (cache keys).
std::uint64_t graph_hash(const Graph& g);

}  // namespace amgae
