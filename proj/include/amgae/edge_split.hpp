#pragma once

#include "amgae/graph.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace amgae {

// Seeded undirected-edge split for link prediction (default 85/5/10). The
// split is a pure function of (graph, seed); training happens on the graph
// with val/test positives removed.
struct EdgeSplit {
    std::vector<std::pair<index_t, index_t>> train_pos;
    std::vector<std::pair<index_t, index_t>> val_pos;
    std::vector<std::pair<index_t, index_t>> test_pos;
};

EdgeSplit split_edges(const Graph& g, std::uint64_t seed, double val_frac = 0.05,
                      double test_frac = 0.10);

// The graph restricted to training positives (features/labels/splits kept).
// Throws if any held-out positive survives the removal (leakage guard).
Graph training_graph(const Graph& g, const EdgeSplit& split);

}  // namespace amgae
