#include "amgae/edge_split.hpp"

#include "amgae/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace amgae {

EdgeSplit split_edges(const Graph& g, std::uint64_t seed, double val_frac, double test_frac) {
    if (val_frac < 0.0 || test_frac < 0.0 || val_frac + test_frac >= 1.0)
        throw std::invalid_argument("split_edges: fractions must be >= 0 and sum below 1");
    auto edges = g.undirected_edge_list();
    if (edges.empty()) throw std::invalid_argument("split_edges: graph has no edges");

    RngStream rng = RngStream(seed).split("edge-split");
    rng.shuffle(edges);

    const auto e = static_cast<double>(edges.size());
    const auto n_test = static_cast<std::size_t>(std::floor(e * test_frac));
    const auto n_val = static_cast<std::size_t>(std::floor(e * val_frac));

    EdgeSplit split;
    split.test_pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.val_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test),
                         edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    split.train_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val),
                           edges.end());
    if (split.train_pos.empty())
        throw std::invalid_argument("split_edges: no training edges left");
    return split;
}

Graph training_graph(const Graph& g, const EdgeSplit& split) {
    Graph tg = Graph::from_edges(g.num_nodes(), split.train_pos, g.features(), g.labels(),
                                 g.splits());
    for (const auto& held_out : {split.val_pos, split.test_pos})
        for (auto [u, v] : held_out)
            if (tg.has_edge(u, v))
                throw std::runtime_error("edge split leakage: held-out edge " +
                                         std::to_string(u) + "-" + std::to_string(v) +
                                         " survives in the training graph");
    return tg;
}

}  // namespace amgae
