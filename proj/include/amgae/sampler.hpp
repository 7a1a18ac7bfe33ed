#pragma once

#include "amgae/graph.hpp"
#include "amgae/rng.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace amgae {

struct SamplerConfig {
    double restart_prob = 0.5;  // p in [0,1)
    index_t target_size = 16;   // nodes to collect per walk
    index_t max_steps = 0;      // loop guard; 0 -> 100 * target_size
    index_t seed_count = 256;   // seeds per epoch (node) / seed edges (edge); 0 -> all

    index_t effective_max_steps() const {
        return max_steps > 0 ? max_steps : 100 * target_size;
    }
    void validate() const;
};

struct RwrResult {
    std::vector<index_t> nodes;  // seed first, then discovery order
    bool truncated = false;      // step guard hit before reaching target_size
};

// Random walk with restart: append the current node if unseen, then restart to
// the seed with probability p or hop to a uniform random neighbor, until
// target_size distinct nodes are collected or the step guard trips.
RwrResult rwr_sample(const Graph& g, index_t v, const SamplerConfig& cfg, RngStream& rng);

struct SampledSubgraph {
    Graph graph;
    std::vector<index_t> global_nodes;  // original ids of the subgraph's rows
    Provenance provenance;
    std::optional<std::int32_t> label;
};

// Subgraph induced on the RWR node set of v; seed at row 0; label = label(v).
SampledSubgraph node_subgraph(const Graph& g, index_t v, const SamplerConfig& cfg,
                              RngStream& rng);

// Subgraph on the union of two endpoint walks (ceil/floor split of
// target_size), seed nodes at rows 0 and 1. The seed edge (u,v) itself is
// excluded from the induced edge set; exists_label records whether (u,v) is a
// real edge. Works for negative pairs too.
SampledSubgraph edge_subgraph(const Graph& g, index_t u, index_t v, std::int32_t exists_label,
                              const SamplerConfig& cfg, RngStream& rng);

// n distinct uniform node ids. Errors when n < 1 or n > num_nodes.
std::vector<index_t> sample_seed_nodes(const Graph& g, index_t n, RngStream& rng);

using EdgeSet = std::set<std::pair<index_t, index_t>>;  // normalized u < v

// m distinct non-edges, excluding `exclude`; rejection sampling with a draw
// cap. Errors when the demand cannot be met.
std::vector<std::pair<index_t, index_t>> sample_negative_edges(const Graph& g, index_t m,
                                                               RngStream& rng,
                                                               const EdgeSet& exclude = {});

// On-disk cache of edge-subgraph node sets, keyed by (dataset hash, cfg hash).
struct CachedEdgeSubgraph {
    index_t u = 0;
    index_t v = 0;
    std::int32_t label = 0;
    bool truncated = false;
    std::vector<index_t> nodes;
};

void write_edge_subgraph_cache(const std::filesystem::path& path, std::uint64_t dataset_hash,
                               std::uint64_t cfg_hash,
                               const std::vector<CachedEdgeSubgraph>& entries);

// Returns nullopt when the file is absent or keyed differently; throws on
// corruption.
std::optional<std::vector<CachedEdgeSubgraph>> load_edge_subgraph_cache(
    const std::filesystem::path& path, std::uint64_t dataset_hash, std::uint64_t cfg_hash);

// Rebuilds the induced subgraph for a cached entry (same construction as
// edge_subgraph, minus the walks).
SampledSubgraph materialize_edge_subgraph(const Graph& g, const CachedEdgeSubgraph& entry);

}  // namespace amgae
