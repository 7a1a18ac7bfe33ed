#include "amgae/sampler.hpp"

#include "amgae/binio.hpp"

#include <algorithm>
#include <stdexcept>

namespace amgae {

void SamplerConfig::validate() const {
    if (restart_prob < 0.0 || restart_prob >= 1.0)
        throw std::invalid_argument("sampler: restart_prob must lie in [0,1)");
    if (target_size < 1) throw std::invalid_argument("sampler: target_size must be >= 1");
    if (max_steps != 0 && max_steps < target_size)
        throw std::invalid_argument("sampler: max_steps must be >= target_size");
}

namespace {

// One restart walk from v appending `quota` nodes not yet in `seen` to `order`
// (marking them as it goes). Returns true when the step guard tripped first.
bool rwr_walk_collect(const Graph& g, index_t v, double restart_prob, index_t quota,
                      index_t max_steps, RngStream& rng, std::vector<std::uint8_t>& seen,
                      std::vector<index_t>& order) {
    index_t collected = 0;
    index_t u = v;
    for (index_t step = 0; step < max_steps; ++step) {
        if (!seen[static_cast<std::size_t>(u)]) {
            seen[static_cast<std::size_t>(u)] = 1;
            order.push_back(u);
            if (++collected == quota) return false;
        }
        const double r = rng.next_double();
        auto nbrs = g.neighbors(u);
        if (r < restart_prob || nbrs.empty()) {
            u = v;  // restart (dead ends restart too; only isolated seeds hit this)
        } else {
            u = nbrs[rng.next_below(nbrs.size())];
        }
    }
    return collected < quota;
}

}  // namespace

RwrResult rwr_sample(const Graph& g, index_t v, const SamplerConfig& cfg, RngStream& rng) {
    cfg.validate();
    if (v < 0 || v >= g.num_nodes())
        throw std::invalid_argument("rwr_sample: seed node out of range");

    RwrResult result;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.num_nodes()), 0);
    result.truncated = rwr_walk_collect(g, v, cfg.restart_prob, cfg.target_size,
                                        cfg.effective_max_steps(), rng, seen, result.nodes);
    return result;
}

SampledSubgraph node_subgraph(const Graph& g, index_t v, const SamplerConfig& cfg,
                              RngStream& rng) {
    RwrResult walk = rwr_sample(g, v, cfg, rng);
    SampledSubgraph out;
    out.graph = induced_subgraph(g, walk.nodes);
    out.global_nodes = std::move(walk.nodes);
    out.provenance.kind = Provenance::Kind::node;
    out.provenance.seed_u = v;
    out.provenance.truncated = walk.truncated;
    if (g.labels()) out.label = (*g.labels())[static_cast<std::size_t>(v)];
    return out;
}

namespace {

// Seeds forced to rows 0 and 1, everything else in discovery order.
std::vector<index_t> seeds_first(index_t u, index_t v, const std::vector<index_t>& order) {
    std::vector<index_t> nodes{u, v};
    for (index_t node : order)
        if (node != u && node != v) nodes.push_back(node);
    return nodes;
}

// Induce on `nodes` and drop the seed edge (local rows 0-1) if present.
Graph induce_without_seed_edge(const Graph& g, const std::vector<index_t>& nodes) {
    Graph sub = induced_subgraph(g, nodes);
    if (!sub.has_edge(0, 1)) return sub;
    auto edges = sub.undirected_edge_list();
    std::erase_if(edges, [](const std::pair<index_t, index_t>& e) {
        return e.first == 0 && e.second == 1;
    });
    return Graph::from_edges(sub.num_nodes(), edges, sub.features());
}

}  // namespace

SampledSubgraph edge_subgraph(const Graph& g, index_t u, index_t v, std::int32_t exists_label,
                              const SamplerConfig& cfg, RngStream& rng) {
    cfg.validate();
    if (u == v) throw std::invalid_argument("edge_subgraph: endpoints must differ");
    if (u < 0 || u >= g.num_nodes() || v < 0 || v >= g.num_nodes())
        throw std::invalid_argument("edge_subgraph: endpoint out of range");

    // The endpoint walks share one seen-set: the second walk keeps going until
    // it contributes its own quota of fresh nodes, so the union reaches
    // target_size whenever the components allow it.
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.num_nodes()), 0);
    std::vector<index_t> order;
    const index_t limit = cfg.effective_max_steps();
    bool trunc_u = rwr_walk_collect(g, u, cfg.restart_prob, (cfg.target_size + 1) / 2, limit,
                                    rng, seen, order);
    bool trunc_v = rwr_walk_collect(g, v, cfg.restart_prob,
                                    std::max<index_t>(1, cfg.target_size / 2), limit, rng, seen,
                                    order);

    SampledSubgraph out;
    out.global_nodes = seeds_first(u, v, order);
    out.graph = induce_without_seed_edge(g, out.global_nodes);
    out.provenance.kind = Provenance::Kind::edge;
    out.provenance.seed_u = u;
    out.provenance.seed_v = v;
    out.provenance.truncated = trunc_u || trunc_v;
    out.label = exists_label;
    return out;
}

std::vector<index_t> sample_seed_nodes(const Graph& g, index_t n, RngStream& rng) {
    const index_t total = g.num_nodes();
    if (n < 1 || n > total)
        throw std::invalid_argument("sample_seed_nodes: need 1 <= n <= num_nodes, got n=" +
                                    std::to_string(n));
    std::vector<index_t> ids(static_cast<std::size_t>(total));
    for (index_t i = 0; i < total; ++i) ids[static_cast<std::size_t>(i)] = i;
    // partial Fisher-Yates: only the first n positions are needed
    for (index_t i = 0; i < n; ++i) {
        index_t j = i + static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(total - i)));
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(n));
    return ids;
}

std::vector<std::pair<index_t, index_t>> sample_negative_edges(const Graph& g, index_t m,
                                                               RngStream& rng,
                                                               const EdgeSet& exclude) {
    if (m < 1) throw std::invalid_argument("sample_negative_edges: m must be >= 1");
    const index_t n = g.num_nodes();
    if (n < 2) throw std::invalid_argument("sample_negative_edges: graph too small");

    EdgeSet chosen;
    std::vector<std::pair<index_t, index_t>> out;
    const index_t max_draws = 1000 * m + 100000;
    for (index_t draws = 0; draws < max_draws && static_cast<index_t>(out.size()) < m; ++draws) {
        index_t a = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(n)));
        index_t b = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        auto pair = std::minmax(a, b);
        std::pair<index_t, index_t> e{pair.first, pair.second};
        if (g.has_edge(e.first, e.second)) continue;
        if (exclude.count(e) || chosen.count(e)) continue;
        chosen.insert(e);
        out.push_back(e);
    }
    if (static_cast<index_t>(out.size()) < m)
        throw std::runtime_error("sample_negative_edges: could not find " + std::to_string(m) +
                                 " non-edges (graph too dense or exclusions too broad)");
    return out;
}

namespace {
constexpr char kCacheMagic[8] = {'A', 'M', 'G', 'S', 'G', 'C', '0', '1'};
}

void write_edge_subgraph_cache(const std::filesystem::path& path, std::uint64_t dataset_hash,
                               std::uint64_t cfg_hash,
                               const std::vector<CachedEdgeSubgraph>& entries) {
    std::string buf(kCacheMagic, sizeof(kCacheMagic));
    binio::put_u64(buf, dataset_hash);
    binio::put_u64(buf, cfg_hash);
    binio::put_u64(buf, entries.size());
    for (const auto& e : entries) {
        binio::put_i64(buf, e.u);
        binio::put_i64(buf, e.v);
        binio::put_u32(buf, static_cast<std::uint32_t>(e.label));
        binio::put_u8(buf, e.truncated ? 1 : 0);
        binio::put_u64(buf, e.nodes.size());
        for (index_t node : e.nodes) binio::put_i64(buf, node);
    }
    binio::write_file_checksummed(path, std::move(buf));
}

std::optional<std::vector<CachedEdgeSubgraph>> load_edge_subgraph_cache(
    const std::filesystem::path& path, std::uint64_t dataset_hash, std::uint64_t cfg_hash) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::string body = binio::read_file_checksummed(path);
    binio::Reader r(body);
    for (char expect : kCacheMagic)
        if (r.u8() != static_cast<std::uint8_t>(expect))
            throw std::runtime_error("edge-subgraph cache: bad magic: " + path.string());
    if (r.u64() != dataset_hash || r.u64() != cfg_hash) return std::nullopt;  // stale key
    std::vector<CachedEdgeSubgraph> entries(r.u64());
    for (auto& e : entries) {
        e.u = r.i64();
        e.v = r.i64();
        e.label = static_cast<std::int32_t>(r.u32());
        e.truncated = r.u8() != 0;
        e.nodes.resize(r.u64());
        for (auto& node : e.nodes) node = r.i64();
    }
    return entries;
}

SampledSubgraph materialize_edge_subgraph(const Graph& g, const CachedEdgeSubgraph& entry) {
    SampledSubgraph out;
    out.graph = induce_without_seed_edge(g, entry.nodes);
    out.global_nodes = entry.nodes;
    out.provenance.kind = Provenance::Kind::edge;
    out.provenance.seed_u = entry.u;
    out.provenance.seed_v = entry.v;
    out.provenance.truncated = entry.truncated;
    out.label = entry.label;
    return out;
}

}  // namespace amgae
