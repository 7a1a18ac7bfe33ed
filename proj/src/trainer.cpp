#include "amgae/trainer.hpp"

#include "amgae/edge_split.hpp"
#include "amgae/model.hpp"
#include "amgae/objective.hpp"
#include "amgae/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace amgae {

namespace {

std::vector<index_t> sce_scope_rows(const LossConfig& loss, const std::vector<index_t>& masked,
                                    index_t n) {
    if (!loss.sce_all_nodes) return masked;
    std::vector<index_t> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), index_t{0});
    return all;
}

// Forward-only reconstruction loss on a fixed batch; the validation proxy that
// selects the best checkpoint.
double batch_rec_loss(const ParamStore& gen, const RunConfig& cfg, const SubgraphBatch& batch,
                      RngStream& mask_rng) {
    const Tensor& x = batch.union_graph.features();
    SparseOp a_hat = normalize_adjacency(batch.union_graph);
    MaskResult mr = mask_nodes(x, cfg.model.mask_ratio, gen.value("mask_token"), mask_rng);
    Tensor h = encode(gen, cfg.model, a_hat, mr.x_tilde);
    Tensor xbar = decode(gen, cfg.model, a_hat, h, mr.masked);
    return sce_loss(x, xbar, sce_scope_rows(cfg.loss, mr.masked, x.rows()), cfg.loss.gamma).loss;
}

// One epoch's worth of batches, materialized lazily in index order so only one
// union graph is alive at a time.
struct EpochBatches {
    index_t count = 0;
    std::function<SubgraphBatch(index_t)> make;
};

using EpochFn = std::function<EpochBatches(std::int64_t)>;

index_t batch_count(index_t items, index_t batch_size) {
    return (items + batch_size - 1) / batch_size;
}

FitResult run_fit(const RunConfig& cfg, const EpochFn& epoch_batches,
                  std::vector<SubgraphBatch> val_batches, const Checkpoint* resume,
                  const EpochCallback& on_epoch) {
    const RngStream master(cfg.master_seed);

    TrainState st;
    if (resume != nullptr) {
        if (resume->epoch < 0 || resume->epoch > cfg.epochs)
            throw std::runtime_error("resume epoch " + std::to_string(resume->epoch) +
                                     " is outside [0, " + std::to_string(cfg.epochs) + "]");
        st.gen = resume->gen;
        st.disc = resume->disc;
        st.epoch = resume->epoch;
    } else {
        RngStream gen_rng = master.split("init-gen");
        RngStream disc_rng = master.split("init-disc");
        st.gen = init_generator(cfg.model, gen_rng);
        st.disc = init_discriminator(cfg.model, disc_rng);
    }

    FitResult out;
    double best_val = std::numeric_limits<double>::infinity();

    for (std::int64_t e = st.epoch; e < cfg.epochs; ++e) {
        RngStream mask_rng = master.split("mask", static_cast<std::uint64_t>(e));
        EpochBatches eb = epoch_batches(e);
        if (eb.count <= 0)
            throw std::runtime_error("epoch " + std::to_string(e) + " produced no batches");

        StepMetrics sums;
        for (index_t b = 0; b < eb.count; ++b) {
            StepMetrics m;
            try {
                SubgraphBatch batch = eb.make(b);
                m = train_step(st, cfg, batch, mask_rng);
            } catch (const std::exception& ex) {
                throw std::runtime_error("epoch " + std::to_string(e) + ", batch " +
                                         std::to_string(b) + ": " + ex.what());
            }
            sums.l_rec += m.l_rec;
            sums.l_gen += m.l_gen;
            sums.l_g += m.l_g;
            sums.l_d += m.l_d;
            sums.disc_updates += m.disc_updates;
        }

        const double nb = static_cast<double>(eb.count);
        EpochRecord rec;
        rec.epoch = e;
        rec.l_rec = sums.l_rec / nb;
        rec.l_gen = sums.l_gen / nb;
        rec.l_g = sums.l_g / nb;
        rec.l_d = sums.l_d / nb;
        rec.disc_updates = sums.disc_updates;

        if (!val_batches.empty() && cfg.val_every > 0 && (e + 1) % cfg.val_every == 0) {
            // Recreate the mask stream every evaluation so the held-out loss is
            // measured on identical corruptions and stays comparable over time.
            RngStream val_mask = master.split("val-mask");
            double sum = 0.0;
            for (const SubgraphBatch& vb : val_batches)
                sum += batch_rec_loss(st.gen, cfg, vb, val_mask);
            const double v = sum / static_cast<double>(val_batches.size());
            rec.val_rec = v;
            if (v < best_val) {
                best_val = v;
                out.best_gen = st.gen;
                out.best_disc = st.disc;
                out.best_epoch = e;
            }
        }

        st.history.push_back(rec);
        st.epoch = e + 1;
        if (on_epoch) on_epoch(st.history.back());
    }

    if (out.best_epoch < 0) {  // validation never ran: final parameters stand in
        out.best_gen = st.gen;
        out.best_disc = st.disc;
        out.best_epoch = st.epoch - 1;
    }
    out.state = std::move(st);
    return out;
}

std::vector<SubgraphBatch> assemble_in_chunks(std::vector<BatchItem> items, index_t batch_size) {
    std::vector<SubgraphBatch> out;
    const index_t n = static_cast<index_t>(items.size());
    for (index_t lo = 0; lo < n; lo += batch_size) {
        const index_t hi = std::min<index_t>(lo + batch_size, n);
        std::vector<BatchItem> chunk(std::make_move_iterator(items.begin() + lo),
                                     std::make_move_iterator(items.begin() + hi));
        out.push_back(assemble_batch(std::move(chunk)));
    }
    return out;
}

constexpr index_t kValPoolSize = 64;  // held-out subgraphs for the best-checkpoint proxy

FitResult fit_node(const RunConfig& cfg, const Graph& g, const Checkpoint* resume,
                   const EpochCallback& on_epoch) {
    const RngStream master(cfg.master_seed);
    const index_t n = g.num_nodes();
    const index_t per_epoch =
        cfg.sampler.seed_count == 0 ? n : std::min<index_t>(cfg.sampler.seed_count, n);

    std::vector<SubgraphBatch> val_batches;
    if (cfg.val_every > 0) {
        RngStream vs = master.split("val-sample");
        std::vector<index_t> seeds = sample_seed_nodes(g, std::min<index_t>(kValPoolSize, n), vs);
        std::vector<BatchItem> items;
        items.reserve(seeds.size());
        for (index_t v : seeds) {
            SampledSubgraph s = node_subgraph(g, v, cfg.sampler, vs);
            items.push_back(BatchItem{std::move(s.graph), s.provenance, s.label});
        }
        val_batches = assemble_in_chunks(std::move(items), cfg.batch_size);
    }

    EpochFn epoch_fn = [&cfg, &g, master, per_epoch](std::int64_t e) {
        RngStream sample = master.split("sample", static_cast<std::uint64_t>(e));
        auto seeds = std::make_shared<std::vector<index_t>>(sample_seed_nodes(g, per_epoch, sample));
        auto walk_rng = std::make_shared<RngStream>(sample);
        EpochBatches eb;
        eb.count = batch_count(per_epoch, cfg.batch_size);
        eb.make = [&cfg, &g, seeds, walk_rng](index_t b) {
            const index_t lo = b * cfg.batch_size;
            const index_t hi =
                std::min<index_t>(lo + cfg.batch_size, static_cast<index_t>(seeds->size()));
            std::vector<BatchItem> items;
            items.reserve(static_cast<std::size_t>(hi - lo));
            for (index_t i = lo; i < hi; ++i) {
                SampledSubgraph s = node_subgraph(g, (*seeds)[i], cfg.sampler, *walk_rng);
                items.push_back(BatchItem{std::move(s.graph), s.provenance, s.label});
            }
            return assemble_batch(std::move(items));
        };
        return eb;
    };

    return run_fit(cfg, epoch_fn, std::move(val_batches), resume, on_epoch);
}

std::uint64_t edge_cache_cfg_hash(const RunConfig& cfg) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "edge-cache|%.17g|%lld|%lld|%llu|%llu",
                  cfg.sampler.restart_prob, static_cast<long long>(cfg.sampler.target_size),
                  static_cast<long long>(cfg.sampler.max_steps),
                  static_cast<unsigned long long>(cfg.edge_split_seed),
                  static_cast<unsigned long long>(cfg.master_seed));
    return fnv1a(buf);
}

FitResult fit_edge(const RunConfig& cfg, const Graph& g, const Checkpoint* resume,
                   const EpochCallback& on_epoch) {
    const RngStream master(cfg.master_seed);

    const EdgeSplit es = split_edges(g, cfg.edge_split_seed);
    auto tg = std::make_shared<Graph>(training_graph(g, es));

    // Edge subgraphs are sampled once over every training positive and reused
    // across epochs; the sidecar cache makes restarts cheap.
    std::filesystem::path cache_path;
    if (!cfg.out_dir.empty())
        cache_path = std::filesystem::path(cfg.out_dir) / "edge_subgraph_cache.bin";
    const std::uint64_t dataset_hash = graph_hash(g);
    const std::uint64_t cfg_hash = edge_cache_cfg_hash(cfg);

    std::shared_ptr<std::vector<CachedEdgeSubgraph>> entries;
    if (!cache_path.empty()) {
        if (auto cached = load_edge_subgraph_cache(cache_path, dataset_hash, cfg_hash))
            entries = std::make_shared<std::vector<CachedEdgeSubgraph>>(std::move(*cached));
    }
    if (!entries) {
        RngStream walk = master.split("edge-sample");
        auto built = std::make_shared<std::vector<CachedEdgeSubgraph>>();
        built->reserve(es.train_pos.size());
        for (const auto& [u, v] : es.train_pos) {
            SampledSubgraph s = edge_subgraph(*tg, u, v, 1, cfg.sampler, walk);
            built->push_back(
                CachedEdgeSubgraph{u, v, 1, s.provenance.truncated, std::move(s.global_nodes)});
        }
        entries = std::move(built);
        if (!cache_path.empty()) {
            std::filesystem::create_directories(cache_path.parent_path());
            write_edge_subgraph_cache(cache_path, dataset_hash, cfg_hash, *entries);
        }
    }

    const index_t total = static_cast<index_t>(entries->size());
    // Per-epoch budget: a shuffled subset of seed_count cached subgraphs, for
    // parity with the node task's per-epoch seed draw.
    const index_t per_epoch =
        cfg.sampler.seed_count == 0 ? total : std::min<index_t>(cfg.sampler.seed_count, total);

    std::vector<SubgraphBatch> val_batches;
    if (cfg.val_every > 0) {
        RngStream vs = master.split("val-sample");
        std::vector<index_t> order(static_cast<std::size_t>(total));
        std::iota(order.begin(), order.end(), index_t{0});
        vs.shuffle(order);
        order.resize(static_cast<std::size_t>(std::min<index_t>(kValPoolSize, total)));
        std::vector<BatchItem> items;
        items.reserve(order.size());
        for (index_t i : order) {
            SampledSubgraph s = materialize_edge_subgraph(*tg, (*entries)[i]);
            items.push_back(BatchItem{std::move(s.graph), s.provenance, s.label});
        }
        val_batches = assemble_in_chunks(std::move(items), cfg.batch_size);
    }

    EpochFn epoch_fn = [&cfg, tg, entries, master, total, per_epoch](std::int64_t e) {
        auto order = std::make_shared<std::vector<index_t>>(static_cast<std::size_t>(total));
        std::iota(order->begin(), order->end(), index_t{0});
        RngStream shuffle_rng = master.split("shuffle", static_cast<std::uint64_t>(e));
        shuffle_rng.shuffle(*order);
        order->resize(static_cast<std::size_t>(per_epoch));
        EpochBatches eb;
        eb.count = batch_count(per_epoch, cfg.batch_size);
        eb.make = [&cfg, tg, entries, order](index_t b) {
            const index_t lo = b * cfg.batch_size;
            const index_t hi =
                std::min<index_t>(lo + cfg.batch_size, static_cast<index_t>(order->size()));
            std::vector<BatchItem> items;
            items.reserve(static_cast<std::size_t>(hi - lo));
            for (index_t i = lo; i < hi; ++i) {
                SampledSubgraph s = materialize_edge_subgraph(*tg, (*entries)[(*order)[i]]);
                items.push_back(BatchItem{std::move(s.graph), s.provenance, s.label});
            }
            return assemble_batch(std::move(items));
        };
        return eb;
    };

    return run_fit(cfg, epoch_fn, std::move(val_batches), resume, on_epoch);
}

FitResult fit_graph(const RunConfig& cfg, const GraphCollection& coll, const Checkpoint* resume,
                    const EpochCallback& on_epoch) {
    const RngStream master(cfg.master_seed);
    const index_t total = static_cast<index_t>(coll.graphs.size());

    auto item_at = [&coll](index_t i) {
        Provenance prov;
        prov.kind = Provenance::Kind::whole_graph;
        prov.source_graph = i;
        return BatchItem{coll.graphs[static_cast<std::size_t>(i)], prov,
                         coll.graph_labels[static_cast<std::size_t>(i)]};
    };

    std::vector<SubgraphBatch> val_batches;
    if (cfg.val_every > 0) {
        RngStream vs = master.split("val-sample");
        std::vector<index_t> order(static_cast<std::size_t>(total));
        std::iota(order.begin(), order.end(), index_t{0});
        vs.shuffle(order);
        order.resize(static_cast<std::size_t>(std::min<index_t>(kValPoolSize, total)));
        std::vector<BatchItem> items;
        items.reserve(order.size());
        for (index_t i : order) items.push_back(item_at(i));
        val_batches = assemble_in_chunks(std::move(items), cfg.batch_size);
    }

    EpochFn epoch_fn = [&cfg, item_at, master, total](std::int64_t e) {
        auto order = std::make_shared<std::vector<index_t>>(static_cast<std::size_t>(total));
        std::iota(order->begin(), order->end(), index_t{0});
        RngStream shuffle_rng = master.split("shuffle", static_cast<std::uint64_t>(e));
        shuffle_rng.shuffle(*order);
        EpochBatches eb;
        eb.count = batch_count(total, cfg.batch_size);
        eb.make = [&cfg, item_at, order](index_t b) {
            const index_t lo = b * cfg.batch_size;
            const index_t hi =
                std::min<index_t>(lo + cfg.batch_size, static_cast<index_t>(order->size()));
            std::vector<BatchItem> items;
            items.reserve(static_cast<std::size_t>(hi - lo));
            for (index_t i = lo; i < hi; ++i) items.push_back(item_at((*order)[i]));
            return assemble_batch(std::move(items));
        };
        return eb;
    };

    return run_fit(cfg, epoch_fn, std::move(val_batches), resume, on_epoch);
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::runtime_error(std::string(what) + " is not finite");
}

}  // namespace

StepMetrics train_step(TrainState& state, const RunConfig& cfg, const SubgraphBatch& batch,
                       RngStream& mask_rng) {
    if (batch.batch_size() <= 0) throw std::invalid_argument("train_step: empty batch");
    const ModelConfig& mc = cfg.model;
    const LossConfig& lc = cfg.loss;
    const Tensor& x = batch.union_graph.features();
    const SparseOp a_hat = normalize_adjacency(batch.union_graph);

    ParamStore& gen = state.gen;
    ParamStore& disc = state.disc;
    StepMetrics out;

    // --- generator pass (discriminator frozen) ---
    gen.zero_grads();
    MaskResult mr = mask_nodes(x, mc.mask_ratio, gen.value("mask_token"), mask_rng);
    StackCache enc_cache, dec_cache;
    Tensor h = encode(gen, mc, a_hat, mr.x_tilde, &enc_cache);
    Tensor xbar = decode(gen, mc, a_hat, h, mr.masked, &dec_cache);

    SceResult rec = sce_loss(x, xbar, sce_scope_rows(lc, mr.masked, x.rows()), lc.gamma);
    out.l_rec = rec.loss;
    require_finite(out.l_rec, "reconstruction loss");

    Tensor grad_xbar = lc.use_rec ? std::move(rec.grad_xbar) : Tensor(x.rows(), x.cols());

    {
        DiscCache fake_cache;
        Tensor p_fake = discriminate(disc, mc, a_hat, xbar, batch.boundaries, &fake_cache);
        AdvLossResult adv = gen_adv_loss(p_fake);
        out.l_gen = adv.loss;
        if (lc.alpha > 0.0) {
            Tensor up(p_fake.rows(), 1);
            for (index_t i = 0; i < p_fake.rows(); ++i)
                up.at(i, 0) = lc.alpha * adv.grad_fake.at(i, 0);
            discriminate_backward(disc, mc, a_hat, batch.boundaries, fake_cache, up,
                                  /*accumulate_param_grads=*/false, &grad_xbar);
        }
    }
    out.l_g = gen_total_loss(lc.use_rec ? out.l_rec : 0.0, out.l_gen, lc.alpha);
    require_finite(out.l_g, "generator loss");

    Tensor grad_h(h.rows(), h.cols());
    decode_backward(gen, mc, a_hat, mr.masked, dec_cache, grad_xbar,
                    /*accumulate_param_grads=*/true, &grad_h);
    Tensor grad_x_tilde(x.rows(), x.cols());
    encode_backward(gen, mc, a_hat, enc_cache, grad_h, /*accumulate_param_grads=*/true,
                    &grad_x_tilde);
    mask_backward(gen, mr.masked, grad_x_tilde);
    adam_step(gen, AdamConfig{cfg.lr_gen, cfg.beta1, cfg.beta2, cfg.eps});

    // --- discriminator pass on the post-update reconstruction, held constant ---
    Tensor x_tilde2 = mr.x_tilde;
    const Tensor& token = gen.value("mask_token");
    for (index_t i : mr.masked)
        for (index_t j = 0; j < x_tilde2.cols(); ++j) x_tilde2.at(i, j) = token.at(0, j);
    Tensor h2 = encode(gen, mc, a_hat, x_tilde2);
    Tensor xbar2 = decode(gen, mc, a_hat, h2, mr.masked);

    if (cfg.disc_steps_per_gen == 0) {
        // No update requested; still measure the discriminator's loss.
        Tensor p_real = discriminate(disc, mc, a_hat, x, batch.boundaries);
        Tensor p_fake = discriminate(disc, mc, a_hat, xbar2, batch.boundaries);
        out.l_d = disc_loss(p_real, p_fake).loss;
        require_finite(out.l_d, "discriminator loss");
        return out;
    }

    for (index_t s = 0; s < cfg.disc_steps_per_gen; ++s) {
        disc.zero_grads();
        DiscCache real_cache, fake_cache;
        Tensor p_real = discriminate(disc, mc, a_hat, x, batch.boundaries, &real_cache);
        Tensor p_fake = discriminate(disc, mc, a_hat, xbar2, batch.boundaries, &fake_cache);
        DiscLossResult dl = disc_loss(p_real, p_fake);
        out.l_d = dl.loss;
        require_finite(out.l_d, "discriminator loss");
        discriminate_backward(disc, mc, a_hat, batch.boundaries, real_cache, dl.grad_real,
                              /*accumulate_param_grads=*/true, nullptr);
        discriminate_backward(disc, mc, a_hat, batch.boundaries, fake_cache, dl.grad_fake,
                              /*accumulate_param_grads=*/true, nullptr);
        adam_step(disc, AdamConfig{cfg.lr_disc, cfg.beta1, cfg.beta2, cfg.eps});
        out.disc_updates += 1;
    }
    return out;
}

FitResult fit(const RunConfig& cfg0, const Graph& g, const Checkpoint* resume,
              const EpochCallback& on_epoch) {
    RunConfig cfg = cfg0;
    cfg.model.d_f = g.feature_dim();
    cfg.validate();
    switch (cfg.task) {
        case Task::node:
            return fit_node(cfg, g, resume, on_epoch);
        case Task::edge:
            return fit_edge(cfg, g, resume, on_epoch);
        default:
            throw std::invalid_argument("fit(Graph): task must be node or edge");
    }
}

FitResult fit(const RunConfig& cfg0, const GraphCollection& coll, const Checkpoint* resume,
              const EpochCallback& on_epoch) {
    if (cfg0.task != Task::graph)
        throw std::invalid_argument("fit(GraphCollection): task must be graph");
    if (coll.graphs.empty()) throw std::invalid_argument("fit: empty graph collection");
    RunConfig cfg = cfg0;
    cfg.model.d_f = coll.graphs.front().feature_dim();
    cfg.validate();
    return fit_graph(cfg, coll, resume, on_epoch);
}

}  // namespace amgae
