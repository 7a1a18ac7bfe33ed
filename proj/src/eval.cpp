#include "amgae/eval.hpp"

#include "amgae/edge_split.hpp"
#include "amgae/model.hpp"
#include "amgae/probe.hpp"
#include "amgae/sampler.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace amgae {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ModelConfig resolved_model(const RunConfig& cfg, index_t d_f) {
    ModelConfig mc = cfg.model;
    mc.d_f = d_f;
    return mc;
}

void check_encoder_width(const ParamStore& gen, index_t d_f) {
    const index_t expected = gen.value("enc.l0.W").rows();
    if (expected != d_f)
        throw std::invalid_argument("encoder expects feature width " + std::to_string(expected) +
                                    " but the dataset has " + std::to_string(d_f));
}

// Embeds `count` items in batch_size chunks; make_item is called for indices
// 0..count-1 in order (walk streams advance with it). One pooled row each.
Tensor embed_all(const ParamStore& gen, const ModelConfig& mc, index_t count, index_t batch_size,
                 const std::function<BatchItem(index_t)>& make_item) {
    Tensor z(count, mc.d_h);
    for (index_t lo = 0; lo < count; lo += batch_size) {
        const index_t hi = std::min<index_t>(lo + batch_size, count);
        std::vector<BatchItem> items;
        items.reserve(static_cast<std::size_t>(hi - lo));
        for (index_t i = lo; i < hi; ++i) items.push_back(make_item(i));
        const SubgraphBatch batch = assemble_batch(std::move(items));
        const SparseOp a_hat = normalize_adjacency(batch.union_graph);
        const Tensor rows =
            embed(gen, mc, a_hat, batch.union_graph.features(), batch.boundaries);
        for (index_t r = 0; r < rows.rows(); ++r)
            for (index_t c = 0; c < rows.cols(); ++c) z.at(lo + r, c) = rows.at(r, c);
    }
    return z;
}

Tensor take_rows(const Tensor& z, const std::vector<index_t>& ids) {
    Tensor out(static_cast<index_t>(ids.size()), z.cols());
    for (std::size_t r = 0; r < ids.size(); ++r)
        for (index_t c = 0; c < z.cols(); ++c) out.at(static_cast<index_t>(r), c) = z.at(ids[r], c);
    return out;
}

MetricResult make_metric(std::string name, std::vector<double> raw) {
    MetricResult m;
    m.name = std::move(name);
    m.summary = summarize(raw);
    m.raw = std::move(raw);
    return m;
}

ProbeConfig probe_config(const RunConfig& cfg) {
    ProbeConfig pc;
    pc.epochs = cfg.probe_epochs;
    pc.lr = cfg.probe_lr;
    return pc;
}

}  // namespace

EvalReport eval_node_classification(const ParamStore& gen, const RunConfig& cfg, const Graph& g) {
    const auto t0 = Clock::now();
    if (!g.labels() || !g.splits())
        throw std::invalid_argument("node evaluation needs labels and train/val/test splits");
    check_encoder_width(gen, g.feature_dim());
    const ModelConfig mc = resolved_model(cfg, g.feature_dim());
    const auto& labels = *g.labels();
    const auto& splits = *g.splits();
    const index_t n = g.num_nodes();
    const index_t num_classes = g.num_label_classes();

    std::vector<index_t> train_ids, val_ids, test_ids;
    for (index_t v = 0; v < n; ++v) {
        if (labels[static_cast<std::size_t>(v)] < 0) continue;  // unlabeled
        if (splits.train[static_cast<std::size_t>(v)]) train_ids.push_back(v);
        if (splits.val[static_cast<std::size_t>(v)]) val_ids.push_back(v);
        if (splits.test[static_cast<std::size_t>(v)]) test_ids.push_back(v);
    }
    if (train_ids.empty() || val_ids.empty() || test_ids.empty())
        throw std::invalid_argument("node evaluation needs non-empty train/val/test splits");

    auto labels_of = [&labels](const std::vector<index_t>& ids) {
        std::vector<std::int32_t> out;
        out.reserve(ids.size());
        for (index_t v : ids) out.push_back(labels[static_cast<std::size_t>(v)]);
        return out;
    };
    const std::vector<std::int32_t> y_train = labels_of(train_ids);
    const std::vector<std::int32_t> y_val = labels_of(val_ids);
    const std::vector<std::int32_t> y_test = labels_of(test_ids);

    const RngStream master(cfg.master_seed);
    std::vector<double> accs;
    for (index_t rep = 0; rep < cfg.eval_seeds; ++rep) {
        RngStream walk = master.split("eval-sample", static_cast<std::uint64_t>(rep));
        const Tensor z = embed_all(gen, mc, n, cfg.batch_size, [&](index_t v) {
            SampledSubgraph s = node_subgraph(g, v, cfg.sampler, walk);
            return BatchItem{std::move(s.graph), s.provenance, s.label};
        });

        const Tensor x_train = take_rows(z, train_ids);
        const Tensor x_val = take_rows(z, val_ids);
        const Tensor x_test = take_rows(z, test_ids);

        Probe probe;
        RngStream probe_rng = master.split("eval-probe", static_cast<std::uint64_t>(rep));
        probe.fit(x_train, y_train, num_classes, probe_config(cfg), probe_rng, &x_val, &y_val);
        accs.push_back(accuracy(probe.predict(x_test), y_test));
    }

    EvalReport report;
    report.task = "node";
    report.metrics.push_back(make_metric("accuracy", std::move(accs)));
    report.config_hash = config_hash(cfg);
    report.wall_seconds = seconds_since(t0);
    return report;
}

EvalReport eval_link_prediction(const ParamStore& gen, const RunConfig& cfg, const Graph& g) {
    const auto t0 = Clock::now();
    check_encoder_width(gen, g.feature_dim());
    const ModelConfig mc = resolved_model(cfg, g.feature_dim());

    const EdgeSplit es = split_edges(g, cfg.edge_split_seed);
    const Graph tg = training_graph(g, es);  // aborts on leakage

    const auto n_train = static_cast<index_t>(es.train_pos.size());
    const auto n_val = static_cast<index_t>(es.val_pos.size());
    const auto n_test = static_cast<index_t>(es.test_pos.size());
    if (n_val == 0 || n_test == 0)
        throw std::invalid_argument("link evaluation needs non-empty val/test edge splits");

    struct Pair {
        index_t u, v;
        std::int32_t label;
    };
    const RngStream master(cfg.master_seed);
    std::vector<double> aucs, aps;
    for (index_t rep = 0; rep < cfg.eval_seeds; ++rep) {
        // one draw for all negatives keeps them globally distinct; real edges
        // are excluded by definition of a non-edge of g
        RngStream neg_rng = master.split("eval-neg", static_cast<std::uint64_t>(rep));
        const auto negs =
            sample_negative_edges(g, n_train + n_val + n_test, neg_rng);

        auto build = [&](const std::vector<std::pair<index_t, index_t>>& pos, index_t neg_lo,
                         index_t neg_count) {
            std::vector<Pair> out;
            out.reserve(pos.size() + static_cast<std::size_t>(neg_count));
            for (const auto& [u, v] : pos) out.push_back(Pair{u, v, 1});
            for (index_t i = 0; i < neg_count; ++i) {
                const auto& [u, v] = negs[static_cast<std::size_t>(neg_lo + i)];
                out.push_back(Pair{u, v, 0});
            }
            return out;
        };
        const std::vector<Pair> train_pairs = build(es.train_pos, 0, n_train);
        const std::vector<Pair> val_pairs = build(es.val_pos, n_train, n_val);
        const std::vector<Pair> test_pairs = build(es.test_pos, n_train + n_val, n_test);

        RngStream walk = master.split("eval-sample", static_cast<std::uint64_t>(rep));
        auto embed_pairs = [&](const std::vector<Pair>& pairs) {
            return embed_all(gen, mc, static_cast<index_t>(pairs.size()), cfg.batch_size,
                             [&](index_t i) {
                                 const Pair& p = pairs[static_cast<std::size_t>(i)];
                                 SampledSubgraph s =
                                     edge_subgraph(tg, p.u, p.v, p.label, cfg.sampler, walk);
                                 return BatchItem{std::move(s.graph), s.provenance, s.label};
                             });
        };
        const Tensor x_train = embed_pairs(train_pairs);
        const Tensor x_val = embed_pairs(val_pairs);
        const Tensor x_test = embed_pairs(test_pairs);

        auto labels_of = [](const std::vector<Pair>& pairs) {
            std::vector<std::int32_t> out;
            out.reserve(pairs.size());
            for (const Pair& p : pairs) out.push_back(p.label);
            return out;
        };
        const std::vector<std::int32_t> y_train = labels_of(train_pairs);
        const std::vector<std::int32_t> y_val = labels_of(val_pairs);
        const std::vector<std::int32_t> y_test = labels_of(test_pairs);

        Probe probe;
        RngStream probe_rng = master.split("eval-probe", static_cast<std::uint64_t>(rep));
        probe.fit(x_train, y_train, 2, probe_config(cfg), probe_rng, &x_val, &y_val);

        const Tensor proba = probe.predict_proba(x_test);
        std::vector<double> scores(static_cast<std::size_t>(proba.rows()));
        for (index_t i = 0; i < proba.rows(); ++i)
            scores[static_cast<std::size_t>(i)] = proba.at(i, 1);
        aucs.push_back(auc(scores, y_test));
        aps.push_back(average_precision(scores, y_test));
    }

    EvalReport report;
    report.task = "edge";
    report.metrics.push_back(make_metric("auc", std::move(aucs)));
    report.metrics.push_back(make_metric("ap", std::move(aps)));
    report.config_hash = config_hash(cfg);
    report.wall_seconds = seconds_since(t0);
    return report;
}

EvalReport eval_graph_classification(const ParamStore& gen, const RunConfig& cfg,
                                     const GraphCollection& coll) {
    const auto t0 = Clock::now();
    if (coll.graphs.empty()) throw std::invalid_argument("graph evaluation needs graphs");
    if (coll.graph_labels.size() != coll.graphs.size())
        throw std::invalid_argument("graph evaluation needs one label per graph");
    check_encoder_width(gen, coll.graphs.front().feature_dim());
    const ModelConfig mc = resolved_model(cfg, coll.graphs.front().feature_dim());
    const auto total = static_cast<index_t>(coll.graphs.size());
    if (cfg.folds > total)
        throw std::invalid_argument("more folds than graphs (" + std::to_string(cfg.folds) +
                                    " > " + std::to_string(total) + ")");

    // whole graphs, no sampling: embeddings are computed once
    const Tensor z = embed_all(gen, mc, total, cfg.batch_size, [&](index_t i) {
        Provenance prov;
        prov.kind = Provenance::Kind::whole_graph;
        prov.source_graph = i;
        return BatchItem{coll.graphs[static_cast<std::size_t>(i)], prov,
                         coll.graph_labels[static_cast<std::size_t>(i)]};
    });

    const index_t num_classes = coll.num_classes;
    if (num_classes < 2) throw std::invalid_argument("graph evaluation needs >= 2 classes");

    // stratified fold assignment: deal each class's shuffled members across a
    // shared fold cursor, so folds stay class-balanced and evenly sized
    const RngStream master(cfg.master_seed);
    std::vector<index_t> fold_of(static_cast<std::size_t>(total), 0);
    {
        RngStream fold_rng = master.split("eval-folds");
        index_t cursor = 0;
        for (std::int32_t c = 0; c < static_cast<std::int32_t>(num_classes); ++c) {
            std::vector<index_t> members;
            for (index_t i = 0; i < total; ++i)
                if (coll.graph_labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
            fold_rng.shuffle(members);
            for (index_t id : members) fold_of[static_cast<std::size_t>(id)] = cursor++ % cfg.folds;
        }
    }

    std::vector<double> accs;
    for (index_t f = 0; f < cfg.folds; ++f) {
        std::vector<index_t> train_ids, test_ids;
        for (index_t i = 0; i < total; ++i)
            (fold_of[static_cast<std::size_t>(i)] == f ? test_ids : train_ids).push_back(i);
        if (test_ids.empty() || train_ids.empty())
            throw std::logic_error("stratified folding produced an empty fold");

        auto labels_of = [&](const std::vector<index_t>& ids) {
            std::vector<std::int32_t> out;
            out.reserve(ids.size());
            for (index_t i : ids) out.push_back(coll.graph_labels[static_cast<std::size_t>(i)]);
            return out;
        };
        Probe probe;
        RngStream probe_rng = master.split("eval-probe", static_cast<std::uint64_t>(f));
        probe.fit(take_rows(z, train_ids), labels_of(train_ids), num_classes, probe_config(cfg),
                  probe_rng);
        accs.push_back(accuracy(probe.predict(take_rows(z, test_ids)), labels_of(test_ids)));
    }

    EvalReport report;
    report.task = "graph";
    report.metrics.push_back(make_metric("accuracy", std::move(accs)));
    report.config_hash = config_hash(cfg);
    report.wall_seconds = seconds_since(t0);
    return report;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["task"] = report.task;
    j["config_hash"] = std::to_string(report.config_hash);
    nlohmann::ordered_json metrics;
    for (const MetricResult& m : report.metrics) {
        nlohmann::ordered_json entry;
        entry["mean"] = m.summary.mean;
        entry["std"] = m.summary.stddev;
        entry["raw"] = m.raw;
        metrics[m.name] = entry;
    }
    j["metrics"] = metrics;
    j["wall_seconds"] = report.wall_seconds;
    return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& report) {
    std::string out = "metric,rep,value\n";
    char buf[64];
    for (const MetricResult& m : report.metrics)
        for (std::size_t i = 0; i < m.raw.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.raw[i]);
            out += m.name + "," + std::to_string(i) + "," + buf + "\n";
        }
    return out;
}

}  // namespace amgae
