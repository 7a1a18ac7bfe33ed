#include "amgae/eval.hpp"

#include "amgae/config.hpp"
#include "amgae/model.hpp"
#include "amgae/rng.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

using namespace amgae;

namespace {

using Edge = std::pair<index_t, index_t>;

template <typename E, typename F>
bool throws_containing(F&& fn, const char* needle) {
    try {
        fn();
    } catch (const E& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    } catch (...) {
        return false;
    }
    return false;
}

bool same_tensor(const Tensor& a, const Tensor& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

bool same_store(const ParamStore& a, const ParamStore& b) {
    if (a.slots().size() != b.slots().size() || a.step_count() != b.step_count()) return false;
    for (std::size_t i = 0; i < a.slots().size(); ++i) {
        const GradSlot& x = a.slots()[i];
        const GradSlot& y = b.slots()[i];
        if (x.name != y.name || !same_tensor(x.value, y.value) || !same_tensor(x.grad, y.grad) ||
            !same_tensor(x.adam_m, y.adam_m) || !same_tensor(x.adam_v, y.adam_v))
            return false;
    }
    return true;
}

RunConfig eval_config(index_t d_f) {
    RunConfig cfg;
    cfg.dataset = "synthetic";
    cfg.master_seed = 11;
    cfg.batch_size = 16;
    cfg.sampler.target_size = 6;
    cfg.sampler.restart_prob = 0.3;
    cfg.model.d_f = d_f;
    cfg.model.d_h = 8;
    cfg.model.enc_layers = 2;
    cfg.model.dec_layers = 1;
    cfg.model.disc_layers = 1;
    cfg.eval_seeds = 2;
    cfg.probe_epochs = 200;
    cfg.probe_lr = 0.5;
    return cfg;
}

ParamStore make_encoder(const RunConfig& cfg, std::uint64_t seed = 5) {
    RngStream init = RngStream(seed).split("init-gen");
    return init_generator(cfg.model, init);
}

// Two disconnected 20-node rings with class-constant features: every subgraph
// of a class-0 node sees only class-0 rows, so even a random encoder yields
// linearly separable embeddings.
Graph two_ring_graph() {
    const index_t n = 40;
    const index_t d_f = 6;
    std::vector<Edge> edges;
    for (index_t v = 0; v < 20; ++v) edges.emplace_back(v, (v + 1) % 20);
    for (index_t v = 0; v < 20; ++v) edges.emplace_back(20 + v, 20 + (v + 1) % 20);
    Tensor x(n, d_f);
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (index_t v = 0; v < n; ++v) {
        const bool second = v >= 20;
        x.at(v, second ? 1 : 0) = 5.0;
        x.at(v, 2) = second ? -1.0 : 1.0;
        labels[static_cast<std::size_t>(v)] = second ? 1 : 0;
    }
    SplitMasks sm;
    sm.train.assign(static_cast<std::size_t>(n), 0);
    sm.val.assign(static_cast<std::size_t>(n), 0);
    sm.test.assign(static_cast<std::size_t>(n), 0);
    for (index_t base : {index_t{0}, index_t{20}}) {
        for (index_t i = 0; i < 8; ++i) sm.train[static_cast<std::size_t>(base + i)] = 1;
        for (index_t i = 8; i < 12; ++i) sm.val[static_cast<std::size_t>(base + i)] = 1;
        for (index_t i = 12; i < 20; ++i) sm.test[static_cast<std::size_t>(base + i)] = 1;
    }
    return Graph::from_edges(n, edges, std::move(x), std::move(labels), std::move(sm));
}

// Connected graph with enough edges for a non-degenerate 85/5/10 edge split.
Graph link_graph() {
    const index_t n = 30;
    const index_t d_f = 5;
    RngStream rng(31);
    std::vector<Edge> edges;
    for (index_t v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    for (int k = 0; k < 25; ++k) {
        const auto u = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto v = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (u != v) edges.emplace_back(u, v);
    }
    Tensor x(n, d_f);
    for (index_t v = 0; v < n; ++v)
        for (index_t c = 0; c < d_f; ++c) x.at(v, c) = rng.next_double() - 0.5;
    return Graph::from_edges(n, edges, std::move(x));
}

// Ten whole graphs, two structurally and featurally distinct kinds.
GraphCollection two_kind_collection() {
    const index_t d_f = 4;
    GraphCollection coll;
    for (int k = 0; k < 10; ++k) {
        const bool second = k % 2 == 1;
        const index_t n = second ? 5 : 3;
        std::vector<Edge> edges;
        for (index_t v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
        if (!second) edges.emplace_back(index_t{0}, index_t{2});  // triangle
        Tensor x(n, d_f);
        for (index_t v = 0; v < n; ++v) x.at(v, second ? 1 : 0) = 3.0;
        coll.graphs.push_back(Graph::from_edges(n, edges, std::move(x)));
        coll.graph_labels.push_back(second ? 1 : 0);
    }
    coll.num_classes = 2;
    return coll;
}

}  // namespace

TEST_CASE("node eval separates class-pure communities perfectly") {
    const Graph g = two_ring_graph();
    const RunConfig cfg = eval_config(g.feature_dim());
    const ParamStore gen = make_encoder(cfg);

    const EvalReport rep = eval_node_classification(gen, cfg, g);
    CHECK(rep.task == "node");
    REQUIRE(rep.metrics.size() == 1);
    CHECK(rep.metrics[0].name == "accuracy");
    REQUIRE(rep.metrics[0].raw.size() == static_cast<std::size_t>(cfg.eval_seeds));
    for (double v : rep.metrics[0].raw) CHECK(v == 1.0);
    CHECK(rep.metrics[0].summary.mean == 1.0);
    CHECK(rep.metrics[0].summary.stddev == 0.0);
    CHECK(rep.config_hash == config_hash(cfg));
    CHECK(rep.wall_seconds >= 0.0);
}

TEST_CASE("node eval is deterministic and never mutates the encoder") {
    const Graph g = two_ring_graph();
    const RunConfig cfg = eval_config(g.feature_dim());
    const ParamStore gen = make_encoder(cfg);
    const ParamStore before = gen;

    const EvalReport a = eval_node_classification(gen, cfg, g);
    CHECK(same_store(gen, before));
    const EvalReport b = eval_node_classification(gen, cfg, g);

    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t m = 0; m < a.metrics.size(); ++m) {
        CHECK(a.metrics[m].name == b.metrics[m].name);
        CHECK(a.metrics[m].summary.mean == b.metrics[m].summary.mean);
        CHECK(a.metrics[m].summary.stddev == b.metrics[m].summary.stddev);
        REQUIRE(a.metrics[m].raw == b.metrics[m].raw);
    }

    // a different master seed draws different walks
    RunConfig other = cfg;
    other.master_seed = 12;
    const EvalReport c = eval_node_classification(gen, other, g);
    CHECK(c.config_hash != a.config_hash);
}

TEST_CASE("node eval validates its inputs") {
    const RunConfig cfg = eval_config(6);
    const ParamStore gen = make_encoder(cfg);

    SUBCASE("labels and splits are required") {
        std::vector<Edge> edges{{0, 1}, {1, 2}};
        const Graph bare = Graph::from_edges(3, edges, Tensor(3, 6));
        CHECK(throws_containing<std::invalid_argument>(
            [&] { (void)eval_node_classification(gen, cfg, bare); }, "splits"));
    }
    SUBCASE("feature width must match the encoder") {
        std::vector<Edge> edges;
        Tensor x(40, 4);
        std::vector<std::int32_t> labels(40, 0);
        for (index_t v = 0; v + 1 < 40; ++v) edges.emplace_back(v, v + 1);
        SplitMasks sm;
        sm.train.assign(40, 1);
        sm.val.assign(40, 1);
        sm.test.assign(40, 1);
        const Graph narrow =
            Graph::from_edges(40, edges, std::move(x), std::move(labels), std::move(sm));
        CHECK(throws_containing<std::invalid_argument>(
            [&] { (void)eval_node_classification(gen, cfg, narrow); }, "width 6"));
    }
}

TEST_CASE("link eval reports auc and ap over the requested repetitions") {
    const Graph g = link_graph();
    const RunConfig cfg = eval_config(g.feature_dim());
    const ParamStore gen = make_encoder(cfg, 21);
    const ParamStore before = gen;

    const EvalReport rep = eval_link_prediction(gen, cfg, g);
    CHECK(same_store(gen, before));
    CHECK(rep.task == "edge");
    REQUIRE(rep.metrics.size() == 2);
    CHECK(rep.metrics[0].name == "auc");
    CHECK(rep.metrics[1].name == "ap");
    for (const MetricResult& m : rep.metrics) {
        REQUIRE(m.raw.size() == static_cast<std::size_t>(cfg.eval_seeds));
        for (double v : m.raw) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(std::isfinite(m.summary.mean));
        CHECK(std::isfinite(m.summary.stddev));
    }

    const EvalReport again = eval_link_prediction(gen, cfg, g);
    CHECK(again.metrics[0].raw == rep.metrics[0].raw);
    CHECK(again.metrics[1].raw == rep.metrics[1].raw);
}

TEST_CASE("link eval with probe_epochs 0 runs the untrained null path") {
    const Graph g = link_graph();
    RunConfig cfg = eval_config(g.feature_dim());
    cfg.probe_epochs = 0;
    const ParamStore gen = make_encoder(cfg, 21);

    const EvalReport rep = eval_link_prediction(gen, cfg, g);
    for (const MetricResult& m : rep.metrics)
        for (double v : m.raw) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("graph eval runs stratified folds and separates distinct kinds") {
    const GraphCollection coll = two_kind_collection();
    const RunConfig cfg = eval_config(coll.graphs.front().feature_dim());
    const ParamStore gen = make_encoder(cfg, 9);
    const ParamStore before = gen;

    const EvalReport rep = eval_graph_classification(gen, cfg, coll);
    CHECK(same_store(gen, before));
    CHECK(rep.task == "graph");
    REQUIRE(rep.metrics.size() == 1);
    CHECK(rep.metrics[0].name == "accuracy");
    REQUIRE(rep.metrics[0].raw.size() == static_cast<std::size_t>(cfg.folds));
    for (double v : rep.metrics[0].raw) CHECK(v == 1.0);
    CHECK(rep.metrics[0].summary.mean == 1.0);

    const EvalReport again = eval_graph_classification(gen, cfg, coll);
    CHECK(again.metrics[0].raw == rep.metrics[0].raw);
}

TEST_CASE("graph eval validates folds against the collection size") {
    const GraphCollection coll = two_kind_collection();
    RunConfig cfg = eval_config(coll.graphs.front().feature_dim());
    cfg.folds = 12;
    const ParamStore gen = make_encoder(cfg, 9);
    CHECK(throws_containing<std::invalid_argument>(
        [&] { (void)eval_graph_classification(gen, cfg, coll); }, "folds"));

    CHECK(throws_containing<std::invalid_argument>(
        [&] {
            const GraphCollection empty;
            (void)eval_graph_classification(gen, eval_config(4), empty);
        },
        "graphs"));
}

TEST_CASE("report serialization carries the full metric table") {
    EvalReport rep;
    rep.task = "node";
    rep.config_hash = 0xFFFFFFFFFFFFFFFFULL;  // beyond double precision
    rep.wall_seconds = 1.5;
    MetricResult m;
    m.name = "accuracy";
    m.raw = {0.8, 0.9};
    m.summary = summarize(m.raw);
    rep.metrics.push_back(m);

    SUBCASE("json") {
        const auto j = nlohmann::json::parse(report_json(rep));
        CHECK(j.at("task") == "node");
        CHECK(j.at("config_hash") == "18446744073709551615");
        CHECK(j.at("wall_seconds") == 1.5);
        const auto& acc = j.at("metrics").at("accuracy");
        CHECK(acc.at("mean").get<double>() == doctest::Approx(0.85));
        CHECK(acc.at("std").get<double>() == doctest::Approx(0.05));
        REQUIRE(acc.at("raw").size() == 2);
        CHECK(acc.at("raw")[0] == 0.8);
        CHECK(acc.at("raw")[1] == 0.9);
    }
    SUBCASE("csv") {
        CHECK(report_csv(rep) == "metric,rep,value\naccuracy,0,0.80000000000000004\n"
                                 "accuracy,1,0.90000000000000002\n");
    }
}
