#pragma once

#include "amgae/config.hpp"
#include "amgae/graph.hpp"
#include "amgae/metrics.hpp"
#include "amgae/optim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace amgae {

struct MetricResult {
    std::string name;
    Summary summary;
    std::vector<double> raw;  // one value per seed repetition or fold
};

struct EvalReport {
    std::string task;
    std::vector<MetricResult> metrics;
    std::uint64_t config_hash = 0;
    double wall_seconds = 0.0;
};

// Frozen-encoder protocols. Each embeds with the run's SamplerConfig, trains
// a logistic probe on the embeddings, and reports mean +- std over
// cfg.eval_seeds repetitions (folds for the graph task). None of them mutate
// the encoder parameters.

// One subgraph per node for every node; probe selected by validation
// accuracy; test accuracy reported.
EvalReport eval_node_classification(const ParamStore& gen, const RunConfig& cfg, const Graph& g);

// Seeded 85/5/10 edge split, 1:1 negatives, seed-edge-excluded subgraphs on
// the training graph; pairs scored by the probe's positive-class probability;
// AUC and AP reported. cfg.probe_epochs == 0 gives the untrained-probe null
// baseline.
EvalReport eval_link_prediction(const ParamStore& gen, const RunConfig& cfg, const Graph& g);

// Whole graphs as their own subgraphs; stratified cfg.folds-fold
// cross-validation; fold accuracies reported.
EvalReport eval_graph_classification(const ParamStore& gen, const RunConfig& cfg,
                                     const GraphCollection& coll);

std::string report_json(const EvalReport& report);
// Long-form per-repetition values: metric,rep,value.
std::string report_csv(const EvalReport& report);

}  // namespace amgae
