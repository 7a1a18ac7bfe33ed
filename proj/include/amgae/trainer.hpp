#pragma once

#include "amgae/checkpoint.hpp"
#include "amgae/config.hpp"
#include "amgae/graph.hpp"
#include "amgae/optim.hpp"
#include "amgae/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace amgae {

struct StepMetrics {
    double l_rec = 0.0;  // reconstruction (SCE)
    double l_gen = 0.0;  // adversarial generator term
    double l_g = 0.0;    // combined generator objective
    double l_d = 0.0;    // discriminator BCE
    std::int64_t disc_updates = 0;
};

struct EpochRecord {
    std::int64_t epoch = 0;
    double l_rec = 0.0;
    double l_gen = 0.0;
    double l_g = 0.0;
    double l_d = 0.0;
    std::int64_t disc_updates = 0;  // discriminator optimizer steps this epoch
    std::optional<double> val_rec;  // held-out reconstruction loss, when evaluated
};

struct TrainState {
    ParamStore gen;
    ParamStore disc;
    std::int64_t epoch = 0;  // next epoch to run
    std::vector<EpochRecord> history;
};

// One training step on one batch: mask, reconstruct, update the generator
// (discriminator frozen), then update the discriminator disc_steps_per_gen
// times on the post-update reconstruction, treated as constant.
// cfg.model.d_f must already be resolved against the dataset.
StepMetrics train_step(TrainState& state, const RunConfig& cfg, const SubgraphBatch& batch,
                       RngStream& mask_rng);

struct FitResult {
    TrainState state;     // final parameters and full history
    ParamStore best_gen;  // snapshot at the best held-out reconstruction loss
    ParamStore best_disc;
    std::int64_t best_epoch = -1;
};

// Invoked after each epoch lands in the history (progress reporting).
using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs the full loop for the config's task. Node tasks resample seed nodes
// every epoch; edge tasks train on cached subgraphs of the training-split
// edges (val/test positives removed); graph tasks shuffle whole graphs.
// Deterministic given master_seed. `resume` continues from a checkpoint.
FitResult fit(const RunConfig& cfg, const Graph& g, const Checkpoint* resume = nullptr,
              const EpochCallback& on_epoch = {});
FitResult fit(const RunConfig& cfg, const GraphCollection& coll,
              const Checkpoint* resume = nullptr, const EpochCallback& on_epoch = {});

}  // namespace amgae
