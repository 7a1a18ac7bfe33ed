#pragma once

#include "amgae/model.hpp"
#include "amgae/objective.hpp"
#include "amgae/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace amgae {

enum class Task { node, edge, graph };

std::string task_name(Task t);

// Flat experiment configuration. Every field maps to one `key = value` line;
// unknown keys are rejected with file:line diagnostics. model.d_f is derived
// from the dataset at load time and is deliberately not a key.
struct RunConfig {
    Task task = Task::node;
    std::string dataset;
    std::string out_dir;
    std::uint64_t master_seed = 1;
    index_t epochs = 100;
    index_t batch_size = 64;
    index_t disc_steps_per_gen = 1;

    SamplerConfig sampler;
    ModelConfig model;
    LossConfig loss;

    double lr_gen = 1e-3;
    double lr_disc = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    index_t eval_seeds = 5;
    index_t probe_epochs = 100;
    double probe_lr = 1e-2;
    index_t val_every = 10;  // best-checkpoint cadence; 0 disables
    std::uint64_t edge_split_seed = 7;
    index_t folds = 10;
    index_t max_degree_onehot = 400;

    void validate() const;
};

// Parses `key = value` lines (# comments, blank lines allowed), then applies
// overrides of the same form. `origin` names the source in diagnostics.
RunConfig parse_run_config_text(const std::string& text, const std::string& origin,
                                const std::vector<std::string>& overrides = {});
RunConfig parse_run_config(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides = {});

// Canonical echo: fixed key order, round-trip exact values. Feeding the
// output back reproduces the config byte-identically.
std::string serialize_run_config(const RunConfig& cfg);

std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace amgae
