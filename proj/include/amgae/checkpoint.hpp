#pragma once

#include "amgae/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace amgae {

// On-disk training snapshot: parameter values plus Adam moments for both
// stores, the epoch counter, and the master rng position, checksummed.
struct Checkpoint {
    std::uint64_t config_hash = 0;
    std::int64_t epoch = 0;
    std::uint64_t rng_state = 0;
    ParamStore gen;
    ParamStore disc;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace amgae
