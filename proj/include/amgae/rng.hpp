#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace amgae {

// Deterministic counter-style PRNG (splitmix64). The full generator state is a
// single u64, which makes checkpointing the stream position trivial and keeps
// draw sequences identical across platforms and standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 mantissa bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Derives an independent child stream from a stable label. Children with
    // distinct (label, index) pairs never share draw sequences with the parent.
    RngStream split(std::string_view label, std::uint64_t index = 0) const;

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_;
};

// FNV-1a, used for labeled stream splitting and config hashing.
std::uint64_t fnv1a(std::string_view text, std::uint64_t seed = 0xCBF29CE484222325ULL);

inline RngStream RngStream::split(std::string_view label, std::uint64_t index) const {
    std::uint64_t h = fnv1a(label);
    // mix parent state, label hash and index through one splitmix round each
    RngStream child(state_ ^ (h + 0x9E3779B97F4A7C15ULL * (index + 1)));
    child.next_u64();
    return child;
}

}  // namespace amgae
