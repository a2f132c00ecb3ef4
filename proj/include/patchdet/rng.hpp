#pragma once

#include <cstdint>
#include <string_view>

namespace patchdet {

/// Deterministic random stream. All draws are implemented on top of a
/// splitmix64-seeded xoshiro256** core with explicit bounded-draw and
/// floating-point algorithms, so results are identical across compilers
/// and standard libraries. Every module that needs randomness takes one
/// of these; nothing in the library touches global RNG state.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
    std::uint64_t uniform_u64(std::uint64_t lo, std::uint64_t hi);
    int uniform_int(int lo, int hi);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_double();
    double uniform_double(double lo, double hi);

    /// Bernoulli trial; p outside (0, 1) degenerates to constant false/true.
    bool bernoulli(double p);

    /// Standard normal via Box-Muller (both values used, cached).
    double normal();
    double normal(double mean, double stddev);

    /// Child stream keyed on (this stream's seed, key). Independent of how
    /// many draws the parent has made, so per-image / per-worker streams are
    /// stable no matter the schedule.
    Rng derive(std::uint64_t key) const;
    Rng derive(std::string_view key) const;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Stream key for (seed, name) pairs, e.g. a global seed plus an image path.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

/// FNV-1a, used to fold strings (image paths, scorer ids) into stream keys.
std::uint64_t hash64(std::string_view bytes);

}  // namespace patchdet
