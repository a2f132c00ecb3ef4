#include "patchdet/rng.hpp"

#include <cmath>

namespace patchdet {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_)
        word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    // xoshiro256**
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::uint64_t Rng::uniform_u64(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;  // inclusive range size - 1
    if (span == UINT64_MAX)
        return next_u64();
    const std::uint64_t bound = span + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
        draw = next_u64();
    } while (draw >= limit);
    return lo + draw % bound;
}

int Rng::uniform_int(int lo, int hi) {
    return static_cast<int>(static_cast<std::int64_t>(
        uniform_u64(0, static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) -
                                                  static_cast<std::int64_t>(lo)))) +
                            lo);
}

double Rng::uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_double(double lo, double hi) {
    return lo + (hi - lo) * uniform_double();
}

bool Rng::bernoulli(double p) {
    return uniform_double() < p;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller; u1 is kept away from zero so log() is finite.
    double u1;
    do {
        u1 = uniform_double();
    } while (u1 <= 0.0);
    const double u2 = uniform_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

Rng Rng::derive(std::uint64_t key) const {
    return Rng(derive_seed(seed_, key));
}

Rng Rng::derive(std::string_view key) const {
    return Rng(derive_seed(seed_, key));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t sm = seed ^ rotl(key, 32) ^ 0xd6e8feb86659fd93ULL;
    std::uint64_t mixed = splitmix64(sm);
    return mixed ^ splitmix64(sm);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    return derive_seed(seed, hash64(name));
}

std::uint64_t hash64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace patchdet
