#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace zrp {

// splitmix64 finalizer; used to derive well-separated seeds for child streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream families hanging off one master seed.  Every consumer of
// randomness names its family so streams never alias across purposes.
enum class StreamKind : std::uint64_t {
    site_clock = 1,    // per-site attempt clocks (and the injection clock)
    initial_draw = 2,  // per-site initial-occupancy draws
    replica = 3,       // per-replica master seeds in experiments
    env_draw = 4,      // per-site iid environment draws
};

inline std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::int64_t index) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
    h = splitmix64(h ^ static_cast<std::uint64_t>(index));
    return h;
}

// Thin deterministic wrapper over mt19937_64.  The uniform and exponential
// transforms are hand-rolled (not std::*_distribution) so that results are
// bit-identical across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log argument.
    double u01_pos() { return 1.0 - u01(); }

    // Exponential gap with the given rate (> 0).
    double exp_gap(double rate) { return -std::log(u01_pos()) / rate; }

    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

// Inverse-CDF draw from the geometric law P(k) = (1-r) r^k, k >= 0, given a
// uniform u in (0, 1].  Monotone non-decreasing in r for fixed u, which is
// what makes single-draw ordered-pair sampling work.
inline std::int64_t geometric_icdf(double u, double r) {
    if (r <= 0.0) return 0;
    double k = std::floor(std::log(u) / std::log(r));
    return static_cast<std::int64_t>(k);
}

}  // namespace zrp
