#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace remfl {

/// SplitMix64 scramble; used for seeding and for deriving per-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministically derives an independent stream seed from a base seed and
/// a path of integers (location, channel, platoon, segment, ...). Every
/// distinct path yields a statistically independent stream.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// xoshiro256++ with explicit scalar-to-normal mappings. The simulation needs
/// tens of millions of Gaussian draws per experiment, so the normal sampler is
/// a 128-layer ziggurat instead of std::normal_distribution. All draws are a
/// pure function of the seed, independent of platform library internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& s : state_) {
            sm = splitmix64(sm);
            s = sm ^ (sm << 1 | 1);  // avoid the all-zero state
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1); safe as a log() argument.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound).
    std::uint64_t uniform_int(std::uint64_t bound) {
        // Lemire-style multiply-shift; bias is < 2^-64 * bound, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Standard normal via the 128-layer ziggurat of Marsaglia & Tsang
    /// (Doornik's double-precision variant).
    double normal() {
        const ZigTables& z = zig();
        for (;;) {
            const double u = 2.0 * uniform_open() - 1.0;
            const unsigned i = static_cast<unsigned>(next_u64() & 0x7f);
            if (std::fabs(u) < z.ratio[i]) return u * z.x[i];
            if (i == 0) return normal_tail(z.x[1], u < 0.0);
            const double x = u * z.x[i];
            const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
            const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
            if (f1 + uniform_open() * (f0 - f1) < 1.0) return x;
        }
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = power.
    std::complex<double> complex_normal(double power) {
        const double s = std::sqrt(0.5 * power);
        return {s * normal(), s * normal()};
    }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    struct ZigTables {
        std::array<double, 129> x{};
        std::array<double, 128> ratio{};
        ZigTables() {
            constexpr double r = 3.442619855899;
            constexpr double v = 9.91256303526217e-3;
            double f = std::exp(-0.5 * r * r);
            x[0] = v / f;  // pseudo-width of the base strip
            x[1] = r;
            x[128] = 0.0;
            for (int i = 2; i < 128; ++i) {
                x[i] = std::sqrt(-2.0 * std::log(v / x[i - 1] + f));
                f = std::exp(-0.5 * x[i] * x[i]);
            }
            for (int i = 0; i < 128; ++i) ratio[i] = x[i + 1] / x[i];
        }
    };

    static const ZigTables& zig() {
        static const ZigTables tables;
        return tables;
    }

    double normal_tail(double cutoff, bool negative) {
        double x, y;
        do {
            x = std::log(uniform_open()) / cutoff;
            y = std::log(uniform_open());
        } while (-2.0 * y < x * x);
        return negative ? x - cutoff : cutoff - x;
    }

    std::array<std::uint64_t, 4> state_;
};

}  // namespace remfl
