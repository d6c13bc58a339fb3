#pragma once

// Counter-based pseudo-random generator (Philox4x32-10) plus the variate
// samplers used across the library.
//
// Stream derivation rule: a generator is addressed by (seed, substream).
// The 64-bit seed forms the Philox key; the 64-bit substream index occupies
// counter words 2..3; counter words 0..1 advance with the position within the
// stream. Distinct (seed, substream) pairs therefore yield statistically
// independent streams, and any substream can be created without generating
// its predecessors.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace evspec {

class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t substream = 0) noexcept
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          sub_lo_(static_cast<std::uint32_t>(substream)),
          sub_hi_(static_cast<std::uint32_t>(substream >> 32)) {}

    // Next 32 uniform bits.
    std::uint32_t next_u32() noexcept {
        if (have_ == 0) {
            block_ = round10(counter_, key0_, key1_);
            ++counter_;
            have_ = 4;
        }
        return block_[4 - have_--];
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller; the paired variate is cached.
    double normal() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Gamma(alpha, 1) for alpha >= 1, Marsaglia-Tsang squeeze method.
    double gamma(double alpha) {
        if (alpha < 1.0) throw std::invalid_argument("gamma: alpha must be >= 1");
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

private:
    struct Counter {
        std::uint32_t w[4];
        Counter& operator++() noexcept {
            if (++w[0] == 0) ++w[1];  // words 2..3 hold the substream id
            return *this;
        }
    };

    static std::array<std::uint32_t, 4> round10(const Counter& ctr, std::uint32_t k0, std::uint32_t k1) noexcept {
        std::uint32_t c0 = ctr.w[0], c1 = ctr.w[1], c2 = ctr.w[2], c3 = ctr.w[3];
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = 0xD2511F53ull * c0;
            const std::uint64_t p1 = 0xCD9E8D57ull * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return {c0, c1, c2, c3};
    }

    std::uint32_t key0_, key1_;
    std::uint32_t sub_lo_, sub_hi_;
    Counter counter_{{0, 0, sub_lo_, sub_hi_}};
    std::array<std::uint32_t, 4> block_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace evspec
