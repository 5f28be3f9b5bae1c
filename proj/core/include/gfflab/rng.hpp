#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gfflab {

// Splittable seeded random stream. A stream is identified by a 64-bit key
// derived from (master seed, replica index, purpose tag), so adding workers or
// reordering replicas never changes the draws of any given replica.
//
// Generator: xoshiro256++ seeded through SplitMix64. All distribution
// samplers are implemented explicitly on top of uniform bits so that output
// is bit-stable across standard library implementations.
class RngStream {
public:
    static constexpr uint64_t kMix = 0x9e3779b97f4a7c15ull;

    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t z = a + kMix + (b << 1 | b >> 63);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static uint64_t key_of(uint64_t master, uint64_t replica, uint64_t purpose) {
        return mix(mix(master, replica), purpose);
    }

    explicit RngStream(uint64_t key) : key_(key) {
        // SplitMix64 expansion of the key into the xoshiro state.
        uint64_t z = key;
        for (auto& word : state_) {
            z += kMix;
            uint64_t w = z;
            w = (w ^ (w >> 30)) * 0xbf58476d1ce4e5b9ull;
            w = (w ^ (w >> 27)) * 0x94d049bb133111ebull;
            word = w ^ (w >> 31);
        }
        if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0)
            state_[0] = kMix;
    }

    RngStream(uint64_t master, uint64_t replica, uint64_t purpose)
        : RngStream(key_of(master, replica, purpose)) {}

    uint64_t key() const { return key_; }

    // Derived stream, independent of how much this stream has been consumed.
    RngStream fork(uint64_t salt) const { return RngStream(mix(key_, salt)); }

    uint64_t next_u64() {
        auto rotl = [](uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in the open interval (0,1).
    double uniform01() {
        uint64_t bits = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    long poisson(double mean) {
        long total = 0;
        // Chunked multiplication method; exact and stable for the modest means
        // used here.
        while (mean > 30.0) {
            total += poisson_small(30.0);
            mean -= 30.0;
        }
        return total + poisson_small(mean);
    }

    // Gamma(shape, rate); Marsaglia-Tsang for shape >= 1, boosted below 1.
    double gamma(double shape, double rate) {
        if (shape < 1.0) {
            double u = uniform01();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    // Logarithmic distribution on {1,2,...}: P(K=k) proportional to r^k / k.
    // Sampled by inversion on the cumulative series, truncated when the
    // remaining tail mass is below 1e-15.
    long logarithmic(double r) {
        const double norm = -std::log1p(-r);
        double u = uniform01() * norm;
        double term = r;
        long k = 1;
        double cum = term;
        while (u > cum) {
            term *= r;
            ++k;
            double p = term / static_cast<double>(k);
            cum += p;
            if (p < 1e-15 * norm) break;
        }
        return k;
    }

    // Index in [0, n) from nondecreasing cumulative weights with positive
    // total. Zero-weight entries (plateaus) are never selected.
    int pick_cumulative(const double* cum, int n) {
        double u = uniform01() * cum[n - 1];
        int lo = 0, hi = n - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (cum[mid] < u) lo = mid + 1; else hi = mid;
        }
        while (lo > 0 && cum[lo] - cum[lo - 1] <= 0.0) --lo;
        if (lo == 0 && cum[0] <= 0.0)
            while (lo + 1 < n && cum[lo] - (lo ? cum[lo - 1] : 0.0) <= 0.0) ++lo;
        return lo;
    }

private:
    long poisson_small(double mean) {
        double limit = std::exp(-mean);
        long k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    uint64_t key_;
    std::array<uint64_t, 4> state_{};
};

}  // namespace gfflab
