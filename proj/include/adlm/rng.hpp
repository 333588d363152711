#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace adlm {

namespace detail {

// splitmix64; used to derive independent stream seeds from (seed, stream).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic random stream. The engine is std::mt19937_64 (fully
/// specified by the standard); all distributions are implemented here so
/// output does not depend on the standard library vendor.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL * (stream + 1));
        engine_.seed(detail::splitmix64(s));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (cached spare).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * M_PI * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Additive-recurrence (Weyl) low-discrepancy sequence on [0,1)^dim, used by
/// the sampled assumption checks. Deterministic, no state beyond the counter.
class QuasiRandomSequence {
public:
    explicit QuasiRandomSequence(int dim) : dim_(dim), alphas_(dim) {
        // fractional parts of sqrt(prime_i) are irrational and independent
        static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                     41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
        for (int i = 0; i < dim; ++i) {
            double root = std::sqrt(static_cast<double>(primes[i % 24] + 97 * (i / 24)));
            alphas_[i] = root - std::floor(root);
        }
    }

    /// Fills `out[0..dim)` with the next point.
    void next(double* out) {
        ++count_;
        for (int i = 0; i < dim_; ++i) {
            double v = 0.5 + count_ * alphas_[i];
            out[i] = v - std::floor(v);
        }
    }

private:
    int dim_;
    std::vector<double> alphas_;
    long count_ = 0;
};

}  // namespace adlm
