#pragma once

// Counter-based pseudo-random streams ("cbrng:splitmix64/v1").
//
// A substream is identified by a 64-bit key derived by folding the master
// seed with context tags (n, model, block index, ...). Output i of a stream
// is splitmix64(key + i * GAMMA): pure counter mode, so streams can be
// split, replayed, and merged independently of scheduling. Sampling uses
// rejection, never modulo bias, so histograms are exactly reproducible.

#include <array>
#include <cstdint>
#include <vector>

#include "common.hpp"

namespace chainring {

inline constexpr const char* kRngIdentity = "cbrng:splitmix64/v1";

class Substream {
public:
    Substream() = default;
    explicit Substream(uint64_t key) : key_(key) {}

    // derive a substream from a master seed and context tags
    static Substream derive(uint64_t master, std::initializer_list<uint64_t> tags) {
        uint64_t k = splitmix64(master);
        for (uint64_t t : tags) k = fold_key(k, t);
        return Substream(k);
    }

    uint64_t next_u64() { return splitmix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

    // unbiased uniform draw in [0, n)
    uint64_t uniform_below(uint64_t n) {
        if (n == 0) throw usage_error("uniform_below(0)");
        uint64_t zone = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            uint64_t x = next_u64();
            if (x < zone) return x % n;
        }
    }

    double uniform_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

    uint64_t key() const { return key_; }

private:
    uint64_t key_ = 0;
    uint64_t counter_ = 0;
};

// Finitely supported sampler with exact rational weights: probabilities
// n_i / D over a common denominator D; a draw is a uniform integer below D
// pushed through the cumulative table.
class DiscreteSampler {
public:
    DiscreteSampler(const std::vector<Rational>& probs) {
        Int den = 1;
        for (const auto& p : probs) {
            if (p < 0) throw usage_error("negative probability");
            den = lcm_int(den, p.get_den());
        }
        if (!den.fits_ulong_p() || den.get_ui() > (1ull << 62))
            throw resource_error("probability denominators too large to sample exactly");
        d_ = den.get_ui();
        Int total = 0;
        uint64_t acc = 0;
        for (const auto& p : probs) {
            Int scaled = p.get_num() * (den / p.get_den());
            total += scaled;
            acc += scaled.get_ui();
            cum_.push_back(acc);
        }
        if (total != den) throw usage_error("probabilities do not sum to 1");
    }

    size_t draw(Substream& s) const {
        uint64_t x = s.uniform_below(d_);
        size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (x < cum_[mid]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

private:
    static Int lcm_int(const Int& a, const Int& b) {
        Int g;
        mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        return a / g * b;
    }

    uint64_t d_ = 1;
    std::vector<uint64_t> cum_;
};

} // namespace chainring
