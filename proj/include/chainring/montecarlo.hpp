#pragma once

// Reproducible sampling of i.i.d. and Haar random matrices over R and the
// empirical machinery around them: invariant histograms, plug-in total
// variation with bootstrap confidence intervals, the exact column-swapping
// estimate at small n, and log-linear decay-rate fits.
//
// Reproducibility contract: samples are partitioned into a fixed number of
// virtual blocks (independent of thread count); block b of cell (n, model)
// draws from Substream::derive(seed, {n, model, b}). Any worker count yields
// byte-identical histograms.

#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "equidist.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace chainring {

constexpr uint32_t kVirtualBlocks = 64;

enum class Invariant : uint8_t { coker, det, span, coker_det, span_det };
enum class Model : uint8_t { iid, haar };

inline const char* invariant_name(Invariant inv) {
    switch (inv) {
        case Invariant::coker: return "coker";
        case Invariant::det: return "det";
        case Invariant::span: return "span";
        case Invariant::coker_det: return "coker_det";
        case Invariant::span_det: return "span_det";
    }
    return "?";
}

inline Invariant parse_invariant(const std::string& s) {
    if (s == "coker") return Invariant::coker;
    if (s == "det") return Invariant::det;
    if (s == "span") return Invariant::span;
    if (s == "coker_det" || s == "coker-det" || s == "cokerxdet") return Invariant::coker_det;
    if (s == "span_det" || s == "span-det" || s == "spanxdet") return Invariant::span_det;
    throw usage_error("unknown invariant: '" + s + "'");
}

inline const char* model_name(Model m) { return m == Model::iid ? "iid" : "haar"; }

struct ExperimentPlan {
    RingSpec ring;
    EntryDistribution xi;      // i.i.d. entry law
    int u = 0;
    std::vector<uint32_t> ns;
    uint64_t samples = 10000;
    Invariant invariant = Invariant::coker;
    uint64_t seed = 0;
    uint32_t workers = 1;

    void validate() const {
        if (ns.empty()) throw usage_error("empty n range");
        if (samples < 1) throw usage_error("need samples >= 1");
        if (workers < 1) throw usage_error("need workers >= 1");
        bool square_only = invariant == Invariant::det || invariant == Invariant::coker_det ||
                           invariant == Invariant::span_det;
        if (square_only && u != 0)
            throw usage_error("determinant invariants require square matrices (u = 0)");
        for (uint32_t n : ns)
            if (static_cast<int>(n) + u < 0) throw usage_error("need n + u >= 0");
    }
};

struct EmpiricalDistribution {
    std::map<std::string, uint64_t> counts;
    uint64_t total = 0;

    void add(const std::string& key) {
        ++counts[key];
        ++total;
    }
    void merge(const EmpiricalDistribution& o) {
        for (const auto& [k, c] : o.counts) counts[k] += c;
        total += o.total;
    }
};

// --- sampling ---

inline MatrixOverR sample_matrix(uint32_t n, int u, const RingSpec& ring,
                                 const DiscreteSampler* sampler,
                                 const std::vector<uint32_t>* support_codes, Substream& s) {
    if (n < 1 || static_cast<int>(n) + u < 0) throw usage_error("need n >= 1 and n + u >= 0");
    uint32_t m = static_cast<uint32_t>(static_cast<int>(n) + u);
    MatrixOverR out(n, m, ring);
    if (sampler) {
        for (auto& x : out.a) x = (*support_codes)[sampler->draw(s)];
    } else {
        for (auto& x : out.a) x = static_cast<uint32_t>(s.uniform_below(ring.size()));
    }
    return out;
}

inline MatrixOverR sample_matrix(uint32_t n, int u, const EntryDistribution& xi, Substream& s) {
    std::vector<Rational> probs;
    std::vector<uint32_t> codes;
    for (const auto& [a, p] : xi.support) { codes.push_back(a); probs.push_back(p); }
    DiscreteSampler sampler(probs);
    return sample_matrix(n, u, xi.ring, &sampler, &codes, s);
}

inline std::string invariant_key(Invariant inv, const MatrixOverR& m) {
    switch (inv) {
        case Invariant::coker: return cokernel(m).str();
        case Invariant::det: return std::to_string(determinant(m).code);
        case Invariant::span: return howell_of_columns(m).key();
        case Invariant::coker_det:
            return cokernel(m).str() + "|" + std::to_string(determinant(m).code);
        case Invariant::span_det:
            return howell_of_columns(m).key() + "|" + std::to_string(determinant(m).code);
    }
    throw usage_error("unknown invariant");
}

struct CellResult {
    EmpiricalDistribution full;
    EmpiricalDistribution half[2]; // even / odd virtual blocks, for noise floors
};

// one (n, model) cell of an experiment; deterministic in (plan.seed, n,
// model) regardless of worker count
inline CellResult run_cell(const ExperimentPlan& plan, uint32_t n, Model model) {
    std::vector<Rational> probs;
    std::vector<uint32_t> codes;
    for (const auto& [a, p] : plan.xi.support) { codes.push_back(a); probs.push_back(p); }
    DiscreteSampler sampler(probs);
    bool haar = model == Model::haar;

    std::vector<EmpiricalDistribution> per_block(kVirtualBlocks);
    std::atomic<uint32_t> next{0};
    auto worker = [&]() {
        for (;;) {
            uint32_t b = next.fetch_add(1);
            if (b >= kVirtualBlocks) return;
            uint64_t count = plan.samples / kVirtualBlocks + (b < plan.samples % kVirtualBlocks ? 1 : 0);
            Substream s = Substream::derive(plan.seed,
                                            {n, static_cast<uint64_t>(model), b});
            for (uint64_t i = 0; i < count; ++i) {
                MatrixOverR m = sample_matrix(n, plan.u, plan.ring,
                                              haar ? nullptr : &sampler,
                                              haar ? nullptr : &codes, s);
                per_block[b].add(invariant_key(plan.invariant, m));
            }
        }
    };
    uint32_t w = std::min(plan.workers, kVirtualBlocks);
    if (w <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (uint32_t t = 0; t < w; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    CellResult out;
    for (uint32_t b = 0; b < kVirtualBlocks; ++b) {
        out.full.merge(per_block[b]);
        out.half[b % 2].merge(per_block[b]);
    }
    return out;
}

struct ExperimentRow {
    uint32_t n = 0;
    Model model = Model::iid;
    CellResult cell;
};

// every (n, model) cell of the plan, in plan order
inline std::vector<ExperimentRow> run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    std::vector<ExperimentRow> out;
    for (uint32_t n : plan.ns)
        for (Model model : {Model::iid, Model::haar})
            out.push_back({n, model, run_cell(plan, n, model)});
    return out;
}

// exact distribution of an invariant over *all* n x m matrices; the
// brute-force Haar oracle for small n
inline EmpiricalDistribution exact_invariant_distribution(const RingSpec& ring, uint32_t n,
                                                          uint32_t m, Invariant inv,
                                                          uint64_t budget = 1u << 22) {
    double count = std::pow(static_cast<double>(ring.size()), static_cast<double>(n) * m);
    if (count > static_cast<double>(budget))
        throw resource_error("exact enumeration budget exceeded");
    EmpiricalDistribution out;
    MatrixOverR mat(n, m, ring);
    uint64_t total = static_cast<uint64_t>(count);
    for (uint64_t idx = 0; idx < total; ++idx) {
        uint64_t rest = idx;
        for (auto& x : mat.a) { x = rest % ring.size(); rest /= ring.size(); }
        out.add(invariant_key(inv, mat));
    }
    return out;
}

// --- total variation ---

inline double tv_plug_in(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    if (p.total == 0 || q.total == 0) throw usage_error("empty distribution");
    double s = 0;
    auto it = p.counts.begin();
    auto jt = q.counts.begin();
    while (it != p.counts.end() || jt != q.counts.end()) {
        double pv = 0, qv = 0;
        if (jt == q.counts.end() || (it != p.counts.end() && it->first < jt->first)) {
            pv = static_cast<double>(it->second) / p.total;
            ++it;
        } else if (it == p.counts.end() || jt->first < it->first) {
            qv = static_cast<double>(jt->second) / q.total;
            ++jt;
        } else {
            pv = static_cast<double>(it->second) / p.total;
            qv = static_cast<double>(jt->second) / q.total;
            ++it; ++jt;
        }
        s += std::abs(pv - qv);
    }
    return s / 2;
}

struct TvEstimate {
    double tv = 0;
    double ci_lo = 0, ci_hi = 0;
    uint32_t resamples = 0;
};

namespace detail {

inline EmpiricalDistribution resample(const EmpiricalDistribution& p, Substream& s) {
    // multinomial resample via categorical draws on the cumulative table
    std::vector<std::pair<uint64_t, const std::string*>> cum;
    uint64_t acc = 0;
    for (const auto& [k, c] : p.counts) { acc += c; cum.emplace_back(acc, &k); }
    EmpiricalDistribution out;
    for (uint64_t i = 0; i < p.total; ++i) {
        uint64_t x = s.uniform_below(p.total);
        size_t lo = 0, hi = cum.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (x < cum[mid].first) hi = mid; else lo = mid + 1;
        }
        out.add(*cum[lo].second);
    }
    return out;
}

} // namespace detail

inline TvEstimate tv_estimate(const EmpiricalDistribution& p, const EmpiricalDistribution& q,
                              uint32_t resamples = 200, uint64_t seed = 0) {
    TvEstimate out;
    out.tv = tv_plug_in(p, q);
    out.resamples = resamples;
    if (resamples == 0) { out.ci_lo = out.ci_hi = out.tv; return out; }
    std::vector<double> tvs(resamples);
    for (uint32_t r = 0; r < resamples; ++r) {
        Substream s = Substream::derive(seed, {0xb007u, r});
        EmpiricalDistribution pr = detail::resample(p, s);
        EmpiricalDistribution qr = detail::resample(q, s);
        tvs[r] = tv_plug_in(pr, qr);
    }
    std::sort(tvs.begin(), tvs.end());
    out.ci_lo = tvs[static_cast<size_t>(0.025 * (resamples - 1))];
    out.ci_hi = tvs[static_cast<size_t>(0.975 * (resamples - 1))];
    return out;
}

// --- exact column-swapping estimate ---

struct ColumnSwapPoint {
    uint32_t n = 0;
    Rational avg_tv;       // exact average over the sampled matrices M
    uint64_t samples_m = 0;
};

// d_TV(v + im(M), uniform) for one fixed matrix M: the law of v + im(M) on
// R^n / im(M) is the exact pushforward of xi^n through Howell coset
// reduction, so against the uniform law the TV is a rational number.
inline Rational column_swap_tv(const EntryDistribution& xi, const MatrixOverR& m,
                               uint64_t budget = 1u << 22) {
    uint32_t n = m.rows;
    double tuples = std::pow(static_cast<double>(xi.support.size()), static_cast<double>(n));
    if (tuples > static_cast<double>(budget))
        throw resource_error("column-swap pushforward budget exceeded");
    HowellForm h = howell_of_columns(m);
    std::map<std::vector<uint32_t>, Rational> mass;
    std::vector<uint32_t> vec(n, 0);
    std::function<void(uint32_t, Rational)> rec = [&](uint32_t depth, Rational pr) {
        if (depth == n) {
            mass[h.reduce(vec)] += pr;
            return;
        }
        for (const auto& [a, p] : xi.support) {
            vec[depth] = a;
            rec(depth + 1, pr * p);
        }
    };
    rec(0, Rational(1));
    Int cosets = h.coset_count();
    Rational unif = Rational(1) / Rational(cosets);
    Rational tv = 0;
    for (const auto& [rep, pr] : mass) tv += abs(pr - unif);
    Rational untouched{cosets - static_cast<long>(mass.size())};
    tv += untouched * unif;
    return tv / 2;
}

// Monte Carlo enters only through the choice of M; each TV is exact.
inline ColumnSwapPoint column_swap_exact(const EntryDistribution& xi, uint32_t n, int u,
                                         uint64_t m_samples, uint64_t seed,
                                         uint64_t budget = 1u << 22) {
    Substream s = Substream::derive(seed, {0x5a9u, n});
    ColumnSwapPoint out;
    out.n = n;
    out.samples_m = m_samples;
    Rational acc = 0;
    for (uint64_t t = 0; t < m_samples; ++t) {
        MatrixOverR m = sample_matrix(n, u, xi, s);
        acc += column_swap_tv(xi, m, budget);
    }
    out.avg_tv = acc / Rational(static_cast<long>(m_samples));
    return out;
}

// --- decay-rate fitting ---

struct RateFit {
    std::vector<uint32_t> ns_used;
    double slope = 0;
    double intercept = 0;
    double theta_hat = 0;
    double theta_bound = 0;  // theoretical bound supplied by the caller
    double slack = 1.2;
    bool within_bound = false;
    bool has_ci = false;     // conservative interval from per-point CIs
    double theta_lo = 0, theta_hi = 0;
};

// least squares on log tv against n, using only points above the noise floor
inline RateFit fit_rate(const std::vector<std::pair<uint32_t, double>>& points,
                        double noise_floor, double theta_bound = 0, double slack = 1.2) {
    std::vector<std::pair<uint32_t, double>> use;
    for (const auto& [n, tv] : points)
        if (tv > noise_floor && tv > 0) use.emplace_back(n, tv);
    if (use.size() < 3)
        throw domain_error("insufficient signal: fewer than 3 points above the noise floor");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, tv] : use) {
        double x = n, y = std::log(tv);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double cnt = static_cast<double>(use.size());
    RateFit out;
    out.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / cnt;
    out.theta_hat = std::exp(out.slope);
    out.theta_bound = theta_bound;
    out.slack = slack;
    out.within_bound = theta_bound > 0 ? out.theta_hat <= theta_bound * slack : true;
    for (const auto& [n, tv] : use) out.ns_used.push_back(n);
    return out;
}

// conservative theta interval from per-point confidence intervals: the
// steepest fit pushes early points to their upper ends and late points to
// their lower ends, the shallowest fit does the reverse
inline void attach_theta_envelope(RateFit& fit,
                                  const std::vector<std::pair<uint32_t, double>>& points,
                                  const std::vector<std::pair<double, double>>& cis,
                                  double noise_floor) {
    if (cis.size() != points.size()) throw usage_error("one CI per rate point required");
    std::vector<std::pair<uint32_t, double>> steep, shallow;
    double mid_n = 0;
    size_t used = 0;
    for (const auto& [n, tv] : points)
        if (tv > noise_floor && tv > 0) { mid_n += n; ++used; }
    if (used < 3) return;
    mid_n /= static_cast<double>(used);
    for (size_t i = 0; i < points.size(); ++i) {
        auto [n, tv] = points[i];
        if (!(tv > noise_floor && tv > 0)) continue;
        double lo = std::max(cis[i].first, 1e-300), hi = std::max(cis[i].second, lo);
        bool early = n < mid_n;
        steep.emplace_back(n, early ? hi : lo);
        shallow.emplace_back(n, early ? lo : hi);
    }
    try {
        double a = fit_rate(steep, 0.0).theta_hat;
        double b = fit_rate(shallow, 0.0).theta_hat;
        fit.theta_lo = std::min(a, b);
        fit.theta_hi = std::max(a, b);
        fit.has_ci = true;
    } catch (const domain_error&) {
        // not enough surviving points; leave the fit without an interval
    }
}

} // namespace chainring
