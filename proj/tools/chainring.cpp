// chainring: exact chain-ring linear algebra, limit laws of random-matrix
// cokernels, measure decompositions, and the Monte Carlo universality
// harness behind one command line.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "chainring/concrete_module.hpp"
#include "chainring/equidist.hpp"
#include "chainring/limit_laws.hpp"
#include "chainring/matrix.hpp"
#include "chainring/measures.hpp"
#include "chainring/montecarlo.hpp"

using json = nlohmann::ordered_json;
using namespace chainring;

namespace {

constexpr const char* kSchema = "v1";

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

std::vector<uint32_t> parse_range(const std::string& text) {
    auto dots = text.find("..");
    std::vector<uint32_t> out;
    if (dots == std::string::npos) {
        out.push_back(static_cast<uint32_t>(std::stoul(text)));
        return out;
    }
    uint32_t lo = static_cast<uint32_t>(std::stoul(text.substr(0, dots)));
    uint32_t hi = static_cast<uint32_t>(std::stoul(text.substr(dots + 2)));
    if (hi < lo) throw usage_error("bad range: '" + text + "'");
    for (uint32_t n = lo; n <= hi; ++n) out.push_back(n);
    return out;
}

uint64_t ensure_seed(int64_t seed_flag) {
    if (seed_flag >= 0) return static_cast<uint64_t>(seed_flag);
    std::random_device rd;
    uint64_t s = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "generated seed: " << s << "\n";
    return s;
}

json histogram_json(const EmpiricalDistribution& d) {
    json h = json::array();
    for (const auto& [k, c] : d.counts) h.push_back({{"class", k}, {"count", c}});
    return h;
}

// --- simulate ---

struct SimulateArgs {
    std::string ring_s = "Z/4";
    std::string entry_s = "0:1/2,1:1/2";
    int u = 0;
    std::string n_s = "2..6";
    uint64_t samples = 10000;
    std::string invariant_s = "coker";
    int64_t seed = -1;
    uint32_t workers = 1;
    std::string out;
    std::string plot;
    bool csv = false;
};

int run_simulate(const SimulateArgs& args) {
    ExperimentPlan plan;
    plan.ring = RingSpec::parse(args.ring_s);
    plan.xi = EntryDistribution::parse(args.entry_s, plan.ring);
    plan.u = args.u;
    plan.ns = parse_range(args.n_s);
    plan.samples = args.samples;
    plan.invariant = parse_invariant(args.invariant_s);
    plan.seed = ensure_seed(args.seed);
    plan.workers = args.workers;
    plan.validate();

    json report;
    report["schema"] = kSchema;
    report["kind"] = "simulate-report";
    report["rng"] = kRngIdentity;
    report["plan"] = {{"ring", plan.ring.notation()}, {"entry", plan.xi.str()},
                      {"u", plan.u},                 {"n", args.n_s},
                      {"samples", plan.samples},     {"invariant", invariant_name(plan.invariant)},
                      {"seed", plan.seed},           {"workers", plan.workers}};
    report["per_n"] = json::array();

    // truncated limit law for the cokernel, for the haar-vs-limit column
    std::map<std::string, double> limit_law;
    double limit_mass = 0;
    if (plan.invariant == Invariant::coker && plan.u >= 0) {
        for (const auto& t : enumerate_types(plan.ring, 12)) {
            double p = haar_limit_prob(t, static_cast<uint32_t>(plan.u)).value;
            limit_law[t.str()] = p;
            limit_mass += p;
        }
    }

    std::vector<ExperimentRow> rows = run_experiment(plan);
    std::vector<std::pair<uint32_t, double>> tv_series;
    std::vector<std::pair<double, double>> tv_cis;
    double worst_floor = 0;
    if (args.csv) std::cout << "n,model,tv_vs_haar,ci_lo,ci_hi,noise_floor,classes\n";
    for (size_t r = 0; r + 1 < rows.size(); r += 2) {
        uint32_t n = rows[r].n;
        const CellResult& iid = rows[r].cell;
        const CellResult& haar = rows[r + 1].cell;
        TvEstimate tv = tv_estimate(iid.full, haar.full, 200, plan.seed);
        double floor_iid = tv_plug_in(iid.half[0], iid.half[1]);
        double floor_haar = tv_plug_in(haar.half[0], haar.half[1]);
        double floor = std::max(floor_iid, floor_haar);
        worst_floor = std::max(worst_floor, floor);
        tv_series.emplace_back(n, tv.tv);
        tv_cis.emplace_back(tv.ci_lo, tv.ci_hi);

        json row_iid = {{"n", n},       {"model", "iid"},
                        {"histogram", histogram_json(iid.full)},
                        {"tv_vs_haar", tv.tv}, {"ci", {tv.ci_lo, tv.ci_hi}},
                        {"noise_floor", floor}};
        json row_haar = {{"n", n},      {"model", "haar"},
                         {"histogram", histogram_json(haar.full)},
                         {"tv_vs_haar", nullptr}, {"ci", nullptr},
                         {"noise_floor", floor_haar}};
        if (!limit_law.empty()) {
            // plug-in TV of the finite-n haar histogram against the truncated
            // limit law; the enumeration residual bounds the truncation slack
            double acc = 0, seen = 0;
            for (const auto& [cls, cnt] : haar.full.counts) {
                double phat = static_cast<double>(cnt) / haar.full.total;
                auto it = limit_law.find(cls);
                double p = it == limit_law.end() ? 0.0 : it->second;
                if (it != limit_law.end()) seen += p;
                acc += std::abs(phat - p);
            }
            double tv_limit = (acc + (limit_mass - seen)) / 2;
            row_haar["tv_vs_limit"] = tv_limit;
            row_haar["limit_enumeration_residual"] = 1.0 - limit_mass;
        }
        report["per_n"].push_back(row_iid);
        report["per_n"].push_back(row_haar);
        if (args.csv)
            std::cout << n << ",iid," << tv.tv << "," << tv.ci_lo << "," << tv.ci_hi << ","
                      << floor << "," << iid.full.counts.size() << "\n";
        else
            std::cout << "n=" << n << "  tv(iid,haar)=" << tv.tv << "  ci=[" << tv.ci_lo << ","
                      << tv.ci_hi << "]  noise_floor=" << floor << "  classes="
                      << iid.full.counts.size() << "\n";
    }

    try {
        RateFit fit = fit_rate(tv_series, worst_floor);
        attach_theta_envelope(fit, tv_series, tv_cis, worst_floor);
        report["rate_fit"] = {{"theta_hat", fit.theta_hat},
                              {"slope", fit.slope},
                              {"intercept", fit.intercept},
                              {"ns_used", fit.ns_used},
                              {"noise_floor", worst_floor}};
        if (fit.has_ci) report["rate_fit"]["theta_ci"] = {fit.theta_lo, fit.theta_hi};
        if (!args.csv) {
            std::cout << "rate fit: theta_hat = " << fit.theta_hat;
            if (fit.has_ci) std::cout << " ci=[" << fit.theta_lo << "," << fit.theta_hi << "]";
            std::cout << "\n";
        }
    } catch (const domain_error&) {
        report["rate_fit"] = nullptr;
        if (!args.csv) std::cout << "rate fit: insufficient signal above the noise floor\n";
    }

    if (!args.out.empty()) {
        std::ofstream f(args.out);
        f << report.dump(2) << "\n";
    }
    if (!args.plot.empty()) {
        std::ofstream f(args.plot);
        f << "# n tv log_tv\n";
        for (const auto& [n, tv] : tv_series)
            f << n << " " << tv << " " << (tv > 0 ? std::log(tv) : 0.0) << "\n";
    }
    return 0;
}

// --- verify measures ---

int run_verify_measures(const std::string& ring_s, uint32_t max_module, uint32_t trials,
                        int64_t seed_flag, const std::string& out_path) {
    RingSpec ring = RingSpec::parse(ring_s);
    uint64_t seed = ensure_seed(seed_flag);
    std::vector<ModuleType> types;
    for (const auto& t : enumerate_types(ring, 16))
        if (!t.is_zero() && t.cardinality() <= max_module) types.push_back(t);

    json rep;
    rep["schema"] = kSchema;
    rep["kind"] = "verify-measures";
    rep["ring"] = ring.notation();
    rep["seed"] = seed;
    rep["trials"] = trials;
    rep["modules"] = json::array();
    bool all_ok = true;

    for (const auto& t : types) {
        auto mod = std::make_shared<ConcreteModule>(t);
        MeasureDecomposer dec(mod);
        Substream s = Substream::derive(seed, {0x3e5u, static_cast<uint64_t>(mod->size())});
        uint64_t recon_fail = 0, orth_fail = 0, main_fail = 0, l1_fail = 0;
        for (uint32_t trial = 0; trial < trials; ++trial) {
            SignedMeasure nu = random_signed_measure(mod, s);
            auto comps = dec.decompose(nu);
            SignedMeasure sum = SignedMeasure::zero(mod);
            for (const auto& c : comps) sum += c.component;
            for (size_t i = 0; i < sum.w.size(); ++i)
                if (sum.w[i] != nu.w[i]) { ++recon_fail; break; }
            for (size_t a = 0; a < comps.size(); ++a)
                for (size_t b = a + 1; b < comps.size(); ++b)
                    if (inner_product(comps[a].component, comps[b].component) != 0) ++orth_fail;
            for (uint32_t j = 0; j <= ring.e(); ++j)
                if (!dec.verify_main_inequality(nu, j).holds) ++main_fail;
            SignedMeasure prob = random_probability_measure(mod, s);
            if (!dec.verify_l1_bound(prob).holds) ++l1_fail;
        }
        bool ok = !recon_fail && !orth_fail && !main_fail && !l1_fail;
        all_ok = all_ok && ok;
        rep["modules"].push_back({{"module", t.str()},
                                  {"reconstruction_failures", recon_fail},
                                  {"orthogonality_failures", orth_fail},
                                  {"main_inequality_failures", main_fail},
                                  {"l1_bound_failures", l1_fail},
                                  {"ok", ok}});
        std::cout << "module " << t.str() << ": " << (ok ? "pass" : "FAIL") << "\n";
    }
    rep["ok"] = all_ok;
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        f << rep.dump(2) << "\n";
    } else {
        std::cout << rep.dump(2) << "\n";
    }
    return all_ok ? 0 : 1;
}

// --- verify moment ---

int run_verify_moment(const std::string& ring_s, const std::string& entry_s,
                      const std::string& module_s, const std::string& l_s, int k_offset,
                      const std::string& eps0_s, const std::string& eps_s) {
    RingSpec ring = RingSpec::parse(ring_s);
    EntryDistribution xi = EntryDistribution::parse(entry_s, ring);
    ModuleType mt = ModuleType::parse(module_s, ring);
    ConcreteModule mod(mt);
    Rational eps0 = parse_rational(eps0_s);
    Rational eps = eps_s.empty() ? eps0 / 2 : parse_rational(eps_s);
    auto ls = parse_range(l_s);

    std::cout << "l,sum,decimal,ratio_to_previous,type1_sum,type2_sum,type3_sum,"
                 "type1_count,type2_count,type3_count\n";
    Rational prev = 0;
    bool have_prev = false;
    for (uint32_t l : ls) {
        if (static_cast<int>(l) + k_offset < 0) throw usage_error("need l + k_offset >= 0");
        uint32_t k = static_cast<uint32_t>(static_cast<int>(l) + k_offset);
        auto r = moment_tail_sum(mod, xi, l, k, eps0, eps);
        std::string ratio = "";
        if (have_prev && prev != 0) ratio = std::to_string(Rational(r.total / prev).get_d());
        std::cout << l << "," << csv_escape(r.total.get_str()) << "," << r.total.get_d() << ","
                  << ratio;
        for (int tt = 0; tt < 3; ++tt) std::cout << "," << csv_escape(r.per_type[tt].get_str());
        for (int tt = 0; tt < 3; ++tt) std::cout << "," << r.type_counts[tt];
        std::cout << "\n";
        prev = r.total;
        have_prev = true;
    }
    return 0;
}

// --- verify swap ---

int run_verify_swap(const std::string& ring_s, const std::string& entry_s, int u,
                    const std::string& n_s, uint64_t m_samples, int64_t seed_flag,
                    double theta_cap) {
    RingSpec ring = RingSpec::parse(ring_s);
    EntryDistribution xi = EntryDistribution::parse(entry_s, ring);
    uint64_t seed = ensure_seed(seed_flag);
    auto ns = parse_range(n_s);
    NormsReport norms = norms_and_theta(xi);

    std::cout << "n,avg_tv,decimal\n";
    std::vector<std::pair<uint32_t, double>> pts;
    for (uint32_t n : ns) {
        auto p = column_swap_exact(xi, n, u, m_samples, seed);
        std::cout << n << "," << csv_escape(p.avg_tv.get_str()) << "," << p.avg_tv.get_d() << "\n";
        pts.emplace_back(n, p.avg_tv.get_d());
    }
    RateFit fit = fit_rate(pts, 0.0, norms.theta_bound);
    std::cout << "theta_hat," << fit.theta_hat << "\n";
    std::cout << "theta_bound," << norms.theta_bound << "\n";
    if (theta_cap > 0) {
        std::cout << "theta_cap," << theta_cap << "," << (fit.theta_hat <= theta_cap ? "pass" : "FAIL")
                  << "\n";
        return fit.theta_hat <= theta_cap ? 0 : 1;
    }
    return 0;
}

// --- dist ---

int run_dist(const std::string& ring_s, uint32_t u, uint32_t top, uint32_t terms) {
    RingSpec ring = RingSpec::parse(ring_s);
    std::cout << "module_type,probability,tail_bound\n";
    uint32_t printed = 0;
    for (const auto& t : enumerate_types(ring, 24)) {
        if (printed >= top) break;
        TruncatedValue v = haar_limit_prob(t, u, terms);
        std::cout << csv_escape(t.str()) << "," << v.value << "," << v.abs_bound() << "\n";
        ++printed;
    }
    return 0;
}

// --- decompose ---

int run_decompose(const std::string& ring_s, const std::string& module_s,
                  const std::string& measure_s, bool as_json) {
    RingSpec ring = RingSpec::parse(ring_s);
    ModuleType mt = ModuleType::parse(module_s, ring);
    auto mod = std::make_shared<ConcreteModule>(mt);
    SignedMeasure nu = SignedMeasure::zero(mod);
    if (measure_s == "uniform") {
        nu = SignedMeasure::uniform(mod);
    } else if (measure_s.rfind("delta:", 0) == 0) {
        uint32_t x = static_cast<uint32_t>(std::stoul(measure_s.substr(6)));
        if (x >= mod->size()) throw usage_error("delta point out of range");
        nu = SignedMeasure::delta(mod, x);
    } else {
        std::stringstream ss(measure_s);
        std::string tok;
        std::vector<Rational> w;
        while (std::getline(ss, tok, ',')) w.push_back(parse_rational(tok));
        if (w.size() != mod->size())
            throw usage_error("measure needs exactly |M| = " + std::to_string(mod->size()) +
                              " weights");
        nu = SignedMeasure(mod, std::move(w));
    }
    MeasureDecomposer dec(mod);
    auto comps = dec.decompose(nu);
    json out;
    out["schema"] = kSchema;
    out["module"] = mt.str();
    out["components"] = json::array();
    for (const auto& c : comps) {
        const Subgroup& n = dec.lattice().submodules()[c.n_index];
        // greedy minimal generating set for the kernel
        std::string gens;
        Subgroup span = mod->trivial_subgroup();
        for (uint32_t e : n.elems) {
            if (span.contains(e)) continue;
            span = mod->extend_submodule(span, e);
            if (!gens.empty()) gens += " ";
            gens += mod->elem_str(e);
        }
        if (gens.empty()) gens = mod->elem_str(0);
        Rational l1 = l1_norm(c.component);
        Rational l2sq = l2_norm_sq(c.component);
        if (as_json) {
            out["components"].push_back({{"kernel", gens},
                                         {"quotient", c.quotient.str()},
                                         {"dim_V", c.ambient_dim.get_str()},
                                         {"l1", l1.get_str()},
                                         {"l1_decimal", l1.get_d()},
                                         {"l2_sq", l2sq.get_str()},
                                         {"l2_decimal", std::sqrt(l2sq.get_d())}});
        } else {
            std::cout << "N = {" << gens << "}  M/N = " << c.quotient.str()
                      << "  dim V = " << c.ambient_dim.get_str() << "  |nu_N|_1 = " << l1.get_str()
                      << " (" << l1.get_d() << ")  |nu_N|_2 = sqrt(" << l2sq.get_str() << ") ("
                      << std::sqrt(l2sq.get_d()) << ")\n";
        }
    }
    if (as_json) std::cout << out.dump(2) << "\n";
    return 0;
}

// --- rate (fit a stored report) ---

int run_rate(const std::string& in_path, double theta_bound) {
    std::ifstream f(in_path);
    if (!f) throw usage_error("cannot open report: " + in_path);
    json rep = json::parse(f);
    std::vector<std::pair<uint32_t, double>> pts;
    std::vector<std::pair<double, double>> cis;
    double floor = 0;
    for (const auto& row : rep.at("per_n")) {
        if (row.at("model") != "iid") continue;
        if (row.at("tv_vs_haar").is_null()) continue;
        double tv = row.at("tv_vs_haar").get<double>();
        pts.emplace_back(row.at("n").get<uint32_t>(), tv);
        if (!row.at("ci").is_null())
            cis.emplace_back(row.at("ci")[0].get<double>(), row.at("ci")[1].get<double>());
        else
            cis.emplace_back(tv, tv);
        if (!row.at("noise_floor").is_null())
            floor = std::max(floor, row.at("noise_floor").get<double>());
    }
    RateFit fit = fit_rate(pts, floor, theta_bound);
    attach_theta_envelope(fit, pts, cis, floor);
    std::cout << "theta_hat = " << fit.theta_hat << " (slope " << fit.slope << ", noise floor "
              << floor << ", " << fit.ns_used.size() << " points)\n";
    if (fit.has_ci)
        std::cout << "theta interval from per-point CIs: [" << fit.theta_lo << ", " << fit.theta_hi
                  << "]\n";
    if (theta_bound > 0)
        std::cout << "bound " << theta_bound << " x slack " << fit.slack << ": "
                  << (fit.within_bound ? "pass" : "FAIL") << "\n";
    return theta_bound > 0 && !fit.within_bound ? 1 : 0;
}

void apply_config(const std::string& path, SimulateArgs& args) {
    std::ifstream f(path);
    if (!f) throw usage_error("cannot open config: " + path);
    json cfg = json::parse(f);
    for (const auto& [key, value] : cfg.items()) {
        if (key == "ring") args.ring_s = value.get<std::string>();
        else if (key == "entry") args.entry_s = value.get<std::string>();
        else if (key == "u") args.u = value.get<int>();
        else if (key == "n") args.n_s = value.is_string() ? value.get<std::string>()
                                                          : std::to_string(value.get<uint32_t>());
        else if (key == "samples") args.samples = value.get<uint64_t>();
        else if (key == "invariant") args.invariant_s = value.get<std::string>();
        else if (key == "seed") args.seed = value.get<int64_t>();
        else if (key == "workers") args.workers = value.get<uint32_t>();
        else if (key == "out") args.out = value.get<std::string>();
        else throw usage_error("unknown config key: '" + key + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact chain-ring algebra and random-matrix cokernel experiments"};
    app.require_subcommand(1);

    // shared matrix-command state
    std::string ring_s, matrix_s;

    auto add_matrix_flags = [&](CLI::App* cmd) {
        cmd->add_option("--ring", ring_s, "ring notation, Z/p^e or F_q[t]/t^e")->required();
        cmd->add_option("--matrix", matrix_s, "rows ';'-separated, entries ','-separated")->required();
    };

    auto* snf_cmd = app.add_subcommand("snf", "Smith normal form exponents");
    bool with_transforms = false;
    add_matrix_flags(snf_cmd);
    snf_cmd->add_flag("--transforms", with_transforms, "also print U and V");

    auto* coker_cmd = app.add_subcommand("coker", "cokernel isomorphism class");
    add_matrix_flags(coker_cmd);

    auto* det_cmd = app.add_subcommand("det", "exact determinant");
    add_matrix_flags(det_cmd);

    auto* span_cmd = app.add_subcommand("span", "canonical column-span generators (Howell form)");
    add_matrix_flags(span_cmd);

    auto* dist_cmd = app.add_subcommand("dist", "limit-law table for Haar cokernels");
    std::string dist_ring = "Z/2";
    uint32_t dist_u = 0, dist_top = 10, dist_terms = 64;
    dist_cmd->add_option("--ring", dist_ring, "ring notation")->required();
    dist_cmd->add_option("--u", dist_u, "column offset u >= 0");
    dist_cmd->add_option("--top", dist_top, "number of classes (smallest first)");
    dist_cmd->add_option("--terms", dist_terms, "truncation terms for the products");

    auto* dec_cmd = app.add_subcommand("decompose", "orthogonal decomposition of a measure");
    std::string dec_ring, dec_module, dec_measure = "delta:0";
    bool dec_json = false;
    dec_cmd->add_option("--ring", dec_ring, "ring notation")->required();
    dec_cmd->add_option("--module", dec_module, "module type, e.g. \"[2,1]\"")->required();
    dec_cmd->add_option("--measure", dec_measure,
                        "comma list of |M| rationals, or 'uniform', or 'delta:<idx>'");
    dec_cmd->add_flag("--json", dec_json, "JSON output");

    auto* verify_cmd = app.add_subcommand("verify", "verification sweeps (exit 1 on violation)");
    verify_cmd->require_subcommand(1);

    auto* vm_cmd = verify_cmd->add_subcommand("measures", "decomposition + inequality sweeps");
    std::string vm_ring = "Z/4", vm_out;
    uint32_t vm_max = 16, vm_trials = 1000;
    int64_t vm_seed = -1;
    vm_cmd->add_option("--ring", vm_ring, "ring notation");
    vm_cmd->add_option("--max-module", vm_max, "size cap for test modules");
    vm_cmd->add_option("--trials", vm_trials, "random measures per module");
    vm_cmd->add_option("--seed", vm_seed, "seed (generated and printed when absent)");
    vm_cmd->add_option("--out", vm_out, "write the JSON report here");

    auto* vmom_cmd = verify_cmd->add_subcommand("moment", "exact moment-tail sums (CSV)");
    std::string vmom_ring = "Z/2", vmom_entry = "0:1/2,1:1/2", vmom_module = "[1]",
                vmom_l = "2..8", vmom_eps0 = "1/10", vmom_eps;
    int vmom_koff = 0;
    vmom_cmd->add_option("--ring", vmom_ring, "ring notation");
    vmom_cmd->add_option("--entry", vmom_entry, "entry law, e.g. \"0:1/2,1:1/2\"");
    vmom_cmd->add_option("--module", vmom_module, "module type");
    vmom_cmd->add_option("--l", vmom_l, "range of l, e.g. 2..8");
    vmom_cmd->add_option("--k-offset", vmom_koff, "k = l + offset");
    vmom_cmd->add_option("--eps0", vmom_eps0, "epsilon_0 (rational)");
    vmom_cmd->add_option("--eps", vmom_eps, "epsilon (rational, default eps0/2)");

    auto* vs_cmd = verify_cmd->add_subcommand("swap", "exact column-swapping TV decay");
    std::string vs_ring = "Z/4", vs_entry = "0:1/2,1:1/2", vs_n = "2..6";
    int vs_u = 0;
    uint64_t vs_m = 200;
    int64_t vs_seed = -1;
    double vs_cap = 0;
    vs_cmd->add_option("--ring", vs_ring, "ring notation");
    vs_cmd->add_option("--entry", vs_entry, "entry law");
    vs_cmd->add_option("--u", vs_u, "column offset");
    vs_cmd->add_option("--n", vs_n, "range of n");
    vs_cmd->add_option("--m-samples", vs_m, "sampled matrices per n");
    vs_cmd->add_option("--seed", vs_seed, "seed");
    vs_cmd->add_option("--theta-cap", vs_cap, "fail (exit 1) when theta_hat exceeds this");

    auto* sim_cmd = app.add_subcommand("simulate", "empirical invariant distributions and TV");
    SimulateArgs sim;
    std::string config_path;
    sim_cmd->add_option("--config", config_path, "JSON config file (flags override)");
    sim_cmd->add_option("--ring", sim.ring_s, "ring notation");
    sim_cmd->add_option("--entry", sim.entry_s, "i.i.d. entry law");
    sim_cmd->add_option("--u", sim.u, "column offset (may be negative)");
    sim_cmd->add_option("--n", sim.n_s, "range of n, e.g. 2..8");
    sim_cmd->add_option("--samples", sim.samples, "samples per (n, model)");
    sim_cmd->add_option("--invariant", sim.invariant_s, "coker|det|span|coker_det|span_det");
    sim_cmd->add_option("--seed", sim.seed, "master seed (generated and printed when absent)");
    sim_cmd->add_option("--workers", sim.workers, "worker threads");
    sim_cmd->add_option("--out", sim.out, "write the JSON report here");
    sim_cmd->add_flag("--csv", sim.csv, "CSV rows instead of the human table");
    sim_cmd->add_option("--emit-plot", sim.plot, "write gnuplot-style 'n tv log_tv' data");

    auto* rate_cmd = app.add_subcommand("rate", "decay-rate fit of a stored simulate report");
    std::string rate_in;
    double rate_bound = 0;
    rate_cmd->add_option("--in", rate_in, "simulate report JSON")->required();
    rate_cmd->add_option("--theta-bound", rate_bound, "compare theta_hat against this bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (snf_cmd->parsed()) {
            RingSpec ring = RingSpec::parse(ring_s);
            MatrixOverR m = MatrixOverR::parse(matrix_s, ring);
            SmithForm s = smith_normal_form(m, with_transforms);
            for (size_t i = 0; i < s.exponents.size(); ++i)
                std::cout << (i ? "," : "") << s.exponents[i];
            std::cout << "\n";
            if (with_transforms) {
                std::cout << "U=" << s.U->str() << "\n";
                std::cout << "V=" << s.V->str() << "\n";
            }
            return 0;
        }
        if (coker_cmd->parsed()) {
            RingSpec ring = RingSpec::parse(ring_s);
            std::cout << cokernel(MatrixOverR::parse(matrix_s, ring)).str() << "\n";
            return 0;
        }
        if (det_cmd->parsed()) {
            RingSpec ring = RingSpec::parse(ring_s);
            std::cout << determinant(MatrixOverR::parse(matrix_s, ring)).code << "\n";
            return 0;
        }
        if (span_cmd->parsed()) {
            RingSpec ring = RingSpec::parse(ring_s);
            std::cout << howell_form(MatrixOverR::parse(matrix_s, ring)).str() << "\n";
            return 0;
        }
        if (dist_cmd->parsed()) return run_dist(dist_ring, dist_u, dist_top, dist_terms);
        if (dec_cmd->parsed()) return run_decompose(dec_ring, dec_module, dec_measure, dec_json);
        if (vm_cmd->parsed()) return run_verify_measures(vm_ring, vm_max, vm_trials, vm_seed, vm_out);
        if (vmom_cmd->parsed())
            return run_verify_moment(vmom_ring, vmom_entry, vmom_module, vmom_l, vmom_koff,
                                     vmom_eps0, vmom_eps);
        if (vs_cmd->parsed())
            return run_verify_swap(vs_ring, vs_entry, vs_u, vs_n, vs_m, vs_seed, vs_cap);
        if (sim_cmd->parsed()) {
            if (!config_path.empty()) {
                // config supplies defaults; explicit flags override
                SimulateArgs merged;
                apply_config(config_path, merged);
                if (!sim_cmd->get_option("--ring")->count()) sim.ring_s = merged.ring_s;
                if (!sim_cmd->get_option("--entry")->count()) sim.entry_s = merged.entry_s;
                if (!sim_cmd->get_option("--u")->count()) sim.u = merged.u;
                if (!sim_cmd->get_option("--n")->count()) sim.n_s = merged.n_s;
                if (!sim_cmd->get_option("--samples")->count()) sim.samples = merged.samples;
                if (!sim_cmd->get_option("--invariant")->count()) sim.invariant_s = merged.invariant_s;
                if (!sim_cmd->get_option("--seed")->count()) sim.seed = merged.seed;
                if (!sim_cmd->get_option("--workers")->count()) sim.workers = merged.workers;
                if (!sim_cmd->get_option("--out")->count()) sim.out = merged.out;
            }
            return run_simulate(sim);
        }
        if (rate_cmd->parsed()) return run_rate(rate_in, rate_bound);
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
