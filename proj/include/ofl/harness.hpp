#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <mutex>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ofl/algorithms.hpp"
#include "ofl/arrival.hpp"
#include "ofl/generators.hpp"
#include "ofl/instance.hpp"
#include "ofl/offline.hpp"
#include "ofl/rng.hpp"

namespace ofl {

enum class OptMode { exact, analytic };

inline std::string to_string(OptMode m) {
    return m == OptMode::exact ? "exact" : "analytic";
}

struct ExperimentSpec {
    Instance instance;
    std::optional<GeneratorParams> family;  // provenance for closed forms and reports
    ArrivalModel arrival = UniformRandom{};
    OpeningRule rule = OpeningRule::clamped(0.5);
    FotakisTieBreak tie_break = FotakisTieBreak::lowest_descriptor;
    int trials = 1000;
    std::uint64_t seed = 0;
    OptMode opt_mode = OptMode::analytic;
    int threads = 1;
    bool instrumentation = false;  // also run instrument_analysis on this spec
    std::string experiment_id;
};

struct BoundCheck {
    std::string name;
    double value = 0.0;
    bool is_upper = true;
    double empirical = 0.0;
    double tolerance = 0.0;  // 3 * ratio stderr + 1e-9
    bool pass = false;
};

/// Closed-form predictions for the generated families. expected_cost is the
/// exact expectation where one is known; cost_lower_bound is used for the
/// i.i.d. family where only a lower bound on E[ALG] exists.
struct ClosedFormPrediction {
    std::optional<double> expected_cost;
    std::optional<double> cost_lower_bound;
    std::optional<double> opt_value;
    std::string opt_kind;  // "exact" | "upper_bound"
    std::string note;
    bool has_formula() const { return expected_cost || cost_lower_bound; }
};

struct EstimateReport {
    std::string experiment_id;
    std::string family;   // "star", ..., or "custom"
    std::string params;
    std::string rule_kind;
    double q = 0.0;
    std::string arrival_model;
    std::optional<double> rho;
    std::string interleaver;
    int trials = 0;
    std::uint64_t seed = 0;

    double mean_cost = 0.0;
    double stderr_cost = 0.0;
    double ci95_low = 0.0, ci95_high = 0.0;

    double opt_value = 0.0;
    std::string opt_kind;               // "exact" | "upper_bound" | "mean_exact" (per-trial)
    std::optional<double> mean_opt;     // i.i.d. mode: mean per-trial optimum

    double ratio = 0.0;
    double ratio_stderr = 0.0;
    double ratio_ci_low = 0.0, ratio_ci_high = 0.0;

    ClosedFormPrediction closed_form;
    std::vector<BoundCheck> bounds;
    std::vector<std::uint64_t> trial_seeds;
    std::vector<double> per_trial_cost;  // kept in memory for downstream checks
};

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Pairwise summation in fixed index order: order-independent of threading
/// and numerically stable, which byte-identical reports rely on.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t mid = xs.size() / 2;
    return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr out;
    const std::size_t n = xs.size();
    if (n == 0) return out;
    out.mean = pairwise_sum(xs) / static_cast<double>(n);
    if (n < 2) return out;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - out.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(n));
    return out;
}

// ---------------------------------------------------------------------------
// Closed forms and bounds
// ---------------------------------------------------------------------------

/// Evaluates the known closed forms for (family, rule). Pairs without a
/// formula return an empty prediction whose note says so.
inline ClosedFormPrediction closed_form(const GeneratorParams& params, const OpeningRule& rule) {
    ClosedFormPrediction out;
    if (params.family == Family::star && rule.is_linear()) {
        const double delta = 1.0 / (4.0 * std::sqrt(static_cast<double>(params.k)));
        const double g = rule.opening_probability(2.0 * delta, 1.0);
        out.expected_cost = 1.0 + (params.k - 1) * (g + (1.0 - g) * 2.0 * delta);
        out.opt_value = 1.0 + params.k * delta;
        out.opt_kind = "upper_bound";
        out.note = rule.q == 1.0
                       ? "per-round cost is g(2d)+ (1-g(2d))*2d after the first opening"
                       : "derived q-generalization of the star expectation; Monte Carlo is primary";
        return out;
    }
    if (params.family == Family::clique && rule.is_linear()) {
        const double g = rule.opening_probability(params.delta, 1.0);
        const double per_location =
            (g + (1.0 - g) * params.delta) *
            (1.0 - std::pow(1.0 - g, static_cast<double>(params.k))) / g;
        out.expected_cost = 1.0 + (params.k - 1) * per_location;
        out.opt_value = static_cast<double>(params.k);
        out.opt_kind = "upper_bound";
        out.note = "geometric series over the k arrivals per location";
        return out;
    }
    if (params.family == Family::subset_iid && rule.is_linear()) {
        out.cost_lower_bound = static_cast<double>(params.n) - 1.0;
        out.opt_value = 1.0 + params.n / 2.0;
        out.opt_kind = "upper_bound";
        out.note = "lower bound on E[ALG]; OPT bound from the covering subset point";
        return out;
    }
    if (params.family == Family::fotakis && rule.kind == OpeningRule::Kind::fotakis_potential) {
        const double delta = 1.0 / std::sqrt(static_cast<double>(params.n - 1));
        out.expected_cost = 1.0 + (params.n - 1) * (3.0 * delta / 2.0) -
                            (params.n - 1) * delta * delta / 4.0;
        out.opt_value = 1.0 + params.n * delta / 2.0;
        out.opt_kind = "upper_bound";
        out.note = "deterministic trace under the adversarial subset tie-break";
        return out;
    }
    out.note = "no closed form for this (family, rule) pair";
    return out;
}

/// Named competitive-ratio bounds evaluated at the experiment's parameters.
/// Upper bounds come from the random-order and partial-order guarantees of
/// the linear-rule algorithms; "iid_lower" is the finite-n hardness value
/// (n-1)/(1+n/2) of the i.i.d. construction.
inline double bound_value(const std::string& name, double q, double rho, int n) {
    if (name == "roflq_upper") return (1.0 + q) * std::max(2.0, 1.0 / q);
    if (name == "rho_partial_upper") {
        if (!(rho > 0.0 && rho < 1.0))
            throw std::invalid_argument("bound rho_partial_upper needs rho in (0,1)");
        return (1.0 + q) * std::max(3.0 / rho - 1.0, (2.0 / rho - 1.0) / q);
    }
    if (name == "rho_partial_random_upper") {
        if (!(rho > 0.0 && rho < 1.0))
            throw std::invalid_argument("bound rho_partial_random_upper needs rho in (0,1)");
        return (1.0 + q) * std::max(4.0 - 2.0 * rho, (2.0 / rho - 1.0) / q);
    }
    if (name == "iid_lower") {
        if (n < 2) throw std::invalid_argument("bound iid_lower needs the draw count n");
        return (n - 1.0) / (1.0 + n / 2.0);
    }
    throw std::invalid_argument("unknown bound name \"" + name + "\"");
}

inline bool bound_is_upper(const std::string& name) { return name != "iid_lower"; }

/// Records pass/fail of the named bound against the report's ratio, with a
/// 3-stderr + 1e-9 tolerance so Monte Carlo noise cannot fail a true bound.
inline void bound_check(EstimateReport& report, const std::string& name, int n = 0) {
    BoundCheck check;
    check.name = name;
    check.value = bound_value(name, report.q, report.rho.value_or(0.0), n);
    check.is_upper = bound_is_upper(name);
    check.empirical = report.ratio;
    check.tolerance = 3.0 * report.ratio_stderr + 1e-9;
    check.pass = check.is_upper ? report.ratio <= check.value + check.tolerance
                                : report.ratio >= check.value - check.tolerance;
    report.bounds.push_back(std::move(check));
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation
// ---------------------------------------------------------------------------

namespace harness_detail {

// Per-trial rng streams: order, run, and analysis coins never share a stream,
// so instrumentation cannot perturb algorithm decisions.
inline Rng order_rng(std::uint64_t seed, std::uint64_t trial) {
    return Rng(derive_seed(derive_seed(seed, trial), 1));
}
inline Rng run_rng(std::uint64_t seed, std::uint64_t trial) {
    return Rng(derive_seed(derive_seed(seed, trial), 2));
}
inline Rng analysis_rng(std::uint64_t seed, std::uint64_t trial) {
    return Rng(derive_seed(derive_seed(seed, trial), 3));
}

inline void run_chunked(int trials, int threads, const std::function<void(int)>& body) {
    if (threads <= 1) {
        for (int i = 0; i < trials; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int chunk = (trials + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(trials, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body, &failure, &failure_mutex] {
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline double exact_opt_value(const Instance& inst, std::span<const PointRef> demands) {
    if (inst.space.is_subset_points()) {
        bool all_x = true;
        for (const auto& d : demands)
            if (d.is_subset()) all_x = false;
        if (all_x) {
            try {
                return solve_subset_points(inst.space, demands, inst.facility_cost).total;
            } catch (const std::invalid_argument&) {
                // more distinct locations than subset_size: fall through to
                // the generic enumeration below
            }
        }
    }
    try {
        const auto candidates = default_candidates(inst.space, demands);
        return solve_exact(inst.space, demands, inst.facility_cost, candidates).total;
    } catch (const BudgetExceeded& e) {
        throw std::runtime_error(std::string(e.what()) +
                                 "; exact OPT is infeasible here, use opt_mode=analytic");
    }
}

}  // namespace harness_detail

/// Runs `trials` independent executions (rng streams derived from seed and
/// trial index, so results do not depend on the thread count), aggregates
/// mean / stderr / CI95, and forms the ratio against the declared optimum:
/// a constant OPT divides the cost CI (delta method); the i.i.d. mode uses
/// ratio-of-means with a paired bootstrap CI over (cost, opt) pairs.
inline EstimateReport estimate(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw std::invalid_argument("estimate: trials must be >= 1");
    const Instance& inst = spec.instance;
    const bool iid = std::holds_alternative<Iid>(spec.arrival);
    const bool fotakis_rule = spec.rule.kind == OpeningRule::Kind::fotakis_potential;

    EstimateReport report;
    report.experiment_id = spec.experiment_id;
    report.family = spec.family ? to_string(spec.family->family) : "custom";
    report.params = spec.family ? spec.family->describe() : "";
    report.rule_kind = to_string(spec.rule.kind);
    report.q = spec.rule.q;
    report.arrival_model = model_name(spec.arrival);
    if (const auto* pr = std::get_if<PartialRandom>(&spec.arrival)) {
        report.rho = pr->rho;
        report.interleaver = pr->interleaver;
    } else if (const auto* prr = std::get_if<PartialRandomRandomAdv>(&spec.arrival)) {
        report.rho = prr->rho;
        report.interleaver = prr->interleaver;
    }
    report.trials = spec.trials;
    report.seed = spec.seed;

    // Constant OPT for the non-i.i.d. modes.
    double fixed_opt = 0.0;
    if (!iid) {
        if (spec.opt_mode == OptMode::exact) {
            fixed_opt = harness_detail::exact_opt_value(inst, inst.demands);
            report.opt_kind = "exact";
        } else {
            if (!inst.known_opt)
                throw std::runtime_error(
                    "estimate: analytic opt_mode needs a known_opt on the instance");
            fixed_opt = inst.known_opt->value;
            report.opt_kind = to_string(inst.known_opt->kind);
        }
    }

    std::vector<double> costs(spec.trials, 0.0);
    std::vector<double> opts(iid ? spec.trials : 0, 0.0);
    report.trial_seeds.resize(spec.trials);
    for (int i = 0; i < spec.trials; ++i)
        report.trial_seeds[i] = derive_seed(spec.seed, static_cast<std::uint64_t>(i));

    harness_detail::run_chunked(spec.trials, spec.threads, [&](int i) {
        Rng orng = harness_detail::order_rng(spec.seed, i);
        Rng rrng = harness_detail::run_rng(spec.seed, i);
        const ArrivalSequence seq = make_order(inst, spec.arrival, orng);
        RunRecord rec;
        if (fotakis_rule)
            rec = run_fotakis_points(inst.space, seq.points, inst.facility_cost, spec.tie_break);
        else
            rec = run_linear(inst.space, seq.points, inst.facility_cost, spec.rule, rrng);
        costs[i] = rec.grand_total;
        if (iid) {
            if (spec.opt_mode == OptMode::exact)
                opts[i] = harness_detail::exact_opt_value(inst, seq.points);
            else if (inst.known_opt)
                opts[i] = inst.known_opt->value;
            else
                throw std::runtime_error(
                    "estimate: analytic opt_mode needs a known_opt on the instance");
        }
    });

    const auto cost_stats = mean_stderr(costs);
    report.mean_cost = cost_stats.mean;
    report.stderr_cost = cost_stats.stderr_;
    report.ci95_low = cost_stats.mean - 1.96 * cost_stats.stderr_;
    report.ci95_high = cost_stats.mean + 1.96 * cost_stats.stderr_;
    report.per_trial_cost = std::move(costs);

    if (!iid) {
        report.opt_value = fixed_opt;
        report.ratio = report.mean_cost / fixed_opt;
        report.ratio_stderr = report.stderr_cost / fixed_opt;
        report.ratio_ci_low = report.ci95_low / fixed_opt;
        report.ratio_ci_high = report.ci95_high / fixed_opt;
    } else {
        const auto opt_stats = mean_stderr(opts);
        report.mean_opt = opt_stats.mean;
        report.opt_value = opt_stats.mean;
        report.opt_kind = spec.opt_mode == OptMode::exact ? "mean_exact" : "upper_bound";
        report.ratio = report.mean_cost / opt_stats.mean;
        // Paired bootstrap over (cost, opt); 1000 resamples.
        const int resamples = 1000;
        Rng brng(derive_seed(spec.seed, 0xB0075ULL));
        std::vector<double> ratios(resamples);
        for (int b = 0; b < resamples; ++b) {
            double sc = 0.0, so = 0.0;
            for (int t = 0; t < spec.trials; ++t) {
                const auto j = brng.uniform_int(static_cast<std::uint64_t>(spec.trials));
                sc += report.per_trial_cost[j];
                so += opts[j];
            }
            ratios[b] = sc / so;
        }
        std::sort(ratios.begin(), ratios.end());
        report.ratio_ci_low = ratios[static_cast<std::size_t>(0.025 * (resamples - 1))];
        report.ratio_ci_high = ratios[static_cast<std::size_t>(0.975 * (resamples - 1))];
        report.ratio_stderr = mean_stderr(ratios).stderr_ * std::sqrt(static_cast<double>(resamples));
    }

    if (spec.family) report.closed_form = closed_form(*spec.family, spec.rule);
    return report;
}

// ---------------------------------------------------------------------------
// Analysis instrumentation
// ---------------------------------------------------------------------------

/// Per-cluster empirical means of the stopping-time quantities: the balanced
/// opening's |C_T| * d*_{v_T} against the remaining-mass sum, and the coin-sum
/// over arrivals up to T against 1 + 2q * distance mass. Pass flags use a
/// 3-combined-stderr + 1e-9 tolerance.
struct ClusterInstrumentation {
    int cluster = 0;
    int size = 0;
    double balanced_fraction = 0.0;  // trials in which a balanced opening happened
    double mean_ct_dstar = 0.0, se_ct_dstar = 0.0;          // |C_T| * d*_{v_T}
    double mean_sum_ct_dstar = 0.0, se_sum_ct_dstar = 0.0;  // sum_{C_T} d*
    double mean_sum_cbar_p = 0.0, se_sum_cbar_p = 0.0;      // sum_{Cbar_T} p_u
    double mean_sum_cbar_dstar = 0.0, se_sum_cbar_dstar = 0.0;
    bool stopping_mass_pass = false;  // E[|C_T| d*_{v_T}] <= E[sum_{C_T} d*]
    bool coin_sum_pass = false;       // E[sum p] <= 1 + 2q E[sum d*]
};

struct InstrumentationSummary {
    int trials = 0;
    std::uint64_t seed = 0;
    double q = 0.0;
    std::vector<ClusterInstrumentation> clusters;
    bool all_pass() const {
        for (const auto& c : clusters)
            if (!c.stopping_mass_pass || !c.coin_sum_pass) return false;
        return true;
    }
};

/// Per-cluster outcome of one instrumented run. stop_round is the arrival
/// position of the first balanced in-cluster opening (-1 when none happened,
/// the "n+1" case, which leaves the remaining-set fields zero).
struct ClusterTrace {
    int stop_round = -1;
    double stop_dstar = 0.0;           // d*_{v_T}
    int remaining = 0;                 // |C_T|
    double remaining_dstar = 0.0;      // sum over C_T of d*
    double coin_sum = 0.0;             // sum over arrivals up to T of p_u
    double dstar_sum = 0.0;            // sum over arrivals up to T of d*_u
    std::vector<int> w_demand;         // w(v_l) demand index, per in-cluster arrival
    std::vector<char> analysis_heads;  // analysis-coin outcomes at in-cluster openings
};

struct InstrumentationRecord {
    std::vector<ClusterTrace> clusters;
    RunRecord run;
};

namespace harness_detail {

struct InstrumentContext {
    std::vector<Cluster> clusters;
    std::vector<int> cluster_of;
    std::vector<double> dstar;
};

inline InstrumentContext instrument_context(const Instance& inst) {
    InstrumentContext ctx;
    ctx.clusters = clusters_for(inst);
    if (ctx.clusters.empty())
        throw std::invalid_argument("instrumentation: instance has no clusters");
    const int n = inst.demand_count();
    ctx.cluster_of.assign(n, -1);
    ctx.dstar.assign(n, 0.0);
    for (std::size_t c = 0; c < ctx.clusters.size(); ++c)
        for (int idx : ctx.clusters[c].demand_indices) {
            ctx.cluster_of[idx] = static_cast<int>(c);
            ctx.dstar[idx] =
                inst.space.distance_unchecked(ctx.clusters[c].center, inst.demands[idx]);
        }
    for (int i = 0; i < n; ++i)
        if (ctx.cluster_of[i] < 0)
            throw std::invalid_argument("instrumentation: clusters must cover every demand");
    return ctx;
}

inline InstrumentationRecord instrument_one(const Instance& inst, const InstrumentContext& ctx,
                                            const OpeningRule& rule, const ArrivalSequence& seq,
                                            Rng& run_rng, Rng& analysis_rng) {
    const int n = inst.demand_count();
    InstrumentationRecord record;
    record.clusters.resize(ctx.clusters.size());

    auto hook = [&](int pos, const PointRef&, double, double p, bool opened,
                    const PreRoundDistances& pre) {
        const int demand = seq.indices[pos];
        const int c = ctx.cluster_of[demand];
        ClusterTrace& trace = record.clusters[c];
        if (trace.stop_round >= 0) return;
        trace.coin_sum += p;
        trace.dstar_sum += ctx.dstar[demand];
        // w(v_l): minimal opening probability among remaining in-cluster
        // demands (current one included) no farther from the center.
        double min_p = p;
        int w = demand;
        int remaining = 0;
        double remaining_d = 0.0;
        for (int pos2 = pos; pos2 < n; ++pos2) {
            const int u = seq.indices[pos2];
            if (ctx.cluster_of[u] != c) continue;
            ++remaining;
            remaining_d += ctx.dstar[u];
            if (pos2 > pos && ctx.dstar[u] <= ctx.dstar[demand]) {
                const double pu =
                    rule.opening_probability(pre(inst.demands[u]), inst.facility_cost);
                if (pu < min_p) {
                    min_p = pu;
                    w = u;
                }
            }
        }
        trace.w_demand.push_back(w);
        if (!opened) return;
        const bool heads = analysis_rng.bernoulli(min_p / p);
        trace.analysis_heads.push_back(heads ? 1 : 0);
        if (!heads) return;  // imbalanced opening
        trace.stop_round = pos;
        trace.stop_dstar = ctx.dstar[demand];
        trace.remaining = remaining;
        trace.remaining_dstar = remaining_d;
    };
    record.run = run_linear(inst.space, seq.points, inst.facility_cost, rule, run_rng, hook);
    return record;
}

}  // namespace harness_detail

/// One instrumented execution with full per-cluster traces; analysis coins
/// ride their own rng stream so they never perturb the algorithm.
inline InstrumentationRecord instrument_run(const Instance& inst, const OpeningRule& rule,
                                            std::span<const int> order, Rng& run_rng,
                                            Rng& analysis_rng) {
    if (!rule.is_linear())
        throw std::invalid_argument("instrument_run: needs a linear opening rule");
    const auto ctx = harness_detail::instrument_context(inst);
    ArrivalSequence seq;
    seq.indices.assign(order.begin(), order.end());
    for (int idx : seq.indices) {
        if (idx < 0 || idx >= inst.demand_count())
            throw std::out_of_range("instrument_run: demand index out of range");
        seq.points.push_back(inst.demands[idx]);
    }
    return harness_detail::instrument_one(inst, ctx, rule, seq, run_rng, analysis_rng);
}

/// Replays uniform-random-order runs while flipping the analysis coin
/// whenever the algorithm opens at an in-cluster demand: heads probability
/// p(l, w(v_l)) / p(v_l). Aggregates the two stopping-time inequalities.
inline InstrumentationSummary instrument_analysis(const Instance& inst, const OpeningRule& rule,
                                                  int trials, std::uint64_t seed) {
    if (!rule.is_linear())
        throw std::invalid_argument("instrument_analysis: needs a linear opening rule");
    const auto ctx = harness_detail::instrument_context(inst);
    const int nc = static_cast<int>(ctx.clusters.size());

    // Per-trial, per-cluster samples.
    std::vector<std::vector<double>> ct_dstar(nc), sum_ct(nc), sum_p(nc), sum_d(nc);
    std::vector<double> balanced(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
        ct_dstar[c].resize(trials);
        sum_ct[c].resize(trials);
        sum_p[c].resize(trials);
        sum_d[c].resize(trials);
    }

    UniformRandom order_model;
    for (int t = 0; t < trials; ++t) {
        Rng orng = harness_detail::order_rng(seed, t);
        Rng rrng = harness_detail::run_rng(seed, t);
        Rng arng = harness_detail::analysis_rng(seed, t);
        const ArrivalSequence seq = make_order(inst, order_model, orng);
        const auto record = harness_detail::instrument_one(inst, ctx, rule, seq, rrng, arng);
        for (int c = 0; c < nc; ++c) {
            const ClusterTrace& trace = record.clusters[c];
            ct_dstar[c][t] = trace.remaining * trace.stop_dstar;
            sum_ct[c][t] = trace.remaining_dstar;
            sum_p[c][t] = trace.coin_sum;
            sum_d[c][t] = trace.dstar_sum;
            if (trace.stop_round >= 0) balanced[c] += 1.0;
        }
    }

    InstrumentationSummary summary;
    summary.trials = trials;
    summary.seed = seed;
    summary.q = rule.q;
    for (int c = 0; c < nc; ++c) {
        ClusterInstrumentation ci;
        ci.cluster = c;
        ci.size = static_cast<int>(ctx.clusters[c].demand_indices.size());
        ci.balanced_fraction = balanced[c] / trials;
        const auto a = mean_stderr(ct_dstar[c]);
        const auto b = mean_stderr(sum_ct[c]);
        const auto psum = mean_stderr(sum_p[c]);
        const auto dsum = mean_stderr(sum_d[c]);
        ci.mean_ct_dstar = a.mean;
        ci.se_ct_dstar = a.stderr_;
        ci.mean_sum_ct_dstar = b.mean;
        ci.se_sum_ct_dstar = b.stderr_;
        ci.mean_sum_cbar_p = psum.mean;
        ci.se_sum_cbar_p = psum.stderr_;
        ci.mean_sum_cbar_dstar = dsum.mean;
        ci.se_sum_cbar_dstar = dsum.stderr_;
        const double tol34 = 3.0 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
        ci.stopping_mass_pass = a.mean <= b.mean + tol34 + 1e-9;
        const double coef = 2.0 * rule.q;
        const double tol35 = 3.0 * std::sqrt(psum.stderr_ * psum.stderr_ +
                                             coef * coef * dsum.stderr_ * dsum.stderr_);
        ci.coin_sum_pass = psum.mean <= 1.0 + coef * dsum.mean + tol35 + 1e-9;
        summary.clusters.push_back(ci);
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

namespace harness_detail {

inline std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace harness_detail

inline std::string csv_header() {
    return "experiment_id,family,params,rule_kind,q,arrival_model,rho,interleaver,trials,seed,"
           "mean_cost,stderr,ci95_low,ci95_high,opt_value,opt_kind,ratio,ratio_ci_low,"
           "ratio_ci_high,bound_name,bound_value,bound_pass";
}

/// One CSV row per bound check (a single row with empty bound columns when
/// the report carries none).
inline std::vector<std::string> csv_rows(const EstimateReport& r) {
    using harness_detail::fmt;
    std::string prefix = r.experiment_id + "," + r.family + "," + r.params + "," + r.rule_kind +
                         "," + fmt(r.q) + "," + r.arrival_model + "," +
                         (r.rho ? fmt(*r.rho) : "") + "," + r.interleaver + "," +
                         std::to_string(r.trials) + "," + std::to_string(r.seed) + "," +
                         fmt(r.mean_cost) + "," + fmt(r.stderr_cost) + "," + fmt(r.ci95_low) +
                         "," + fmt(r.ci95_high) + "," + fmt(r.opt_value) + "," + r.opt_kind +
                         "," + fmt(r.ratio) + "," + fmt(r.ratio_ci_low) + "," +
                         fmt(r.ratio_ci_high);
    std::vector<std::string> rows;
    if (r.bounds.empty()) {
        rows.push_back(prefix + ",,,");
        return rows;
    }
    for (const auto& b : r.bounds)
        rows.push_back(prefix + "," + b.name + "," + fmt(b.value) + "," +
                       (b.pass ? "true" : "false"));
    return rows;
}

inline nlohmann::json report_to_json(const EstimateReport& r) {
    nlohmann::json j;
    j["experiment_id"] = r.experiment_id;
    j["family"] = r.family;
    j["params"] = r.params;
    j["rule_kind"] = r.rule_kind;
    j["q"] = r.q;
    j["arrival_model"] = r.arrival_model;
    if (r.rho) j["rho"] = *r.rho;
    if (!r.interleaver.empty()) j["interleaver"] = r.interleaver;
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["mean_cost"] = r.mean_cost;
    j["stderr"] = r.stderr_cost;
    j["ci95_low"] = r.ci95_low;
    j["ci95_high"] = r.ci95_high;
    j["opt_value"] = r.opt_value;
    j["opt_kind"] = r.opt_kind;
    if (r.mean_opt) j["mean_opt"] = *r.mean_opt;
    j["ratio"] = r.ratio;
    j["ratio_stderr"] = r.ratio_stderr;
    j["ratio_ci_low"] = r.ratio_ci_low;
    j["ratio_ci_high"] = r.ratio_ci_high;
    if (r.closed_form.has_formula()) {
        nlohmann::json cf;
        if (r.closed_form.expected_cost) cf["expected_cost"] = *r.closed_form.expected_cost;
        if (r.closed_form.cost_lower_bound)
            cf["cost_lower_bound"] = *r.closed_form.cost_lower_bound;
        if (r.closed_form.opt_value) cf["opt_value"] = *r.closed_form.opt_value;
        cf["opt_kind"] = r.closed_form.opt_kind;
        cf["note"] = r.closed_form.note;
        j["closed_form"] = std::move(cf);
    }
    auto bounds = nlohmann::json::array();
    for (const auto& b : r.bounds)
        bounds.push_back({{"name", b.name},
                          {"value", b.value},
                          {"is_upper", b.is_upper},
                          {"empirical", b.empirical},
                          {"tolerance", b.tolerance},
                          {"pass", b.pass}});
    j["bound_checks"] = std::move(bounds);
    j["trial_seeds"] = r.trial_seeds;
    return j;
}

inline nlohmann::json instrumentation_to_json(const InstrumentationSummary& s) {
    nlohmann::json j;
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    j["q"] = s.q;
    auto arr = nlohmann::json::array();
    for (const auto& c : s.clusters)
        arr.push_back({{"cluster", c.cluster},
                       {"size", c.size},
                       {"balanced_fraction", c.balanced_fraction},
                       {"mean_ct_dstar", c.mean_ct_dstar},
                       {"se_ct_dstar", c.se_ct_dstar},
                       {"mean_sum_ct_dstar", c.mean_sum_ct_dstar},
                       {"se_sum_ct_dstar", c.se_sum_ct_dstar},
                       {"mean_sum_cbar_p", c.mean_sum_cbar_p},
                       {"se_sum_cbar_p", c.se_sum_cbar_p},
                       {"mean_sum_cbar_dstar", c.mean_sum_cbar_dstar},
                       {"se_sum_cbar_dstar", c.se_sum_cbar_dstar},
                       {"stopping_mass_pass", c.stopping_mass_pass},
                       {"coin_sum_pass", c.coin_sum_pass}});
    j["clusters"] = std::move(arr);
    return j;
}

}  // namespace ofl
