#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ofl/generators.hpp"
#include "ofl/harness.hpp"
#include "ofl/instance_io.hpp"

namespace ofl::cli {

namespace cli_detail {

inline nlohmann::json descriptor_json(const PointRef& r) {
    return io_detail::descriptor_to_json(r);
}

inline nlohmann::json solution_to_json(const OfflineSolution& sol) {
    nlohmann::json j;
    j["total"] = sol.total;
    j["facility_total"] = sol.facility_total;
    j["assignment_total"] = sol.assignment_total;
    auto facs = nlohmann::json::array();
    for (const auto& f : sol.facilities) facs.push_back(descriptor_json(f));
    j["facilities"] = std::move(facs);
    auto clusters = nlohmann::json::array();
    for (const auto& c : clusters_of(sol))
        clusters.push_back({{"center", descriptor_json(c.center)},
                            {"demand_indices", c.demand_indices}});
    j["clusters"] = std::move(clusters);
    return j;
}

inline nlohmann::json run_to_json(const RunRecord& rec) {
    nlohmann::json j;
    auto rounds = nlohmann::json::array();
    for (const auto& r : rec.rounds) {
        nlohmann::json round;
        round["demand"] = descriptor_json(r.demand);
        // +inf serializes as null; it only occurs before the first opening.
        round["pre_distance"] = r.pre_distance;
        round["coin_probability"] = r.coin_probability;
        round["opened"] = r.opened;
        if (r.opened) round["opened_at"] = descriptor_json(r.opened_at);
        round["facility_cost_paid"] = r.facility_cost_paid;
        round["assignment_cost_paid"] = r.assignment_cost_paid;
        round["facilities_after"] = r.facilities_after;
        rounds.push_back(std::move(round));
    }
    j["rounds"] = std::move(rounds);
    auto facs = nlohmann::json::array();
    for (const auto& f : rec.facilities) facs.push_back(descriptor_json(f));
    j["facilities"] = std::move(facs);
    j["facility_total"] = rec.facility_total;
    j["assignment_total"] = rec.assignment_total;
    j["grand_total"] = rec.grand_total;
    return j;
}

/// Formats first, then opens the file: a failed run never leaves partial output.
inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        if (!text.empty() && text.back() != '\n') out << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

struct CommonFlags {
    std::string instance_path;
    std::string family;
    int k = 0;
    double delta = 0.0;
    int n = 0;
    std::string rule = "clamped";
    double q = 0.5;
    std::string order = "uniform";
    double rho = 0.5;
    std::string interleaver = "cluster-blocks";
    int trials = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string opt_mode = "analytic";
    bool instrument = false;
    std::string tie_break = "lowest";
    std::string bounds = "auto";
    std::string out_path;
    std::string json_path;
};

inline void add_generator_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--family", f.family, "instance family: star, clique, subset_iid, fotakis");
    cmd->add_option("--k", f.k, "star/clique size parameter");
    cmd->add_option("--delta", f.delta, "clique pairwise distance");
    cmd->add_option("--n", f.n, "subset_iid / fotakis size (also the iid draw count)");
}

inline GeneratorParams parse_family(const CommonFlags& f) {
    GeneratorParams p;
    if (f.family == "star") {
        p.family = Family::star;
        p.k = f.k;
    } else if (f.family == "clique") {
        p.family = Family::clique;
        p.k = f.k;
        p.delta = f.delta;
    } else if (f.family == "subset_iid") {
        p.family = Family::subset_iid;
        p.n = f.n;
    } else if (f.family == "fotakis") {
        p.family = Family::fotakis;
        p.n = f.n;
    } else {
        throw CLI::ValidationError("--family", "unknown family \"" + f.family + "\"");
    }
    return p;
}

inline std::pair<Instance, std::optional<GeneratorParams>> build_instance(const CommonFlags& f) {
    if (!f.instance_path.empty() && !f.family.empty())
        throw CLI::ValidationError("--instance", "give either --instance or --family, not both");
    if (!f.instance_path.empty()) return {load_instance_file(f.instance_path), std::nullopt};
    if (f.family.empty())
        throw CLI::ValidationError("--instance", "an --instance file or a --family is required");
    const GeneratorParams params = parse_family(f);
    return {make_instance(params), params};
}

inline OpeningRule build_rule(const CommonFlags& f) {
    if (f.rule == "clamped") return OpeningRule::clamped(f.q);
    if (f.rule == "piecewise") return OpeningRule::piecewise(f.q);
    if (f.rule == "fotakis") return OpeningRule::fotakis();
    throw CLI::ValidationError("--rule", "unknown rule \"" + f.rule + "\"");
}

inline ArrivalModel build_arrival(const CommonFlags& f, const Instance& inst) {
    if (f.order == "uniform") return UniformRandom{};
    if (f.order == "adversarial") {
        Adversarial adv;
        adv.order.resize(inst.demand_count());
        std::iota(adv.order.begin(), adv.order.end(), 0);
        return adv;
    }
    if (f.order == "iid") {
        Iid iid;
        const int points = inst.space.point_count();
        iid.distribution.assign(points, 1.0 / points);
        if (f.n > 0)
            iid.n = f.n;
        else if (inst.space.is_subset_points())
            iid.n = inst.space.subset_rep().subset_size;
        else
            iid.n = std::max(1, inst.demand_count());
        return iid;
    }
    if (f.order == "partial") return make_partial_adversary(inst, f.rho, f.interleaver);
    if (f.order == "partial-rand") {
        PartialRandomRandomAdv m;
        m.rho = f.rho;
        m.interleaver = f.interleaver;
        return m;
    }
    throw CLI::ValidationError("--order", "unknown order model \"" + f.order + "\"");
}

inline std::vector<std::string> auto_bounds(const ArrivalModel& model, const OpeningRule& rule) {
    if (!rule.is_linear()) return {};
    if (std::holds_alternative<UniformRandom>(model)) return {"roflq_upper"};
    if (std::holds_alternative<PartialRandom>(model)) return {"rho_partial_upper"};
    if (std::holds_alternative<PartialRandomRandomAdv>(model))
        return {"rho_partial_random_upper"};
    if (std::holds_alternative<Iid>(model)) return {"iid_lower"};
    return {};
}

inline std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Arrival-model fragment of an experiment config:
/// {"model":"adversarial"|"uniform"|"iid"|"partial"|"partial_random_adv",
///  "order":[int]?, "rho":number?, "interleaver":string?, "n":int?}
inline ArrivalModel arrival_from_json(const nlohmann::json& j, const Instance& inst) {
    if (!j.is_object() || !j.contains("model"))
        throw std::runtime_error("experiment.arrival: needs a \"model\" field");
    const std::string model = j["model"].get<std::string>();
    const std::string interleaver = j.value("interleaver", std::string("cluster-blocks"));
    if (model == "adversarial") {
        Adversarial adv;
        if (j.contains("order"))
            adv.order = j["order"].get<std::vector<int>>();
        else {
            adv.order.resize(inst.demand_count());
            std::iota(adv.order.begin(), adv.order.end(), 0);
        }
        return adv;
    }
    if (model == "uniform") return UniformRandom{};
    if (model == "iid") {
        Iid iid;
        const int points = inst.space.point_count();
        iid.distribution.assign(points, 1.0 / points);
        if (j.contains("n"))
            iid.n = j["n"].get<int>();
        else if (inst.space.is_subset_points())
            iid.n = inst.space.subset_rep().subset_size;
        else
            iid.n = std::max(1, inst.demand_count());
        return iid;
    }
    if (model == "partial") {
        if (!j.contains("rho")) throw std::runtime_error("experiment.arrival: partial needs rho");
        return make_partial_adversary(inst, j["rho"].get<double>(), interleaver);
    }
    if (model == "partial_random_adv") {
        if (!j.contains("rho"))
            throw std::runtime_error("experiment.arrival: partial_random_adv needs rho");
        PartialRandomRandomAdv m;
        m.rho = j["rho"].get<double>();
        m.interleaver = interleaver;
        return m;
    }
    throw std::runtime_error("experiment.arrival: unknown model \"" + model + "\"");
}

/// Full experiment config: an instance path or generator record, the arrival
/// fragment, the rule, and the run parameters.
inline ExperimentSpec spec_from_json(const nlohmann::json& j,
                                     std::vector<std::string>& bound_names) {
    ExperimentSpec spec;
    if (j.contains("instance") == j.contains("generator"))
        throw std::runtime_error(
            "experiment: exactly one of \"instance\" (path) or \"generator\" is required");
    if (j.contains("instance")) {
        spec.instance = load_instance_file(j["instance"].get<std::string>());
        spec.experiment_id = j["instance"].get<std::string>();
    } else {
        const auto& g = j["generator"];
        CommonFlags gf;
        gf.family = g.value("family", std::string());
        gf.k = g.value("k", 0);
        gf.delta = g.value("delta", 0.0);
        gf.n = g.value("n", 0);
        const GeneratorParams params = parse_family(gf);
        spec.instance = make_instance(params);
        spec.family = params;
        spec.experiment_id = to_string(params.family) + ":" + params.describe();
    }
    if (j.contains("rule")) {
        const auto& r = j["rule"];
        const std::string kind = r.value("kind", std::string("clamped"));
        const double q = r.value("q", 0.5);
        if (kind == "clamped" || kind == "clamped_linear")
            spec.rule = OpeningRule::clamped(q);
        else if (kind == "piecewise" || kind == "piecewise_linear")
            spec.rule = OpeningRule::piecewise(q);
        else if (kind == "fotakis" || kind == "fotakis_potential")
            spec.rule = OpeningRule::fotakis();
        else
            throw std::runtime_error("experiment.rule: unknown kind \"" + kind + "\"");
    }
    if (!j.contains("arrival")) throw std::runtime_error("experiment: missing \"arrival\"");
    spec.arrival = arrival_from_json(j["arrival"], spec.instance);
    spec.trials = j.value("trials", 1000);
    spec.seed = j.value("seed", 0ull);
    spec.threads = j.value("threads", 0);
    if (spec.threads < 1)
        spec.threads = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    const std::string opt_mode = j.value("opt_mode", std::string("analytic"));
    spec.opt_mode = opt_mode == "exact" ? OptMode::exact : OptMode::analytic;
    spec.instrumentation = j.value("instrument", false);
    if (j.value("tie_break", std::string("lowest")) == "adversarial")
        spec.tie_break = FotakisTieBreak::adversarial_subset;
    if (j.contains("bounds")) bound_names = j["bounds"].get<std::vector<std::string>>();
    spec.experiment_id += ":" + to_string(spec.rule.kind) + ":" +
                          j["arrival"]["model"].get<std::string>();
    return spec;
}

inline ExperimentSpec build_spec(const CommonFlags& f) {
    ExperimentSpec spec;
    auto [inst, params] = build_instance(f);
    spec.instance = std::move(inst);
    spec.family = params;
    spec.rule = build_rule(f);
    spec.arrival = build_arrival(f, spec.instance);
    if (f.tie_break != "adversarial" && f.tie_break != "lowest")
        throw CLI::ValidationError("--tie-break", "expected \"lowest\" or \"adversarial\"");
    spec.tie_break = f.tie_break == "adversarial" ? FotakisTieBreak::adversarial_subset
                                                  : FotakisTieBreak::lowest_descriptor;
    spec.trials = f.trials;
    spec.seed = f.seed;
    if (f.opt_mode != "exact" && f.opt_mode != "analytic")
        throw CLI::ValidationError("--opt", "expected \"exact\" or \"analytic\"");
    spec.opt_mode = f.opt_mode == "exact" ? OptMode::exact : OptMode::analytic;
    spec.threads = f.threads > 0 ? f.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
    if (spec.threads < 1) spec.threads = 1;
    spec.experiment_id = (params ? to_string(params->family) + ":" + params->describe()
                                 : f.instance_path) +
                         ":" + f.rule + ":" + f.order;
    return spec;
}

inline EstimateReport run_estimate(const ExperimentSpec& spec, const std::string& bounds_flag,
                                   const std::vector<std::string>& explicit_names = {}) {
    EstimateReport report = estimate(spec);
    std::vector<std::string> names = explicit_names;
    if (names.empty()) {
        if (bounds_flag == "auto")
            names = auto_bounds(spec.arrival, spec.rule);
        else if (bounds_flag != "none")
            names = split_list(bounds_flag);
    }
    int iid_n = 0;
    if (const auto* iid = std::get_if<Iid>(&spec.arrival)) iid_n = iid->n;
    for (const auto& name : names) bound_check(report, name, iid_n);
    return report;
}

}  // namespace cli_detail

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 usage error, 2 runtime error (missing files, schema violations, budget
/// refusals), each with a one-line message on err.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    CLI::App app{"online facility location experiments"};
    app.require_subcommand(1);

    CommonFlags f;

    auto* gen = app.add_subcommand("gen", "generate an instance file");
    add_generator_flags(gen, f);
    gen->add_option("-o,--out", f.out_path, "output path (stdout when omitted)");

    auto* opt = app.add_subcommand("opt", "solve an instance exactly");
    opt->add_option("--instance", f.instance_path, "instance JSON path");
    add_generator_flags(opt, f);
    opt->add_option("-o,--out", f.out_path, "output path (stdout when omitted)");

    auto* run_cmd = app.add_subcommand("run", "one online execution, full trace");
    run_cmd->add_option("--instance", f.instance_path, "instance JSON path");
    add_generator_flags(run_cmd, f);
    run_cmd->add_option("--rule", f.rule, "clamped, piecewise, or fotakis");
    run_cmd->add_option("--q", f.q, "opening-probability slope");
    run_cmd->add_option("--order", f.order, "adversarial, uniform, iid, partial, partial-rand");
    run_cmd->add_option("--rho", f.rho, "partial-order random fraction");
    run_cmd->add_option("--interleaver", f.interleaver, "cluster-blocks or round-robin");
    run_cmd->add_option("--seed", f.seed, "rng seed");
    run_cmd->add_option("--tie-break", f.tie_break, "fotakis tie-break: lowest or adversarial");
    run_cmd->add_option("-o,--out", f.out_path, "output path (stdout when omitted)");

    std::string spec_path;
    auto* est = app.add_subcommand("estimate", "Monte Carlo cost/ratio estimate");
    est->add_option("--spec", spec_path, "experiment config JSON (instead of flags)");
    est->add_option("--instance", f.instance_path, "instance JSON path");
    add_generator_flags(est, f);
    est->add_option("--rule", f.rule, "clamped, piecewise, or fotakis");
    est->add_option("--q", f.q, "opening-probability slope");
    est->add_option("--order", f.order, "adversarial, uniform, iid, partial, partial-rand");
    est->add_option("--rho", f.rho, "partial-order random fraction");
    est->add_option("--interleaver", f.interleaver, "cluster-blocks or round-robin");
    est->add_option("--trials", f.trials, "number of independent trials");
    est->add_option("--seed", f.seed, "rng seed");
    est->add_option("--threads", f.threads, "worker threads (default: all cores)");
    est->add_option("--opt", f.opt_mode, "ratio denominator: exact or analytic");
    est->add_option("--bounds", f.bounds, "bound names, \"auto\", or \"none\"");
    est->add_option("--tie-break", f.tie_break, "fotakis tie-break: lowest or adversarial");
    est->add_flag("--instrument", f.instrument, "also run the analysis-coin instrumentation");
    est->add_option("-o,--out", f.out_path, "CSV output path (stdout when omitted)");
    est->add_option("--json", f.json_path, "also write the full JSON report here");

    std::string axis;
    std::string values;
    auto* sweep = app.add_subcommand("sweep", "estimate over a parameter grid");
    sweep->add_option("--axis", axis, "q, rho, or k")->required();
    sweep->add_option("--values", values, "comma-separated grid values")->required();
    sweep->add_option("--instance", f.instance_path, "instance JSON path");
    add_generator_flags(sweep, f);
    sweep->add_option("--rule", f.rule, "clamped, piecewise, or fotakis");
    sweep->add_option("--q", f.q, "opening-probability slope");
    sweep->add_option("--order", f.order, "adversarial, uniform, iid, partial, partial-rand");
    sweep->add_option("--rho", f.rho, "partial-order random fraction");
    sweep->add_option("--interleaver", f.interleaver, "cluster-blocks or round-robin");
    sweep->add_option("--trials", f.trials, "number of independent trials");
    sweep->add_option("--seed", f.seed, "rng seed");
    sweep->add_option("--threads", f.threads, "worker threads (default: all cores)");
    sweep->add_option("--opt", f.opt_mode, "ratio denominator: exact or analytic");
    sweep->add_option("--bounds", f.bounds, "bound names, \"auto\", or \"none\"");
    sweep->add_option("-o,--out", f.out_path, "CSV output path (stdout when omitted)");

    try {
        std::vector<const char*> argv;
        argv.push_back("ofl");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (gen->parsed()) {
            if (f.family.empty())
                throw CLI::ValidationError("--family", "required for gen");
            const GeneratorParams params = parse_family(f);
            const Instance inst = make_instance(params);
            emit(save_instance(inst).dump(2), f.out_path, out);
            return 0;
        }
        if (opt->parsed()) {
            auto [inst, params] = build_instance(f);
            OfflineSolution sol;
            bool solved = false;
            if (inst.space.is_subset_points()) {
                try {
                    sol = solve_subset_points(inst.space, inst.demands, inst.facility_cost);
                    solved = true;
                } catch (const std::invalid_argument&) {
                    // fall back to generic enumeration over default candidates
                }
            }
            if (!solved) sol = solve_exact(inst);
            emit(solution_to_json(sol).dump(2), f.out_path, out);
            return 0;
        }
        if (run_cmd->parsed()) {
            auto [inst, params] = build_instance(f);
            const OpeningRule rule = build_rule(f);
            const ArrivalModel arrival = build_arrival(f, inst);
            Rng orng = harness_detail::order_rng(f.seed, 0);
            Rng rrng = harness_detail::run_rng(f.seed, 0);
            const ArrivalSequence seq = make_order(inst, arrival, orng);
            RunRecord rec;
            if (rule.kind == OpeningRule::Kind::fotakis_potential) {
                const auto tie = f.tie_break == "adversarial"
                                     ? FotakisTieBreak::adversarial_subset
                                     : FotakisTieBreak::lowest_descriptor;
                rec = run_fotakis_points(inst.space, seq.points, inst.facility_cost, tie);
            } else {
                rec = run_linear(inst.space, seq.points, inst.facility_cost, rule, rrng);
            }
            emit(run_to_json(rec).dump(2), f.out_path, out);
            return 0;
        }
        if (est->parsed()) {
            ExperimentSpec spec;
            std::vector<std::string> explicit_bounds;
            if (!spec_path.empty()) {
                if (!f.instance_path.empty() || !f.family.empty())
                    throw CLI::ValidationError("--spec",
                                               "give --spec or instance flags, not both");
                std::ifstream in(spec_path);
                if (!in) throw std::runtime_error("cannot open experiment config: " + spec_path);
                nlohmann::json j;
                in >> j;
                spec = spec_from_json(j, explicit_bounds);
                f.instrument = f.instrument || spec.instrumentation;
            } else {
                spec = build_spec(f);
                spec.instrumentation = f.instrument;
            }
            const EstimateReport report = run_estimate(spec, f.bounds, explicit_bounds);
            std::string csv = csv_header() + "\n";
            for (const auto& row : csv_rows(report)) csv += row + "\n";
            emit(csv, f.out_path, out);
            if (f.instrument) {
                const auto summary =
                    instrument_analysis(spec.instance, spec.rule, spec.trials, spec.seed);
                nlohmann::json j = report_to_json(report);
                j["instrumentation"] = instrumentation_to_json(summary);
                if (!f.json_path.empty()) emit(j.dump(2), f.json_path, out);
                else out << j["instrumentation"].dump(2) << '\n';
            } else if (!f.json_path.empty()) {
                emit(report_to_json(report).dump(2), f.json_path, out);
            }
            return 0;
        }
        if (sweep->parsed()) {
            const auto grid = split_list(values);
            if (grid.empty()) throw std::runtime_error("sweep: --values must not be empty");
            std::string csv = csv_header() + "\n";
            for (const auto& value : grid) {
                CommonFlags g = f;
                if (axis == "q")
                    g.q = std::stod(value);
                else if (axis == "rho")
                    g.rho = std::stod(value);
                else if (axis == "k")
                    g.k = std::stoi(value);
                else
                    throw std::runtime_error("sweep: unknown axis \"" + axis + "\"");
                const ExperimentSpec spec = build_spec(g);
                EstimateReport report = run_estimate(spec, g.bounds);
                report.experiment_id += ":" + axis + "=" + value;
                for (const auto& row : csv_rows(report)) csv += row + "\n";
            }
            emit(csv, f.out_path, out);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace ofl::cli
