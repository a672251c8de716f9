#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ofl/instance.hpp"

namespace ofl {

/// Raised when a document does not match the instance schema or fails the
/// metric-axiom check; the message names the offending location.
class LoadError : public std::runtime_error {
public:
    explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

namespace io_detail {

inline nlohmann::json descriptor_to_json(const PointRef& r) {
    if (!r.is_subset()) return nlohmann::json{{"x", r.x}};
    return nlohmann::json{{"s", r.subset}};
}

inline PointRef descriptor_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw LoadError(where + ": descriptor must be an object");
    if (j.contains("x")) {
        if (!j["x"].is_number_integer()) throw LoadError(where + ".x: expected an integer");
        return PointRef::point(j["x"].get<int>());
    }
    if (j.contains("s")) {
        if (!j["s"].is_array()) throw LoadError(where + ".s: expected an array of integers");
        std::vector<int> ids;
        for (const auto& e : j["s"]) {
            if (!e.is_number_integer()) throw LoadError(where + ".s: expected an integer");
            ids.push_back(e.get<int>());
        }
        if (!std::is_sorted(ids.begin(), ids.end()) ||
            std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw LoadError(where + ".s: indices must be sorted and unique");
        return PointRef::subset_point(std::move(ids));
    }
    throw LoadError(where + ": descriptor needs an \"x\" or \"s\" field");
}

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& field,
                                     const std::string& where) {
    if (!j.contains(field)) throw LoadError(where + ": missing field \"" + field + "\"");
    return j[field];
}

}  // namespace io_detail

inline nlohmann::json save_instance(const Instance& inst) {
    nlohmann::json j;
    j["version"] = 1;
    j["facility_cost"] = inst.facility_cost;
    if (const auto* e = std::get_if<ExplicitMetric>(&inst.space.rep())) {
        j["metric"] = {{"type", "explicit"},
                       {"n", static_cast<int>(e->dist.size())},
                       {"distances", e->dist}};
    } else if (const auto* e = std::get_if<EuclideanMetric>(&inst.space.rep())) {
        j["metric"] = {{"type", "euclidean"}, {"points", e->points}};
    } else {
        const auto& sp = std::get<SubsetPointsMetric>(inst.space.rep());
        j["metric"] = {{"type", "subset_points"},
                       {"m", sp.m},
                       {"subset_size", sp.subset_size},
                       {"delta", sp.delta}};
    }
    auto demands = nlohmann::json::array();
    for (const auto& d : inst.demands) demands.push_back(io_detail::descriptor_to_json(d));
    j["demands"] = std::move(demands);
    if (inst.known_opt) {
        j["known_opt"] = {{"value", inst.known_opt->value},
                          {"kind", to_string(inst.known_opt->kind)},
                          {"note", inst.known_opt->note}};
    }
    if (inst.clusters) {
        auto clusters = nlohmann::json::array();
        for (const auto& c : *inst.clusters)
            clusters.push_back({{"center", io_detail::descriptor_to_json(c.center)},
                                {"demand_indices", c.demand_indices}});
        j["clusters"] = std::move(clusters);
    }
    return j;
}

inline Instance load_instance(const nlohmann::json& j) {
    using io_detail::descriptor_from_json;
    using io_detail::require;
    if (!j.is_object()) throw LoadError("instance: document must be a JSON object");
    if (require(j, "version", "instance").get<int>() != 1)
        throw LoadError("instance.version: only version 1 is supported");

    Instance inst;
    const auto& fc = require(j, "facility_cost", "instance");
    if (!fc.is_number()) throw LoadError("instance.facility_cost: expected a number");
    inst.facility_cost = fc.get<double>();
    if (!(inst.facility_cost > 0.0))
        throw LoadError("instance.facility_cost: must be positive");

    const auto& metric = require(j, "metric", "instance");
    const std::string type = require(metric, "type", "instance.metric").get<std::string>();
    if (type == "explicit") {
        const auto& dist = require(metric, "distances", "instance.metric");
        if (!dist.is_array()) throw LoadError("instance.metric.distances: expected an array");
        std::vector<std::vector<double>> rows;
        for (const auto& row : dist) rows.push_back(row.get<std::vector<double>>());
        const int n = require(metric, "n", "instance.metric").get<int>();
        if (n != static_cast<int>(rows.size()))
            throw LoadError("instance.metric.n: does not match the matrix size");
        try {
            inst.space = MetricSpace::explicit_matrix(std::move(rows));
        } catch (const std::invalid_argument& e) {
            throw LoadError(std::string("instance.metric.distances: ") + e.what());
        }
        const auto report = inst.space.validate();
        if (!report.ok())
            throw LoadError("instance.metric.distances: " + report.violations.front().to_string());
    } else if (type == "euclidean") {
        const auto& pts = require(metric, "points", "instance.metric");
        std::vector<std::vector<double>> points;
        for (const auto& p : pts) points.push_back(p.get<std::vector<double>>());
        try {
            inst.space = MetricSpace::euclidean(std::move(points));
        } catch (const std::invalid_argument& e) {
            throw LoadError(std::string("instance.metric.points: ") + e.what());
        }
    } else if (type == "subset_points") {
        const int m = require(metric, "m", "instance.metric").get<int>();
        const int subset_size = require(metric, "subset_size", "instance.metric").get<int>();
        const double delta = require(metric, "delta", "instance.metric").get<double>();
        try {
            inst.space = MetricSpace::subset_points(m, subset_size, delta);
        } catch (const std::invalid_argument& e) {
            throw LoadError(std::string("instance.metric: ") + e.what());
        }
    } else {
        throw LoadError("instance.metric.type: unknown type \"" + type + "\"");
    }

    const auto& demands = require(j, "demands", "instance");
    if (!demands.is_array()) throw LoadError("instance.demands: expected an array");
    for (std::size_t i = 0; i < demands.size(); ++i)
        inst.demands.push_back(
            descriptor_from_json(demands[i], "instance.demands[" + std::to_string(i) + "]"));

    if (j.contains("known_opt")) {
        const auto& ko = j["known_opt"];
        KnownOpt parsed;
        parsed.value = require(ko, "value", "instance.known_opt").get<double>();
        const std::string kind = require(ko, "kind", "instance.known_opt").get<std::string>();
        if (kind == "exact")
            parsed.kind = KnownOpt::Kind::exact;
        else if (kind == "upper_bound")
            parsed.kind = KnownOpt::Kind::upper_bound;
        else
            throw LoadError("instance.known_opt.kind: expected \"exact\" or \"upper_bound\"");
        if (ko.contains("note")) parsed.note = ko["note"].get<std::string>();
        inst.known_opt = std::move(parsed);
    }

    if (j.contains("clusters")) {
        const auto& cs = j["clusters"];
        if (!cs.is_array()) throw LoadError("instance.clusters: expected an array");
        std::vector<Cluster> clusters;
        for (std::size_t c = 0; c < cs.size(); ++c) {
            const std::string where = "instance.clusters[" + std::to_string(c) + "]";
            Cluster cluster;
            cluster.center = descriptor_from_json(require(cs[c], "center", where), where + ".center");
            cluster.demand_indices =
                require(cs[c], "demand_indices", where).get<std::vector<int>>();
            clusters.push_back(std::move(cluster));
        }
        inst.clusters = std::move(clusters);
    }

    try {
        check_instance(inst);
    } catch (const std::invalid_argument& e) {
        throw LoadError(e.what());
    }
    return inst;
}

inline Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open instance file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(path + ": " + e.what());
    }
    return load_instance(j);
}

inline void save_instance_file(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << save_instance(inst).dump(2) << '\n';
}

inline bool operator==(const Instance& a, const Instance& b) {
    if (!(a.facility_cost == b.facility_cost && a.demands == b.demands)) return false;
    if (a.known_opt.has_value() != b.known_opt.has_value()) return false;
    if (a.known_opt &&
        !(a.known_opt->value == b.known_opt->value && a.known_opt->kind == b.known_opt->kind &&
          a.known_opt->note == b.known_opt->note))
        return false;
    if (a.clusters != b.clusters) return false;
    if (a.space.rep().index() != b.space.rep().index()) return false;
    if (const auto* e = std::get_if<ExplicitMetric>(&a.space.rep()))
        return e->dist == std::get<ExplicitMetric>(b.space.rep()).dist;
    if (const auto* e = std::get_if<EuclideanMetric>(&a.space.rep()))
        return e->points == std::get<EuclideanMetric>(b.space.rep()).points;
    const auto& sa = std::get<SubsetPointsMetric>(a.space.rep());
    const auto& sb = std::get<SubsetPointsMetric>(b.space.rep());
    return sa.m == sb.m && sa.subset_size == sb.subset_size && sa.delta == sb.delta;
}

}  // namespace ofl
