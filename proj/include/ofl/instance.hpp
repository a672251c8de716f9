#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ofl/metric.hpp"

namespace ofl {

/// Analytic knowledge about the optimum, with provenance. The harness keeps
/// "exact" and "upper_bound" apart in every report so that ratios against a
/// bound are never presented as ratios against OPT.
struct KnownOpt {
    enum class Kind { exact, upper_bound };
    double value = 0.0;
    Kind kind = Kind::upper_bound;
    std::string note;
};

inline std::string to_string(KnownOpt::Kind k) {
    return k == KnownOpt::Kind::exact ? "exact" : "upper_bound";
}

struct Cluster {
    PointRef center;
    std::vector<int> demand_indices;

    friend bool operator==(const Cluster& a, const Cluster& b) {
        return a.center == b.center && a.demand_indices == b.demand_indices;
    }
};

/// A facility-location instance: metric space, ordered demand multiset (the
/// canonical generator order, not an arrival order), and the uniform facility
/// opening cost. Immutable by convention after construction.
struct Instance {
    MetricSpace space;
    std::vector<PointRef> demands;
    double facility_cost = 1.0;
    std::optional<KnownOpt> known_opt;
    std::optional<std::vector<Cluster>> clusters;

    int demand_count() const { return static_cast<int>(demands.size()); }
};

/// Checks the structural invariants: demand descriptors valid, positive
/// facility cost, clusters (if present) partition the demand index set.
/// Throws std::invalid_argument naming the first offending piece.
inline void check_instance(const Instance& inst) {
    if (!(inst.facility_cost > 0.0))
        throw std::invalid_argument("instance: facility_cost must be positive");
    for (std::size_t i = 0; i < inst.demands.size(); ++i)
        if (!inst.space.valid_ref(inst.demands[i]))
            throw std::invalid_argument("instance: demands[" + std::to_string(i) +
                                        "] = " + inst.demands[i].to_string() +
                                        " is not a point of the space");
    if (inst.clusters) {
        std::vector<char> seen(inst.demands.size(), 0);
        for (std::size_t c = 0; c < inst.clusters->size(); ++c) {
            const auto& cluster = (*inst.clusters)[c];
            if (!inst.space.valid_ref(cluster.center))
                throw std::invalid_argument("instance: clusters[" + std::to_string(c) +
                                            "].center is not a point of the space");
            for (int idx : cluster.demand_indices) {
                if (idx < 0 || idx >= inst.demand_count())
                    throw std::invalid_argument("instance: clusters[" + std::to_string(c) +
                                                "] references demand index " +
                                                std::to_string(idx) + " out of range");
                if (seen[idx]++)
                    throw std::invalid_argument("instance: demand index " + std::to_string(idx) +
                                                " appears in more than one cluster");
            }
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i])
                throw std::invalid_argument("instance: clusters do not cover demand index " +
                                            std::to_string(i));
    }
}

}  // namespace ofl
