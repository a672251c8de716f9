#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofl/instance.hpp"
#include "ofl/metric.hpp"

namespace ofl {

/// Refused enumeration; the message names the bound that would be exceeded.
/// Never degrades to an approximation silently.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct OfflineSolution {
    FacilitySet facilities;
    std::vector<PointRef> assignment;      // per demand index: its facility
    std::vector<double> assignment_dist;   // per demand index
    double facility_total = 0.0;
    double assignment_total = 0.0;
    double total = 0.0;
};

namespace offline_detail {

inline void assign_nearest(const MetricSpace& space, std::span<const PointRef> demands,
                           const FacilitySet& facilities, OfflineSolution& sol) {
    sol.assignment.clear();
    sol.assignment_dist.clear();
    sol.assignment_total = 0.0;
    for (const auto& v : demands) {
        const auto near = nearest(space, facilities, v);
        sol.assignment.push_back(*near.facility);
        sol.assignment_dist.push_back(near.distance);
        sol.assignment_total += near.distance;
    }
}

inline OfflineSolution finish(const MetricSpace& space, std::span<const PointRef> demands,
                              double f, FacilitySet facilities) {
    OfflineSolution sol;
    sol.facilities = std::move(facilities);
    sol.facility_total = static_cast<double>(sol.facilities.size()) * f;
    assign_nearest(space, demands, sol.facilities, sol);
    sol.total = sol.facility_total + sol.assignment_total;
    return sol;
}

}  // namespace offline_detail

/// Default candidate centers: every point for explicit and euclidean spaces
/// (for euclidean the continuum is not searched; optimality is claimed only
/// over the listed points). For subset-points spaces: the x-points holding
/// demands plus the greedily chosen covering subset point — in that geometry
/// a subset point only beats x-points through the demand locations it covers,
/// so the top-coverage set is the only one that matters.
inline std::vector<PointRef> default_candidates(const MetricSpace& space,
                                                std::span<const PointRef> demands) {
    std::vector<PointRef> out;
    if (const auto* sp = std::get_if<SubsetPointsMetric>(&space.rep())) {
        std::vector<int> count(sp->m, 0);
        for (const auto& d : demands)
            if (!d.is_subset()) ++count[d.x];
        std::vector<int> locs;
        for (int i = 0; i < sp->m; ++i)
            if (count[i] > 0) locs.push_back(i);
        for (int i : locs) out.push_back(PointRef::point(i));
        // Covering set: demand locations by multiplicity (desc, index asc),
        // truncated to subset_size, padded with the lowest unused indices.
        std::vector<int> by_mult = locs;
        std::sort(by_mult.begin(), by_mult.end(), [&](int a, int b) {
            if (count[a] != count[b]) return count[a] > count[b];
            return a < b;
        });
        if (static_cast<int>(by_mult.size()) > sp->subset_size)
            by_mult.resize(sp->subset_size);
        std::vector<char> used(sp->m, 0);
        for (int i : by_mult) used[i] = 1;
        for (int i = 0; i < sp->m && static_cast<int>(by_mult.size()) < sp->subset_size; ++i)
            if (!used[i]) {
                used[i] = 1;
                by_mult.push_back(i);
            }
        out.push_back(PointRef::subset_point(std::move(by_mult)));
        if (out.size() == 1) out.insert(out.begin(), PointRef::point(0));  // no demands
        return out;
    }
    for (int i = 0; i < space.point_count(); ++i) out.push_back(PointRef::point(i));
    return out;
}

/// Upper-bound oracle and pruning incumbent: opens the facility with the best
/// marginal cost decrease until no facility is worth its opening cost.
inline OfflineSolution greedy_heuristic(const MetricSpace& space,
                                        std::span<const PointRef> demands, double f,
                                        std::span<const PointRef> candidates) {
    if (candidates.empty())
        throw std::invalid_argument("greedy_heuristic: candidate set must not be empty");
    std::vector<double> cur(demands.size(), kInfiniteDistance);
    FacilitySet open;
    for (;;) {
        const PointRef* best = nullptr;
        double best_saving = 0.0;
        for (const auto& c : candidates) {
            if (open.contains(c)) continue;
            double saving = -f;
            for (std::size_t i = 0; i < demands.size(); ++i) {
                const double d = space.distance_unchecked(c, demands[i]);
                if (open.empty())
                    saving += (cur[i] == kInfiniteDistance ? -d : 0.0);
                else if (d < cur[i])
                    saving += cur[i] - d;
            }
            // With nothing open yet any facility is mandatory; pick the one
            // with the least total cost (encoded as the largest saving).
            if (best == nullptr || saving > best_saving) {
                best = &c;
                best_saving = saving;
            }
        }
        if (best == nullptr) break;
        if (!open.empty() && best_saving <= 0.0) break;
        open.insert(*best);
        for (std::size_t i = 0; i < demands.size(); ++i)
            cur[i] = std::min(cur[i], space.distance_unchecked(*best, demands[i]));
        if (open.size() == candidates.size()) break;
    }
    return offline_detail::finish(space, demands, f, std::move(open));
}

inline OfflineSolution greedy_heuristic(const Instance& inst) {
    const auto candidates = default_candidates(inst.space, inst.demands);
    return greedy_heuristic(inst.space, inst.demands, inst.facility_cost, candidates);
}

/// Exact optimum over all non-empty subsets of the candidate centers, by
/// enumeration with an opening-cost prune against the greedy incumbent.
/// Deterministic tie-breaking: the lexicographically smallest facility set
/// among the minima. Refuses upfront when the enumeration would exceed
/// max_subsets or the candidate list exceeds the hard guard of 24.
inline OfflineSolution solve_exact(const MetricSpace& space, std::span<const PointRef> demands,
                                   double f, std::span<const PointRef> candidates,
                                   std::uint64_t max_subsets = (1ull << 24), bool prune = true) {
    if (candidates.empty())
        throw std::invalid_argument("solve_exact: candidate set must not be empty");
    constexpr int kMaxCandidates = 24;
    const int c = static_cast<int>(candidates.size());
    if (c > kMaxCandidates)
        throw BudgetExceeded("solve_exact: " + std::to_string(c) +
                             " candidate centers exceed the guard of " +
                             std::to_string(kMaxCandidates) + " (2^" + std::to_string(c) +
                             " subsets); pass a smaller candidate set or use an analytic bound");
    const std::uint64_t subsets = (1ull << c) - 1;
    if (subsets > max_subsets)
        throw BudgetExceeded("solve_exact: " + std::to_string(subsets) +
                             " subsets exceed the budget of " + std::to_string(max_subsets));

    std::vector<PointRef> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const int nc = static_cast<int>(sorted.size());

    // Distances candidate x demand, computed once.
    std::vector<std::vector<double>> dist(nc, std::vector<double>(demands.size()));
    for (int i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < demands.size(); ++j)
            dist[i][j] = space.distance_unchecked(sorted[i], demands[j]);

    double best_cost = kInfiniteDistance;
    if (prune) best_cost = greedy_heuristic(space, demands, f, sorted).total;
    std::vector<int> best_set;
    bool have_best = false;
    const double tie_eps = 1e-12;

    std::vector<int> members;
    for (std::uint64_t mask = 1; mask <= (1ull << nc) - 1; ++mask) {
        const int opened = std::popcount(mask);
        const double open_cost = opened * f;
        if (prune && open_cost > best_cost + tie_eps) continue;
        members.clear();
        for (int i = 0; i < nc; ++i)
            if (mask & (1ull << i)) members.push_back(i);
        double cost = open_cost;
        for (std::size_t j = 0; j < demands.size(); ++j) {
            double d = kInfiniteDistance;
            for (int i : members) d = std::min(d, dist[i][j]);
            cost += d;
            if (prune && cost > best_cost + tie_eps) break;
        }
        if (cost < best_cost - tie_eps || !have_best) {
            best_cost = cost;
            best_set = members;
            have_best = true;
        } else if (cost <= best_cost + tie_eps) {
            // Tie: keep the lexicographically smaller facility set (candidate
            // indices follow the descriptor order, so member lists compare
            // like descriptor lists).
            if (std::lexicographical_compare(members.begin(), members.end(), best_set.begin(),
                                             best_set.end()))
                best_set = members;
        }
    }

    FacilitySet facilities;
    for (int i : best_set) facilities.insert(sorted[i]);
    return offline_detail::finish(space, demands, f, std::move(facilities));
}

inline OfflineSolution solve_exact(const Instance& inst,
                                   std::uint64_t max_subsets = (1ull << 24), bool prune = true) {
    const auto candidates = default_candidates(inst.space, inst.demands);
    return solve_exact(inst.space, inst.demands, inst.facility_cost, candidates, max_subsets,
                       prune);
}

/// Exact optimum for a subset-points instance whose demands occupy at most
/// subset_size distinct x-locations. In that geometry a single all-covering
/// subset point dominates every other subset point and every off-demand
/// x-point, so the optimum opens x-facilities at the top-t multiplicity
/// locations, with or without the covering point; minimize over t.
inline OfflineSolution solve_subset_points(const MetricSpace& space,
                                           std::span<const PointRef> demands, double f) {
    const auto& sp = space.subset_rep();
    std::vector<int> count(sp.m, 0);
    for (const auto& d : demands) {
        if (d.is_subset())
            throw std::invalid_argument("solve_subset_points: demands must be x-points");
        ++count[d.x];
    }
    std::vector<int> locs;
    for (int i = 0; i < sp.m; ++i)
        if (count[i] > 0) locs.push_back(i);
    const int r = static_cast<int>(locs.size());
    if (r > sp.subset_size)
        throw std::invalid_argument("solve_subset_points: " + std::to_string(r) +
                                    " distinct demand locations exceed subset_size " +
                                    std::to_string(sp.subset_size) +
                                    "; no single covering subset point exists");
    const int n = static_cast<int>(demands.size());

    if (n == 0) {
        FacilitySet fs;
        fs.insert(PointRef::point(0));
        return offline_detail::finish(space, demands, f, std::move(fs));
    }

    // Locations by multiplicity (desc, index asc); x-facilities take the top t.
    std::vector<int> by_mult = locs;
    std::sort(by_mult.begin(), by_mult.end(), [&](int a, int b) {
        if (count[a] != count[b]) return count[a] > count[b];
        return a < b;
    });

    // Covering subset point: all demand locations plus the lowest unused.
    std::vector<int> cover = locs;
    {
        std::vector<char> used(sp.m, 0);
        for (int i : cover) used[i] = 1;
        for (int i = 0; i < sp.m && static_cast<int>(cover.size()) < sp.subset_size; ++i)
            if (!used[i]) {
                used[i] = 1;
                cover.push_back(i);
            }
        std::sort(cover.begin(), cover.end());
    }

    double best_cost = kInfiniteDistance;
    int best_t = 0;
    bool best_with_cover = true;
    int covered = 0;  // demands at the top-t locations
    for (int t = 0; t <= r; ++t) {
        if (t > 0) covered += count[by_mult[t - 1]];
        const double with_cover = (t + 1) * f + (n - covered) * (sp.delta / 2.0);
        if (with_cover < best_cost - 1e-12) {
            best_cost = with_cover;
            best_t = t;
            best_with_cover = true;
        }
        if (t >= 1) {
            const double without = t * f + (n - covered) * sp.delta;
            if (without < best_cost - 1e-12) {
                best_cost = without;
                best_t = t;
                best_with_cover = false;
            }
        }
    }

    FacilitySet facilities;
    std::vector<int> chosen(by_mult.begin(), by_mult.begin() + best_t);
    for (int i : chosen) facilities.insert(PointRef::point(i));
    if (best_with_cover) facilities.insert(PointRef::subset_point(cover));
    return offline_detail::finish(space, demands, f, std::move(facilities));
}

/// Clusters of a solution: demand indices grouped by assigned facility, the
/// facility being the cluster center; clusters ordered by center descriptor.
inline std::vector<Cluster> clusters_of(const OfflineSolution& sol) {
    std::vector<Cluster> clusters;
    for (const auto& fac : sol.facilities) {
        Cluster c;
        c.center = fac;
        for (std::size_t i = 0; i < sol.assignment.size(); ++i)
            if (sol.assignment[i] == fac) c.demand_indices.push_back(static_cast<int>(i));
        if (!c.demand_indices.empty()) clusters.push_back(std::move(c));
    }
    return clusters;
}

/// Exact-OPT clustering for an instance: uses stored clusters when present,
/// otherwise solves exactly and extracts them.
inline std::vector<Cluster> clusters_for(const Instance& inst,
                                         std::uint64_t max_subsets = (1ull << 24)) {
    if (inst.clusters) return *inst.clusters;
    if (inst.space.is_subset_points()) return clusters_of(solve_subset_points(inst.space, inst.demands, inst.facility_cost));
    return clusters_of(solve_exact(inst, max_subsets));
}

}  // namespace ofl
