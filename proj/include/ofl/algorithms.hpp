#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ofl/instance.hpp"
#include "ofl/metric.hpp"
#include "ofl/rng.hpp"

namespace ofl {

/// Facility-opening rule. clamped_linear with q = 1 is Meyerson's original
/// rule min{d/f, 1}; piecewise_linear switches to probability 1 only once
/// d/f exceeds 1 (the two agree for q = 1). fotakis_potential marks the
/// deterministic potential algorithm, which has its own runner.
struct OpeningRule {
    enum class Kind { clamped_linear, piecewise_linear, fotakis_potential };
    Kind kind = Kind::clamped_linear;
    double q = 1.0;

    bool is_linear() const { return kind != Kind::fotakis_potential; }

    /// Opening probability g(d) under facility cost f. Distances are rescaled
    /// by f internally, so f != 1 behaves like the unit-cost instance with all
    /// distances divided by f.
    double opening_probability(double dist, double facility_cost) const {
        const double x = dist / facility_cost;
        if (kind == Kind::clamped_linear) return std::min(q * x, 1.0);
        if (kind == Kind::piecewise_linear) return x <= 1.0 ? q * x : 1.0;
        throw std::invalid_argument("opening_probability: not defined for the potential rule");
    }

    static OpeningRule clamped(double q) { return {Kind::clamped_linear, q}; }
    static OpeningRule piecewise(double q) { return {Kind::piecewise_linear, q}; }
    static OpeningRule fotakis() { return {Kind::fotakis_potential, 0.0}; }
};

inline std::string to_string(OpeningRule::Kind k) {
    switch (k) {
        case OpeningRule::Kind::clamped_linear: return "clamped_linear";
        case OpeningRule::Kind::piecewise_linear: return "piecewise_linear";
        case OpeningRule::Kind::fotakis_potential: return "fotakis_potential";
    }
    return "?";
}

struct RoundRecord {
    PointRef demand;
    double pre_distance = kInfiniteDistance;  // d(F_{l-1}, v), +inf before any opening
    double coin_probability = 0.0;            // g(d) for linear rules; 0/1 for the potential rule
    bool opened = false;
    PointRef opened_at;                       // meaningful only when opened
    double facility_cost_paid = 0.0;
    double assignment_cost_paid = 0.0;
    int facilities_after = 0;
    double potential = 0.0;                   // potential rule only: the round's max potential
};

struct RunRecord {
    std::vector<RoundRecord> rounds;
    FacilitySet facilities;
    double facility_total = 0.0;
    double assignment_total = 0.0;
    double grand_total = 0.0;
};

/// Read-only view of the pre-round facility distances, handed to run hooks so
/// analysis instrumentation can ask "how far is u from F_{l-1}" for points
/// that have not arrived yet.
class PreRoundDistances {
public:
    PreRoundDistances(const MetricSpace& space, const FacilitySet& facilities,
                      const std::vector<double>* nearest_x)
        : space_(space), facilities_(facilities), nearest_x_(nearest_x) {}

    double operator()(const PointRef& p) const {
        if (nearest_x_ != nullptr && !p.is_subset()) return (*nearest_x_)[p.x];
        return nearest(space_, facilities_, p).distance;
    }

private:
    const MetricSpace& space_;
    const FacilitySet& facilities_;
    const std::vector<double>* nearest_x_;
};

namespace run_detail {

struct NoopHook {
    void operator()(int, const PointRef&, double, double, bool, const PreRoundDistances&) const {}
};

}  // namespace run_detail

/// Online loop shared by DistProb and the parameterized variants: per round,
/// compute d = d(F_{l-1}, v), flip one coin with probability g(d) (the draw is
/// consumed even when g(d) is 0 or 1, keeping rng alignment instance-free),
/// open at v on heads, then assign v to its nearest open facility.
///
/// When every demand in seq is a concrete point, nearest distances are kept
/// incrementally per location (O(1) per round, O(#points) per opening).
template <class Hook = run_detail::NoopHook>
RunRecord run_linear(const MetricSpace& space, std::span<const PointRef> seq,
                     double facility_cost, const OpeningRule& rule, Rng& rng,
                     Hook&& hook = Hook{}) {
    if (!rule.is_linear())
        throw std::invalid_argument("run_rofl: the potential rule needs run_fotakis");
    bool fast = true;
    for (const auto& p : seq) {
        space.require_valid(p);
        if (p.is_subset()) fast = false;
    }

    RunRecord rec;
    rec.rounds.reserve(seq.size());
    std::vector<double> nearest_x;
    if (fast) nearest_x.assign(space.point_count(), kInfiniteDistance);
    const PreRoundDistances pre(space, rec.facilities, fast ? &nearest_x : nullptr);

    for (std::size_t l = 0; l < seq.size(); ++l) {
        const PointRef& v = seq[l];
        const double d = fast ? nearest_x[v.x] : nearest(space, rec.facilities, v).distance;
        const double p = rule.opening_probability(d, facility_cost);
        const bool opened = rng.bernoulli(p);
        hook(static_cast<int>(l), v, d, p, opened, pre);

        RoundRecord round;
        round.demand = v;
        round.pre_distance = d;
        round.coin_probability = p;
        round.opened = opened;
        if (opened) {
            rec.facilities.insert(v);
            round.opened_at = v;
            round.facility_cost_paid = facility_cost;
            round.assignment_cost_paid = 0.0;
            if (fast) {
                for (int i = 0; i < space.point_count(); ++i)
                    nearest_x[i] = std::min(nearest_x[i], space.point_distance(v.x, i));
            }
        } else {
            round.assignment_cost_paid = d;
        }
        round.facilities_after = static_cast<int>(rec.facilities.size());
        rec.facility_total += round.facility_cost_paid;
        rec.assignment_total += round.assignment_cost_paid;
        rec.rounds.push_back(std::move(round));
    }
    rec.grand_total = rec.facility_total + rec.assignment_total;
    return rec;
}

namespace run_detail {

inline std::vector<PointRef> resolve_order(const Instance& inst, std::span<const int> order) {
    std::vector<PointRef> seq;
    seq.reserve(order.size());
    for (int idx : order) {
        if (idx < 0 || idx >= inst.demand_count())
            throw std::out_of_range("order references demand index " + std::to_string(idx) +
                                    " outside 0.." + std::to_string(inst.demand_count() - 1));
        seq.push_back(inst.demands[idx]);
    }
    return seq;
}

}  // namespace run_detail

/// DistProb / ROFL_q on an instance, arrivals given as demand indices.
inline RunRecord run_rofl(const Instance& inst, std::span<const int> order,
                          const OpeningRule& rule, Rng& rng) {
    const auto seq = run_detail::resolve_order(inst, order);
    return run_linear(inst.space, seq, inst.facility_cost, rule, rng);
}

// ---------------------------------------------------------------------------
// Deterministic potential algorithm
// ---------------------------------------------------------------------------

/// One served demand as the potential oracle sees it: its x-location and its
/// current distance to the nearest open facility.
struct ServedDemand {
    int location = 0;
    double nearest_dist = 0.0;
};

struct PotentialArgmax {
    PointRef point;
    double value = 0.0;
};

/// Argmax of the potential p(z) = sum_i max{D_i - d(z, v_i), 0} over all
/// points of a subset-points space, without enumerating subset points.
///
/// For a subset point s_I the potential decomposes as a base term (every
/// demand at distance delta) plus a per-location gain for the locations I
/// covers, so the maximizing I keeps the subset_size locations with largest
/// gain (ties toward lower index). x-point potentials decompose the same way
/// with the gain of standing exactly on a location.
inline PotentialArgmax subset_potential_argmax(const SubsetPointsMetric& sp,
                                               std::span<const ServedDemand> served) {
    const double delta = sp.delta;
    double base = 0.0;
    // Gains keyed by location; only locations holding served demands can gain.
    std::vector<int> locs;
    std::vector<double> x_gain, s_gain;
    std::vector<int> loc_slot(sp.m, -1);
    for (const auto& d : served) {
        base += std::max(d.nearest_dist - delta, 0.0);
        int slot = loc_slot[d.location];
        if (slot < 0) {
            slot = static_cast<int>(locs.size());
            loc_slot[d.location] = slot;
            locs.push_back(d.location);
            x_gain.push_back(0.0);
            s_gain.push_back(0.0);
        }
        x_gain[slot] += d.nearest_dist - std::max(d.nearest_dist - delta, 0.0);
        s_gain[slot] +=
            std::max(d.nearest_dist - delta / 2.0, 0.0) - std::max(d.nearest_dist - delta, 0.0);
    }

    // Best x-point: largest own-location gain, lowest index on ties (index 0
    // when no location gains anything).
    int best_x = 0;
    double best_x_gain = 0.0;
    for (std::size_t s = 0; s < locs.size(); ++s) {
        if (x_gain[s] > best_x_gain ||
            (x_gain[s] == best_x_gain && best_x_gain > 0.0 && locs[s] < best_x)) {
            best_x = locs[s];
            best_x_gain = x_gain[s];
        }
    }

    // Best subset point: top subset_size locations by gain (desc), index (asc);
    // zero-gain slots are filled with the lowest unused indices.
    std::vector<std::size_t> order(locs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s_gain[a] != s_gain[b]) return s_gain[a] > s_gain[b];
        return locs[a] < locs[b];
    });
    std::vector<int> chosen;
    double subset_gain = 0.0;
    for (std::size_t i = 0; i < order.size() && static_cast<int>(chosen.size()) < sp.subset_size;
         ++i) {
        if (s_gain[order[i]] <= 0.0) break;
        chosen.push_back(locs[order[i]]);
        subset_gain += s_gain[order[i]];
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<char> used(sp.m, 0);
    for (int c : chosen) used[c] = 1;
    for (int i = 0; i < sp.m && static_cast<int>(chosen.size()) < sp.subset_size; ++i)
        if (!used[i]) {
            used[i] = 1;
            chosen.push_back(i);
        }
    std::sort(chosen.begin(), chosen.end());

    PotentialArgmax best;
    // On exact ties the x-point wins: point ids precede subset descriptors in
    // the fixed descriptor order.
    if (base + best_x_gain >= base + subset_gain) {
        best.point = PointRef::point(best_x);
        best.value = base + best_x_gain;
    } else {
        best.point = PointRef::subset_point(std::move(chosen));
        best.value = base + subset_gain;
    }
    return best;
}

enum class FotakisTieBreak {
    lowest_descriptor,
    /// Reproduces the hard-instance adversary: whenever a subset point attains
    /// the maximal potential, prefer the one covering exactly the demand
    /// locations seen so far, padded with the highest-index unused x-points,
    /// so it is far from everything still to come.
    adversarial_subset,
};

enum class FotakisMode {
    recompute,  // recompute served distances from scratch against F_{l-1} each round
    cached,     // maintain them incrementally; must agree bit-for-bit with recompute
};

namespace run_detail {

inline double potential_at(const MetricSpace& space, const PointRef& z,
                           std::span<const PointRef> served_pts,
                           std::span<const double> served_dist) {
    double p = 0.0;
    for (std::size_t i = 0; i < served_pts.size(); ++i)
        p += std::max(served_dist[i] - space.distance_unchecked(z, served_pts[i]), 0.0);
    return p;
}

}  // namespace run_detail

/// Fotakis' deterministic algorithm: on each arrival find z maximizing the
/// potential sum_i max{d(F_{l-1}, v_i) - d(z, v_i), 0} over all metric points;
/// open z when the potential reaches the facility cost (weak inequality, with
/// a 1e-9 slack because contributions like 1/12 are not binary-exact). The
/// first arrival always opens at itself (the empty-set potential is infinite).
inline RunRecord run_fotakis_points(const MetricSpace& space, std::span<const PointRef> seq,
                                    double facility_cost,
                                    FotakisTieBreak tie_break = FotakisTieBreak::lowest_descriptor,
                                    FotakisMode mode = FotakisMode::recompute) {
    const double f = facility_cost;
    const double open_slack = 1e-9 * f;

    const auto* sp = std::get_if<SubsetPointsMetric>(&space.rep());
    for (const auto& p : seq) {
        space.require_valid(p);
        if (sp != nullptr && p.is_subset())
            throw std::invalid_argument(
                "run_fotakis: the subset-point potential oracle supports x-point demands only");
    }

    RunRecord rec;
    rec.rounds.reserve(seq.size());
    std::vector<PointRef> served;
    std::vector<double> served_dist;

    for (std::size_t l = 0; l < seq.size(); ++l) {
        const PointRef& v = seq[l];
        RoundRecord round;
        round.demand = v;

        if (rec.facilities.empty()) {
            round.pre_distance = kInfiniteDistance;
            round.potential = kInfiniteDistance;
            round.coin_probability = 1.0;
            round.opened = true;
            round.opened_at = v;
            round.facility_cost_paid = f;
            rec.facilities.insert(v);
            served.push_back(v);
            served_dist.push_back(0.0);
        } else {
            served.push_back(v);
            served_dist.push_back(0.0);
            if (mode == FotakisMode::recompute) {
                for (std::size_t i = 0; i < served.size(); ++i)
                    served_dist[i] = nearest(space, rec.facilities, served[i]).distance;
            } else {
                served_dist.back() = nearest(space, rec.facilities, v).distance;
            }
            round.pre_distance = served_dist.back();

            PotentialArgmax best;
            std::vector<double> subset_sgain;  // reused for the adversarial recheck
            if (sp != nullptr) {
                std::vector<ServedDemand> sd(served.size());
                for (std::size_t i = 0; i < served.size(); ++i)
                    sd[i] = {served[i].x, served_dist[i]};
                best = subset_potential_argmax(*sp, sd);
            } else {
                best.point = PointRef::point(0);
                best.value = -1.0;
                for (int z = 0; z < space.point_count(); ++z) {
                    const double p = run_detail::potential_at(space, PointRef::point(z), served,
                                                              served_dist);
                    if (p > best.value) {
                        best.value = p;
                        best.point = PointRef::point(z);
                    }
                }
            }
            round.potential = best.value;

            if (best.value >= f - open_slack) {
                PointRef to_open = best.point;
                if (tie_break == FotakisTieBreak::adversarial_subset && sp != nullptr) {
                    std::vector<char> seen(sp->m, 0);
                    for (const auto& s : served) seen[s.x] = 1;
                    std::vector<int> adv;
                    for (int i = 0; i < sp->m; ++i)
                        if (seen[i]) adv.push_back(i);
                    if (static_cast<int>(adv.size()) <= sp->subset_size) {
                        for (int i = sp->m - 1;
                             i >= 0 && static_cast<int>(adv.size()) < sp->subset_size; --i)
                            if (!seen[i]) adv.push_back(i);
                        PointRef candidate = PointRef::subset_point(std::move(adv));
                        const double p = run_detail::potential_at(space, candidate, served,
                                                                  served_dist);
                        if (p >= best.value - open_slack) to_open = std::move(candidate);
                    }
                }
                round.opened = true;
                round.coin_probability = 1.0;
                round.opened_at = to_open;
                round.facility_cost_paid = f;
                rec.facilities.insert(to_open);
                if (mode == FotakisMode::cached) {
                    for (std::size_t i = 0; i < served.size(); ++i)
                        served_dist[i] = std::min(
                            served_dist[i], space.distance_unchecked(to_open, served[i]));
                }
            }
            round.assignment_cost_paid = nearest(space, rec.facilities, v).distance;
        }

        round.facilities_after = static_cast<int>(rec.facilities.size());
        rec.facility_total += round.facility_cost_paid;
        rec.assignment_total += round.assignment_cost_paid;
        rec.rounds.push_back(std::move(round));
    }
    rec.grand_total = rec.facility_total + rec.assignment_total;
    return rec;
}

inline RunRecord run_fotakis(const Instance& inst, std::span<const int> order,
                             FotakisTieBreak tie_break = FotakisTieBreak::lowest_descriptor,
                             FotakisMode mode = FotakisMode::recompute) {
    const auto seq = run_detail::resolve_order(inst, order);
    return run_fotakis_points(inst.space, seq, inst.facility_cost, tie_break, mode);
}

}  // namespace ofl
