#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "ofl/instance.hpp"
#include "ofl/metric.hpp"
#include "ofl/offline.hpp"
#include "ofl/rng.hpp"

namespace ofl {

struct Adversarial {
    std::vector<int> order;
};

struct UniformRandom {};

/// Demands drawn independently from a distribution over the space's concrete
/// points; the sampled multiset is the trial's demand multiset.
struct Iid {
    std::vector<double> distribution;
    int n = 0;
};

/// rho-partial random order: per optimal cluster the adversary fixes a subset
/// A*_j of cardinality floor((1-rho)*n_j) in adversarial order; every other
/// in-cluster point draws a uniform slot among the adversarial points, and an
/// interleaver strategy fixes absolute positions across clusters while
/// preserving every cluster's relative order.
struct PartialRandom {
    double rho = 0.5;
    std::vector<std::vector<int>> adversarial_subsets;  // per cluster, demand indices
    std::vector<int> adversarial_order;                 // over the union of the subsets
    std::string interleaver = "cluster-blocks";
};

/// Same process, but A*_j is a uniformly random subset of the required
/// cardinality; the builtin adversary orders it farthest-from-center first.
struct PartialRandomRandomAdv {
    double rho = 0.5;
    std::string interleaver = "cluster-blocks";
};

using ArrivalModel =
    std::variant<Adversarial, UniformRandom, Iid, PartialRandom, PartialRandomRandomAdv>;

inline std::string model_name(const ArrivalModel& model) {
    if (std::holds_alternative<Adversarial>(model)) return "adversarial";
    if (std::holds_alternative<UniformRandom>(model)) return "uniform";
    if (std::holds_alternative<Iid>(model)) return "iid";
    if (std::holds_alternative<PartialRandom>(model)) return "partial";
    return "partial_random_adv";
}

inline std::vector<std::string> builtin_interleavers() {
    return {"cluster-blocks", "round-robin"};
}

/// User-supplied adversary strategy: merges the per-cluster sequences into one
/// order. It must preserve each cluster's relative order; make_order checks.
using InterleaverFn =
    std::function<std::vector<int>(const std::vector<std::vector<int>>&)>;

namespace arrival_detail {

inline std::map<std::string, InterleaverFn>& interleaver_registry() {
    static std::map<std::string, InterleaverFn> registry;
    return registry;
}

}  // namespace arrival_detail

/// Registers a custom interleaver strategy id (not thread-safe; register
/// before running trials). Builtin ids cannot be replaced.
inline void register_interleaver(const std::string& id, InterleaverFn fn) {
    for (const auto& builtin : builtin_interleavers())
        if (id == builtin)
            throw std::invalid_argument("register_interleaver: \"" + id + "\" is builtin");
    arrival_detail::interleaver_registry()[id] = std::move(fn);
}

/// One online sequence. Non-i.i.d. models fill indices (a permutation of the
/// instance's demand indices) and resolve points from them; the i.i.d. model
/// samples fresh points and leaves indices empty.
struct ArrivalSequence {
    std::vector<int> indices;
    std::vector<PointRef> points;
    bool iid_sampled = false;
};

namespace arrival_detail {

inline void interleave(const std::vector<std::vector<int>>& per_cluster,
                       const std::string& strategy, std::vector<int>& out) {
    if (strategy == "cluster-blocks") {
        for (const auto& seq : per_cluster)
            out.insert(out.end(), seq.begin(), seq.end());
        return;
    }
    if (strategy == "round-robin") {
        std::vector<std::size_t> pos(per_cluster.size(), 0);
        bool any = true;
        while (any) {
            any = false;
            for (std::size_t j = 0; j < per_cluster.size(); ++j) {
                if (pos[j] < per_cluster[j].size()) {
                    out.push_back(per_cluster[j][pos[j]++]);
                    any = true;
                }
            }
        }
        return;
    }
    const auto& registry = interleaver_registry();
    const auto it = registry.find(strategy);
    if (it == registry.end())
        throw std::invalid_argument("unknown interleaver \"" + strategy +
                                    "\"; builtin: cluster-blocks, round-robin");
    std::vector<int> merged = it->second(per_cluster);
    // A custom strategy must keep every demand and every cluster's relative order.
    std::size_t total = 0;
    for (const auto& seq : per_cluster) total += seq.size();
    if (merged.size() != total)
        throw std::invalid_argument("interleaver \"" + strategy + "\" changed the demand count");
    std::map<int, std::size_t> position;
    for (std::size_t i = 0; i < merged.size(); ++i) position[merged[i]] = i;
    if (position.size() != merged.size())
        throw std::invalid_argument("interleaver \"" + strategy + "\" duplicated a demand");
    for (const auto& seq : per_cluster) {
        std::size_t prev = 0;
        bool first = true;
        for (int idx : seq) {
            const auto found = position.find(idx);
            if (found == position.end())
                throw std::invalid_argument("interleaver \"" + strategy + "\" dropped a demand");
            if (!first && found->second < prev)
                throw std::invalid_argument("interleaver \"" + strategy +
                                            "\" broke a cluster's relative order");
            prev = found->second;
            first = false;
        }
    }
    out = std::move(merged);
}

/// Merges a cluster: every random-order point draws a slot in {0..|A|} and
/// lands between the slot-th and (slot+1)-th adversarial points; points
/// sharing a slot keep a uniformly random relative order (via the pre-shuffle).
inline std::vector<int> merge_cluster(const std::vector<int>& adv_in_order,
                                      std::vector<int> random_points, Rng& rng) {
    rng.shuffle(random_points);
    const std::size_t slots = adv_in_order.size() + 1;
    std::vector<std::vector<int>> bucket(slots);
    for (int u : random_points)
        bucket[rng.uniform_int(slots)].push_back(u);
    std::vector<int> merged;
    for (std::size_t s = 0; s < slots; ++s) {
        merged.insert(merged.end(), bucket[s].begin(), bucket[s].end());
        if (s < adv_in_order.size()) merged.push_back(adv_in_order[s]);
    }
    return merged;
}

inline int partial_subset_size(double rho, std::size_t cluster_size) {
    return static_cast<int>(std::floor((1.0 - rho) * static_cast<double>(cluster_size)));
}

inline void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("partial random order: rho must lie in (0,1)");
}

/// Farthest-from-center first, ties toward the lower demand index: the
/// builtin adversary choice for ordering adversarial points.
inline std::vector<int> far_first(const Instance& inst, const Cluster& cluster,
                                  std::vector<int> members) {
    std::vector<double> dstar(inst.demand_count(), 0.0);
    for (int idx : members)
        dstar[idx] = inst.space.distance_unchecked(cluster.center, inst.demands[idx]);
    std::sort(members.begin(), members.end(), [&](int a, int b) {
        if (dstar[a] != dstar[b]) return dstar[a] > dstar[b];
        return a < b;
    });
    return members;
}

}  // namespace arrival_detail

/// Builds the builtin adversary's PartialRandom model for an instance: per
/// cluster the farthest floor((1-rho)*n_j) demand points, ordered farthest
/// first. Clusters come from the instance or from the exact solver.
inline PartialRandom make_partial_adversary(const Instance& inst, double rho,
                                            std::string interleaver = "cluster-blocks") {
    arrival_detail::check_rho(rho);
    PartialRandom model;
    model.rho = rho;
    model.interleaver = std::move(interleaver);
    const auto clusters = clusters_for(inst);
    for (const auto& cluster : clusters) {
        auto ordered = arrival_detail::far_first(inst, cluster, cluster.demand_indices);
        const int a = arrival_detail::partial_subset_size(rho, cluster.demand_indices.size());
        ordered.resize(a);
        model.adversarial_order.insert(model.adversarial_order.end(), ordered.begin(),
                                       ordered.end());
        std::sort(ordered.begin(), ordered.end());
        model.adversarial_subsets.push_back(std::move(ordered));
    }
    return model;
}

/// Produces one online sequence under the given arrival model.
inline ArrivalSequence make_order(const Instance& inst, const ArrivalModel& model, Rng& rng) {
    ArrivalSequence seq;
    const int n = inst.demand_count();

    if (const auto* adv = std::get_if<Adversarial>(&model)) {
        for (int idx : adv->order)
            if (idx < 0 || idx >= n)
                throw std::invalid_argument("adversarial order references demand index " +
                                            std::to_string(idx) + " out of range");
        seq.indices = adv->order;
    } else if (std::holds_alternative<UniformRandom>(model)) {
        seq.indices.resize(n);
        std::iota(seq.indices.begin(), seq.indices.end(), 0);
        rng.shuffle(seq.indices);
    } else if (const auto* iid = std::get_if<Iid>(&model)) {
        if (iid->n < 1) throw std::invalid_argument("iid model: n must be >= 1");
        if (static_cast<int>(iid->distribution.size()) != inst.space.point_count())
            throw std::invalid_argument(
                "iid model: distribution size must match the space's point count");
        double total = 0.0;
        for (double w : iid->distribution) {
            if (w < 0.0) throw std::invalid_argument("iid model: negative probability");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("iid model: distribution must sum to 1 (within 1e-12)");
        std::vector<double> cum(iid->distribution.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cum.size(); ++i) {
            acc += iid->distribution[i];
            cum[i] = acc;
        }
        cum.back() = 1.0;
        seq.iid_sampled = true;
        seq.points.reserve(iid->n);
        for (int t = 0; t < iid->n; ++t) {
            const double u = rng.next_double();
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            seq.points.push_back(
                PointRef::point(static_cast<int>(std::distance(cum.begin(), it))));
        }
        return seq;
    } else if (const auto* pr = std::get_if<PartialRandom>(&model)) {
        arrival_detail::check_rho(pr->rho);
        const auto clusters = clusters_for(inst);
        if (pr->adversarial_subsets.size() != clusters.size())
            throw std::invalid_argument(
                "partial model: adversarial_subsets must have one entry per cluster (" +
                std::to_string(clusters.size()) + " clusters)");
        std::vector<int> order_pos(n, -1);
        for (std::size_t i = 0; i < pr->adversarial_order.size(); ++i) {
            const int idx = pr->adversarial_order[i];
            if (idx < 0 || idx >= n || order_pos[idx] >= 0)
                throw std::invalid_argument(
                    "partial model: adversarial_order must list each adversarial point once");
            order_pos[idx] = static_cast<int>(i);
        }
        std::vector<std::vector<int>> merged;
        for (std::size_t j = 0; j < clusters.size(); ++j) {
            const auto& cluster = clusters[j];
            const auto& subset = pr->adversarial_subsets[j];
            const int want = arrival_detail::partial_subset_size(pr->rho,
                                                                 cluster.demand_indices.size());
            if (static_cast<int>(subset.size()) != want)
                throw std::invalid_argument(
                    "partial model: cluster " + std::to_string(j) + " adversarial subset has " +
                    std::to_string(subset.size()) + " points, expected floor((1-rho)*n_j) = " +
                    std::to_string(want));
            std::vector<char> in_cluster(n, 0);
            for (int idx : cluster.demand_indices) in_cluster[idx] = 1;
            std::vector<char> in_subset(n, 0);
            std::vector<int> adv = subset;
            for (int idx : adv) {
                if (idx < 0 || idx >= n || !in_cluster[idx])
                    throw std::invalid_argument("partial model: adversarial subset of cluster " +
                                                std::to_string(j) +
                                                " contains a point outside the cluster");
                if (order_pos[idx] < 0)
                    throw std::invalid_argument(
                        "partial model: adversarial point missing from adversarial_order");
                in_subset[idx] = 1;
            }
            std::sort(adv.begin(), adv.end(),
                      [&](int a, int b) { return order_pos[a] < order_pos[b]; });
            std::vector<int> random_points;
            for (int idx : cluster.demand_indices)
                if (!in_subset[idx]) random_points.push_back(idx);
            merged.push_back(arrival_detail::merge_cluster(adv, std::move(random_points), rng));
        }
        arrival_detail::interleave(merged, pr->interleaver, seq.indices);
    } else {
        const auto& prr = std::get<PartialRandomRandomAdv>(model);
        arrival_detail::check_rho(prr.rho);
        const auto clusters = clusters_for(inst);
        std::vector<std::vector<int>> merged;
        for (const auto& cluster : clusters) {
            std::vector<int> members = cluster.demand_indices;
            rng.shuffle(members);
            const int a = arrival_detail::partial_subset_size(prr.rho,
                                                              cluster.demand_indices.size());
            std::vector<int> adv(members.begin(), members.begin() + a);
            std::vector<int> random_points(members.begin() + a, members.end());
            adv = arrival_detail::far_first(inst, cluster, std::move(adv));
            std::sort(random_points.begin(), random_points.end());
            merged.push_back(arrival_detail::merge_cluster(adv, std::move(random_points), rng));
        }
        arrival_detail::interleave(merged, prr.interleaver, seq.indices);
    }

    seq.points.reserve(seq.indices.size());
    for (int idx : seq.indices) seq.points.push_back(inst.demands[idx]);
    return seq;
}

}  // namespace ofl
