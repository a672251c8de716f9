#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofl/instance.hpp"

namespace ofl {

enum class Family { star, clique, subset_iid, fotakis };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::star: return "star";
        case Family::clique: return "clique";
        case Family::subset_iid: return "subset_iid";
        case Family::fotakis: return "fotakis";
    }
    return "?";
}

/// Family-specific parameters; only the fields the family uses are read.
struct GeneratorParams {
    Family family = Family::star;
    int k = 0;        // star, clique
    double delta = 0; // clique
    int n = 0;        // subset_iid, fotakis

    std::string describe() const {
        switch (family) {
            case Family::star: return "k=" + std::to_string(k);
            case Family::clique: {
                std::string d = std::to_string(delta);
                d.erase(d.find_last_not_of('0') + 1);
                if (!d.empty() && d.back() == '.') d.pop_back();
                return "delta=" + d + ";k=" + std::to_string(k);
            }
            case Family::subset_iid: return "n=" + std::to_string(n);
            case Family::fotakis: return "n=" + std::to_string(n);
        }
        return "?";
    }
};

/// k leaf points u_1..u_k pairwise 2*delta apart plus a hub at distance delta
/// from every leaf, delta = 1/(4*sqrt(k)). Demands are the k leaves; the hub
/// is the optimal center. Represented as a subset-points space with m = k and
/// subset_size = k, whose single implicit subset point is exactly the hub, so
/// large k stays O(1) in memory.
inline Instance gen_star(int k) {
    if (k < 2) throw std::invalid_argument("gen_star: k must be >= 2");
    const double delta = 1.0 / (4.0 * std::sqrt(static_cast<double>(k)));
    Instance inst;
    inst.space = MetricSpace::subset_points(k, k, 2.0 * delta);
    inst.demands.reserve(k);
    for (int i = 0; i < k; ++i) inst.demands.push_back(PointRef::point(i));
    inst.facility_cost = 1.0;
    inst.known_opt = KnownOpt{1.0 + k * delta, KnownOpt::Kind::upper_bound,
                              "open the hub, serve every demand at delta"};
    std::vector<int> hub_set(k);
    std::iota(hub_set.begin(), hub_set.end(), 0);
    std::vector<int> all(k);
    std::iota(all.begin(), all.end(), 0);
    inst.clusters = std::vector<Cluster>{
        Cluster{PointRef::subset_point(std::move(hub_set)), std::move(all)}};
    return inst;
}

/// k points pairwise delta apart, k demands at each point (k^2 demands).
/// Demand index j*k + t is the t-th copy at point j. known_opt = k is the
/// one-facility-per-point upper bound; it is the exact optimum iff
/// delta >= 1/k (below that a single facility is cheaper).
inline Instance gen_clique(double delta, int k) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("gen_clique: delta must lie in (0,1)");
    if (k < 2) throw std::invalid_argument("gen_clique: k must be >= 2");
    std::vector<std::vector<double>> dist(k, std::vector<double>(k, delta));
    for (int i = 0; i < k; ++i) dist[i][i] = 0.0;
    Instance inst;
    inst.space = MetricSpace::explicit_matrix(std::move(dist));
    inst.demands.reserve(static_cast<std::size_t>(k) * k);
    std::vector<Cluster> clusters;
    clusters.reserve(k);
    for (int j = 0; j < k; ++j) {
        Cluster c;
        c.center = PointRef::point(j);
        for (int t = 0; t < k; ++t) {
            c.demand_indices.push_back(j * k + t);
            inst.demands.push_back(PointRef::point(j));
        }
        clusters.push_back(std::move(c));
    }
    inst.facility_cost = 1.0;
    inst.known_opt = KnownOpt{static_cast<double>(k), KnownOpt::Kind::upper_bound,
                              "one facility per point"};
    inst.clusters = std::move(clusters);
    return inst;
}

/// Instance template plus sampling distribution for the i.i.d. lower-bound
/// family: m = n^2 x-points pairwise 1 apart, subset points at 1/2 from their
/// covering sets, demands drawn uniformly (n draws per trial, sampled by the
/// i.i.d. arrival model at run time, so the template carries no demands).
struct SubsetIidFamily {
    Instance instance;
    std::vector<double> distribution;  // over the m x-points
    int draws = 0;                     // demand count per trial
};

inline SubsetIidFamily gen_subset_iid(int n) {
    if (n < 2) throw std::invalid_argument("gen_subset_iid: n must be >= 2");
    const int m = n * n;
    SubsetIidFamily fam;
    fam.instance.space = MetricSpace::subset_points(m, n, 1.0);
    fam.instance.facility_cost = 1.0;
    fam.instance.known_opt =
        KnownOpt{1.0 + n / 2.0, KnownOpt::Kind::upper_bound,
                 "a covering subset point serves every arrival at 1/2 (in expectation)"};
    fam.distribution.assign(m, 1.0 / m);
    fam.draws = n;
    return fam;
}

/// Hard instance for the deterministic potential algorithm: m = 2n x-points
/// scaled by delta = 1/sqrt(n-1), demands x_1..x_n in that fixed adversarial
/// order. Requires n-1 = 4t^2 so that 2/delta and (n-1)*delta/2 are integers.
struct FotakisFamily {
    Instance instance;
    std::vector<int> adversarial_order;
    double delta = 0.0;
};

inline FotakisFamily gen_fotakis(int n) {
    if (n < 5) throw std::invalid_argument("gen_fotakis: n must be >= 5");
    const int rounds = n - 1;
    const int root = static_cast<int>(std::lround(std::sqrt(rounds / 4.0)));
    if (rounds != 4 * root * root)
        throw std::invalid_argument("gen_fotakis: n-1 must equal 4*t^2 for integer t "
                                    "(n in {5, 17, 37, 65, ...})");
    const double delta = 1.0 / std::sqrt(static_cast<double>(rounds));
    FotakisFamily fam;
    fam.delta = delta;
    fam.instance.space = MetricSpace::subset_points(2 * n, n, delta);
    fam.instance.facility_cost = 1.0;
    for (int i = 0; i < n; ++i) fam.instance.demands.push_back(PointRef::point(i));
    fam.instance.known_opt =
        KnownOpt{1.0 + n * delta / 2.0, KnownOpt::Kind::upper_bound,
                 "a covering subset point serves every demand at delta/2"};
    fam.adversarial_order.resize(n);
    std::iota(fam.adversarial_order.begin(), fam.adversarial_order.end(), 0);
    return fam;
}

/// Materializes the instance for a parameter record (subset_iid yields the
/// demand-free template; pair it with an i.i.d. arrival model).
inline Instance make_instance(const GeneratorParams& params) {
    switch (params.family) {
        case Family::star: return gen_star(params.k);
        case Family::clique: return gen_clique(params.delta, params.k);
        case Family::subset_iid: return gen_subset_iid(params.n).instance;
        case Family::fotakis: return gen_fotakis(params.n).instance;
    }
    throw std::invalid_argument("make_instance: unknown family");
}

}  // namespace ofl
