#include <doctest.h>

#include <cmath>

#include "ofl/generators.hpp"
#include "ofl/offline.hpp"
#include "ofl/rng.hpp"

using namespace ofl;

namespace {

Instance random_euclidean_instance(Rng& rng, int max_points = 8, int max_demands = 10) {
    const int n = 2 + static_cast<int>(rng.uniform_int(max_points - 1));
    std::vector<std::vector<double>> pts(n, std::vector<double>(2));
    for (auto& p : pts)
        for (auto& c : p) c = rng.next_double() * 2.0;
    Instance inst;
    inst.space = MetricSpace::euclidean(std::move(pts));
    const int nd = 1 + static_cast<int>(rng.uniform_int(max_demands));
    for (int i = 0; i < nd; ++i)
        inst.demands.push_back(PointRef::point(static_cast<int>(rng.uniform_int(n))));
    inst.facility_cost = 0.25 + rng.next_double();
    return inst;
}

}  // namespace

TEST_SUITE("offline") {

TEST_CASE("exact solver on the examples") {
    const auto star = gen_star(4);
    const auto sol = solve_exact(star.space, star.demands, 1.0, all_points(star.space));
    CHECK(sol.total == doctest::Approx(1.5));
    REQUIRE(sol.facilities.size() == 1);
    CHECK(sol.facilities.items()[0].is_subset());

    auto single = Instance{MetricSpace::explicit_matrix({{0.0}}), {PointRef::point(0)}, 1.0};
    CHECK(solve_exact(single).total == doctest::Approx(1.0));

    const auto clique = gen_clique(0.5, 2);
    const auto csol = solve_exact(clique);
    CHECK(csol.total == doctest::Approx(2.0));
    REQUIRE(csol.facilities.size() == 1);  // lexicographic tie-break picks {x0}
    CHECK(csol.facilities.items()[0] == PointRef::point(0));
}

TEST_CASE("greedy heuristic on the examples") {
    const auto star = gen_star(4);
    const auto g = greedy_heuristic(star.space, star.demands, 1.0, all_points(star.space));
    CHECK(g.total >= 1.5 - 1e-12);
    CHECK(g.total == doctest::Approx(1.5));  // hub is the best first pick and nothing improves

    auto single = Instance{MetricSpace::explicit_matrix({{0.0}}), {PointRef::point(0)}, 1.0};
    CHECK(greedy_heuristic(single).total == doctest::Approx(1.0));

    // delta < 1/k: a single facility already beats one per point (1 + 6*0.1).
    const auto clique = gen_clique(0.1, 3);
    CHECK(greedy_heuristic(clique).total == doctest::Approx(1.6));
    CHECK(solve_exact(clique).total == doctest::Approx(1.6));
}

TEST_CASE("greedy dominates exact on random instances") {
    Rng rng(404);
    for (int iter = 0; iter < 40; ++iter) {
        const auto inst = random_euclidean_instance(rng);
        const auto exact = solve_exact(inst);
        const auto greedy = greedy_heuristic(inst);
        CHECK(exact.total <= greedy.total + 1e-9);
        CHECK(exact.total <= inst.demands.size() * inst.facility_cost + 1e-9);
    }
}

TEST_CASE("exact solution assigns every demand to its nearest open facility") {
    Rng rng(505);
    for (int iter = 0; iter < 25; ++iter) {
        const auto inst = random_euclidean_instance(rng);
        const auto sol = solve_exact(inst);
        for (std::size_t i = 0; i < inst.demands.size(); ++i) {
            const auto near = nearest(inst.space, sol.facilities, inst.demands[i]);
            CHECK(sol.assignment_dist[i] == near.distance);
            CHECK(sol.assignment[i] == *near.facility);
        }
    }
}

TEST_CASE("pruned enumeration equals full enumeration") {
    Rng rng(606);
    for (int iter = 0; iter < 50; ++iter) {
        const auto inst = random_euclidean_instance(rng);
        const auto pruned = solve_exact(inst, 1ull << 24, true);
        const auto full = solve_exact(inst, 1ull << 24, false);
        CHECK(pruned.total == doctest::Approx(full.total).epsilon(1e-12));
        CHECK(pruned.facilities == full.facilities);
    }
}

TEST_CASE("exact optimum never exceeds the analytic bounds of the families") {
    for (int k : {2, 4, 6, 8}) {
        const auto star = gen_star(k);
        CHECK(solve_exact(star.space, star.demands, 1.0, all_points(star.space)).total <=
              star.known_opt->value + 1e-12);
    }
    for (int k : {2, 3, 4}) {
        const auto clique = gen_clique(0.45, k);
        CHECK(solve_exact(clique).total <= clique.known_opt->value + 1e-12);
    }
}

TEST_CASE("cluster extraction") {
    const auto star = gen_star(4);
    const auto sol = solve_exact(star.space, star.demands, 1.0, all_points(star.space));
    const auto clusters = clusters_of(sol);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].center.is_subset());
    CHECK(clusters[0].demand_indices == std::vector<int>{0, 1, 2, 3});

    // Every demand on its own facility -> singleton clusters.
    const auto clique = gen_clique(0.9, 3);
    const auto csol = solve_exact(clique);
    const auto cclusters = clusters_of(csol);
    CHECK(cclusters.size() == 3);
    for (const auto& c : cclusters) CHECK(c.demand_indices.size() == 3);

    // No demands -> no clusters.
    auto empty = Instance{MetricSpace::explicit_matrix({{0.0, 1.0}, {1.0, 0.0}}), {}, 1.0};
    CHECK(clusters_of(solve_exact(empty)).empty());
}

TEST_CASE("structure-exact subset solver matches full enumeration") {
    Rng rng(707);
    const struct { int m, ns; } shapes[] = {{4, 2}, {5, 2}, {5, 3}, {6, 5}, {8, 7}};
    for (const auto& shape : shapes) {
        const auto space = MetricSpace::subset_points(shape.m, shape.ns, 0.5 + rng.next_double());
        for (int iter = 0; iter < 12; ++iter) {
            const int nd = 1 + static_cast<int>(rng.uniform_int(shape.ns + 2));
            std::vector<PointRef> demands;
            std::vector<char> used(shape.m, 0);
            int distinct = 0;
            for (int i = 0; i < nd; ++i) {
                int loc = static_cast<int>(rng.uniform_int(shape.m));
                // Keep within subset_size distinct locations.
                if (!used[loc] && distinct == shape.ns) {
                    for (int j = 0; j < shape.m; ++j)
                        if (used[j]) { loc = j; break; }
                }
                if (!used[loc]) { used[loc] = 1; ++distinct; }
                demands.push_back(PointRef::point(loc));
            }
            const double f = 0.5 + rng.next_double();
            const auto fast = solve_subset_points(space, demands, f);
            const auto full = solve_exact(space, demands, f, all_points(space), 1ull << 24, false);
            CHECK(fast.total == doctest::Approx(full.total).epsilon(1e-12));
            // Restricted default candidates reach the same optimum.
            const auto restricted = solve_exact(space, demands, f,
                                                default_candidates(space, demands));
            CHECK(restricted.total == doctest::Approx(full.total).epsilon(1e-12));
        }
    }
}

TEST_CASE("subset solver rejects uncoverable demand sets") {
    const auto space = MetricSpace::subset_points(6, 2, 1.0);
    std::vector<PointRef> demands{PointRef::point(0), PointRef::point(1), PointRef::point(2)};
    CHECK_THROWS_AS(solve_subset_points(space, demands, 1.0), std::invalid_argument);
}

TEST_CASE("candidate order does not affect the result") {
    Rng rng(808);
    const auto inst = random_euclidean_instance(rng, 6, 8);
    auto candidates = default_candidates(inst.space, inst.demands);
    const auto a = solve_exact(inst.space, inst.demands, inst.facility_cost, candidates);
    std::reverse(candidates.begin(), candidates.end());
    const auto b = solve_exact(inst.space, inst.demands, inst.facility_cost, candidates);
    CHECK(a.total == b.total);
    CHECK(a.facilities == b.facilities);
}

TEST_CASE("budget refusals name the bound") {
    std::vector<std::vector<double>> dist(26, std::vector<double>(26, 1.0));
    for (int i = 0; i < 26; ++i) dist[i][i] = 0.0;
    auto inst = Instance{MetricSpace::explicit_matrix(std::move(dist)),
                         {PointRef::point(0)}, 1.0};
    try {
        solve_exact(inst);
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded& e) {
        CHECK(std::string(e.what()).find("24") != std::string::npos);
    }

    const auto small = gen_clique(0.5, 4);
    CHECK_THROWS_AS(solve_exact(small, 7), BudgetExceeded);  // 15 subsets > budget 7
}

TEST_CASE("empty demand list still opens one facility") {
    auto inst = Instance{MetricSpace::explicit_matrix({{0.0, 1.0}, {1.0, 0.0}}), {}, 1.0};
    const auto sol = solve_exact(inst);
    CHECK(sol.total == doctest::Approx(1.0));
    CHECK(sol.facilities.size() == 1);
    CHECK(sol.facilities.items()[0] == PointRef::point(0));
}

}  // TEST_SUITE
