#include <doctest.h>

#include <cmath>

#include "ofl/generators.hpp"
#include "ofl/instance_io.hpp"
#include "ofl/offline.hpp"

using namespace ofl;

TEST_SUITE("instgen") {

TEST_CASE("star family geometry and analytic optimum") {
    const auto inst = gen_star(4);
    CHECK(inst.demand_count() == 4);
    CHECK(all_points(inst.space).size() == 5);  // 4 leaves + hub
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            CHECK(inst.space.distance(inst.demands[i], inst.demands[j]) == doctest::Approx(0.25));
    CHECK(inst.known_opt->value == doctest::Approx(1.5));
    CHECK(inst.known_opt->kind == KnownOpt::Kind::upper_bound);
    REQUIRE(inst.clusters.has_value());
    CHECK((*inst.clusters)[0].demand_indices.size() == 4);

    const auto big = gen_star(100);
    CHECK(big.known_opt->value == doctest::Approx(3.5));
    CHECK_THROWS_AS(gen_star(1), std::invalid_argument);
}

TEST_CASE("star exact optimum opens the hub only") {
    for (int k : {2, 4, 6, 8}) {
        const auto inst = gen_star(k);
        const double delta = 1.0 / (4.0 * std::sqrt(static_cast<double>(k)));
        const auto sol = solve_exact(inst.space, inst.demands, inst.facility_cost,
                                     all_points(inst.space));
        CHECK(sol.total == doctest::Approx(1.0 + k * delta).epsilon(1e-12));
        REQUIRE(sol.facilities.size() == 1);
        // k = 2 is the one tie (hub and a leaf both give 1 + 2*delta); the
        // lexicographic tie-break then prefers the leaf descriptor.
        if (k == 2)
            CHECK(sol.facilities.items()[0] == PointRef::point(0));
        else
            CHECK(sol.facilities.items()[0] == (*inst.clusters)[0].center);
    }
}

TEST_CASE("clique family counts, clusters, optimum") {
    const auto inst = gen_clique(0.5, 2);
    CHECK(inst.demand_count() == 4);
    CHECK(inst.known_opt->value == 2.0);
    const auto sol = solve_exact(inst);
    CHECK(sol.total == doctest::Approx(2.0));
    // Single-facility solution ties at delta = 1/k; lexicographic tie-break.
    REQUIRE(sol.facilities.size() == 1);
    CHECK(sol.facilities.items()[0] == PointRef::point(0));

    CHECK(gen_clique(0.1, 10).demand_count() == 100);
    CHECK_THROWS_AS(gen_clique(1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(gen_clique(0.5, 1), std::invalid_argument);

    // Cluster j holds exactly the k demands at point j.
    const auto c3 = gen_clique(0.3, 3);
    REQUIRE(c3.clusters->size() == 3);
    for (int j = 0; j < 3; ++j) {
        const auto& cl = (*c3.clusters)[j];
        CHECK(cl.center == PointRef::point(j));
        for (int idx : cl.demand_indices) CHECK(c3.demands[idx] == PointRef::point(j));
    }
}

TEST_CASE("clique exact optimum equals k when delta >= 1/k") {
    CHECK(solve_exact(gen_clique(0.5, 2)).total == doctest::Approx(2.0));
    CHECK(solve_exact(gen_clique(0.4, 3)).total == doctest::Approx(3.0));
    CHECK(solve_exact(gen_clique(0.3, 4)).total == doctest::Approx(4.0));
    // Below 1/k one facility is cheaper: 1 + k(k-1)*delta.
    CHECK(solve_exact(gen_clique(0.1, 3)).total == doctest::Approx(1.6));
}

TEST_CASE("subset_iid family") {
    const auto fam = gen_subset_iid(3);
    CHECK(fam.instance.space.point_count() == 9);
    CHECK(fam.draws == 3);
    CHECK(fam.distribution.size() == 9);
    CHECK(fam.instance.known_opt->value == doctest::Approx(2.5));
    CHECK(fam.instance.demands.empty());

    // A sampled all-distinct demand set is covered by one subset point at 1/2.
    std::vector<PointRef> sample{PointRef::point(0), PointRef::point(3), PointRef::point(6)};
    const auto sol = solve_subset_points(fam.instance.space, sample, 1.0);
    CHECK(sol.total == doctest::Approx(2.5));
    REQUIRE(sol.facilities.size() == 1);
    CHECK(sol.facilities.items()[0].is_subset());
    for (double d : sol.assignment_dist) CHECK(d == 0.5);

    CHECK_THROWS_AS(gen_subset_iid(1), std::invalid_argument);
}

TEST_CASE("fotakis family parameters") {
    const auto fam = gen_fotakis(17);
    CHECK(fam.delta == doctest::Approx(0.25));
    CHECK(fam.instance.space.point_count() == 34);
    CHECK(fam.instance.known_opt->value == doctest::Approx(3.125));
    CHECK(fam.adversarial_order.size() == 17);

    const auto small = gen_fotakis(5);
    CHECK(small.delta == doctest::Approx(0.5));
    CHECK(small.instance.space.point_count() == 10);

    CHECK_THROWS_AS(gen_fotakis(6), std::invalid_argument);
    CHECK_THROWS_AS(gen_fotakis(4), std::invalid_argument);
    CHECK_NOTHROW(gen_fotakis(37));
}

TEST_CASE("subset-points distances follow the scaled formulas") {
    const auto fam = gen_fotakis(5);  // delta = 0.5
    const auto& space = fam.instance.space;
    CHECK(space.distance(PointRef::point(0), PointRef::point(9)) == 0.5);
    std::vector<int> cover{0, 1, 2, 3, 4};
    const auto s = PointRef::subset_point(cover);
    CHECK(space.distance(s, PointRef::point(0)) == 0.25);
    CHECK(space.distance(s, PointRef::point(7)) == 0.5);
}

TEST_CASE("save/load round trips every family") {
    const auto star = gen_star(4);
    CHECK(load_instance(save_instance(star)) == star);
    const auto clique = gen_clique(0.5, 2);
    CHECK(load_instance(save_instance(clique)) == clique);
    const auto iid = gen_subset_iid(3).instance;
    CHECK(load_instance(save_instance(iid)) == iid);
    const auto fot = gen_fotakis(5).instance;
    CHECK(load_instance(save_instance(fot)) == fot);

    auto eu = Instance{MetricSpace::euclidean({{0.0, 0.0}, {3.0, 4.0}}),
                       {PointRef::point(0), PointRef::point(1), PointRef::point(1)},
                       2.5};
    CHECK(load_instance(save_instance(eu)) == eu);
}

TEST_CASE("load errors name the offending location") {
    auto doc = save_instance(gen_star(4));
    doc.erase("demands");
    try {
        load_instance(doc);
        FAIL("expected a LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("demands") != std::string::npos);
    }

    nlohmann::json bad = {
        {"version", 1},
        {"facility_cost", 1.0},
        {"metric", {{"type", "explicit"}, {"n", 2}, {"distances", {{0.0, 1.0}, {2.0, 0.0}}}}},
        {"demands", nlohmann::json::array({{{"x", 0}}})}};
    try {
        load_instance(bad);
        FAIL("expected a LoadError for the asymmetric matrix");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("asymmetry") != std::string::npos);
    }
}

TEST_CASE("load rejects broken cluster partitions") {
    auto doc = save_instance(gen_clique(0.5, 2));
    doc["clusters"][0]["demand_indices"] = {0};  // index 1 now uncovered
    CHECK_THROWS_AS(load_instance(doc), LoadError);
    auto doc2 = save_instance(gen_clique(0.5, 2));
    doc2["clusters"][1]["demand_indices"] = {0, 1, 2, 3};  // overlap
    CHECK_THROWS_AS(load_instance(doc2), LoadError);
}

TEST_CASE("type mismatches surface as exceptions, not crashes") {
    auto doc = save_instance(gen_clique(0.5, 2));
    doc["metric"]["distances"] = "oops";
    CHECK_THROWS_AS(load_instance(doc), std::exception);
    auto doc2 = save_instance(gen_star(4));
    doc2["facility_cost"] = "free";
    CHECK_THROWS_AS(load_instance(doc2), LoadError);
    auto doc3 = save_instance(gen_star(4));
    doc3["demands"][0] = 7;  // bare int instead of a descriptor object
    CHECK_THROWS_AS(load_instance(doc3), LoadError);
}

TEST_CASE("demand descriptors are validated on load") {
    auto doc = save_instance(gen_star(4));
    doc["demands"].push_back({{"x", 99}});
    CHECK_THROWS_AS(load_instance(doc), LoadError);
}

}  // TEST_SUITE
