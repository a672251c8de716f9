#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ofl/generators.hpp"
#include "ofl/metric.hpp"
#include "ofl/rng.hpp"

using namespace ofl;

namespace {

MetricSpace random_euclidean(Rng& rng, int n, int dim = 2) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
        for (auto& c : p) c = rng.next_double() * 10.0;
    return MetricSpace::euclidean(std::move(pts));
}

}  // namespace

TEST_SUITE("metric") {

TEST_CASE("explicit matrix lookup and self distance") {
    auto space = MetricSpace::explicit_matrix({{0.0, 0.25}, {0.25, 0.0}});
    CHECK(space.distance(PointRef::point(0), PointRef::point(1)) == 0.25);
    CHECK(space.distance(PointRef::point(1), PointRef::point(0)) == 0.25);
    CHECK(space.distance(PointRef::point(1), PointRef::point(1)) == 0.0);
}

TEST_CASE("subset point distances") {
    auto space = MetricSpace::subset_points(4, 2, 1.0);
    const auto s12 = PointRef::subset_point({1, 2});
    CHECK(space.distance(s12, PointRef::point(1)) == 0.5);
    CHECK(space.distance(s12, PointRef::point(0)) == 1.0);
    CHECK(space.distance(s12, s12) == 0.0);
    CHECK(space.distance(s12, PointRef::subset_point({0, 3})) == 1.0);
    CHECK(space.distance(PointRef::point(0), PointRef::point(3)) == 1.0);
}

TEST_CASE("descriptor validity") {
    auto space = MetricSpace::explicit_matrix({{0.0, 1.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(space.distance(PointRef::point(0), PointRef::point(2)), std::out_of_range);
    CHECK_THROWS_AS(space.distance(PointRef::subset_point({0}), PointRef::point(0)),
                    std::out_of_range);
    auto sp = MetricSpace::subset_points(4, 2, 1.0);
    CHECK(!sp.valid_ref(PointRef::subset_point({0})));      // wrong cardinality
    CHECK(!sp.valid_ref(PointRef::subset_point({0, 4})));   // index out of range
    CHECK(sp.valid_ref(PointRef::subset_point({0, 3})));
}

TEST_CASE("nearest with empty set is (none, infinity)") {
    auto space = MetricSpace::explicit_matrix({{0.0, 1.0}, {1.0, 0.0}});
    const auto res = nearest(space, FacilitySet{}, PointRef::point(0));
    CHECK(!res.facility.has_value());
    CHECK(std::isinf(res.distance));
    CHECK(std::min(res.distance, 1.0) == 1.0);  // the sentinel behaves like a true extended real
}

TEST_CASE("nearest of a member is itself at zero") {
    auto space = MetricSpace::explicit_matrix({{0.0, 1.0}, {1.0, 0.0}});
    FacilitySet f;
    f.insert(PointRef::point(1));
    const auto res = nearest(space, f, PointRef::point(1));
    CHECK(*res.facility == PointRef::point(1));
    CHECK(res.distance == 0.0);
}

TEST_CASE("nearest on the star family") {
    // k = 4: leaf-to-leaf 2*delta = 0.25, leaf-to-hub 0.125.
    const auto inst = gen_star(4);
    FacilitySet f;
    f.insert(PointRef::point(0));
    const auto res = nearest(inst.space, f, PointRef::point(1));
    CHECK(*res.facility == PointRef::point(0));
    CHECK(res.distance == 0.25);
    const auto hub = (*inst.clusters)[0].center;
    CHECK(inst.space.distance(hub, PointRef::point(2)) == 0.125);
}

TEST_CASE("nearest ties break to the lowest descriptor") {
    auto space = MetricSpace::explicit_matrix(
        {{0.0, 1.0, 1.0}, {1.0, 0.0, 2.0}, {1.0, 2.0, 0.0}});
    FacilitySet f;
    f.insert(PointRef::point(2));
    f.insert(PointRef::point(1));
    const auto res = nearest(space, f, PointRef::point(0));
    CHECK(*res.facility == PointRef::point(1));
}

TEST_CASE("descriptor total order") {
    CHECK(PointRef::point(0) < PointRef::point(1));
    CHECK(PointRef::point(7) < PointRef::subset_point({0, 1}));
    CHECK(PointRef::subset_point({0, 2}) < PointRef::subset_point({0, 3}));
    CHECK(PointRef::subset_point({0, 1}) < PointRef::subset_point({0, 1, 2}));
}

TEST_CASE("validate flags constructed violations") {
    auto ok = MetricSpace::explicit_matrix(
        {{0.0, 1.0, 1.5}, {1.0, 0.0, 1.0}, {1.5, 1.0, 0.0}});
    CHECK(ok.validate().ok());

    auto asym = MetricSpace::explicit_matrix({{0.0, 1.0}, {2.0, 0.0}});
    auto rep = asym.validate();
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == MetricViolation::Kind::asymmetry);

    auto tri = MetricSpace::explicit_matrix(
        {{0.0, 1.0, 5.0}, {1.0, 0.0, 1.0}, {5.0, 1.0, 0.0}});
    rep = tri.validate();
    CHECK(!rep.ok());
    bool has_triangle = false;
    for (const auto& v : rep.violations)
        if (v.kind == MetricViolation::Kind::triangle) has_triangle = true;
    CHECK(has_triangle);

    auto diag = MetricSpace::explicit_matrix({{0.5}});
    rep = diag.validate();
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == MetricViolation::Kind::diagonal);
}

TEST_CASE("generated families materialize to valid metrics") {
    for (int k : {2, 5, 12, 20}) CHECK(materialize_explicit(gen_star(k).space).validate().ok());
    for (int k : {2, 7, 20}) CHECK(gen_clique(0.3, k).space.validate().ok());
    CHECK(materialize_explicit(gen_subset_iid(2).instance.space).validate().ok());
    // Raw subset-points spaces, every point-type combination, m <= 8.
    for (int m : {4, 6, 8})
        for (int s : {2, 3})
            CHECK(materialize_explicit(MetricSpace::subset_points(m, s, 0.7)).validate().ok());
}

TEST_CASE("nearest equals the exhaustive minimum on random spaces") {
    Rng rng(42);
    for (int iter = 0; iter < 30; ++iter) {
        const int n = 2 + static_cast<int>(rng.uniform_int(6));
        auto space = random_euclidean(rng, n);
        FacilitySet facs;
        const int nf = 1 + static_cast<int>(rng.uniform_int(n));
        for (int i = 0; i < nf; ++i)
            facs.insert(PointRef::point(static_cast<int>(rng.uniform_int(n))));
        const auto v = PointRef::point(static_cast<int>(rng.uniform_int(n)));
        const auto res = nearest(space, facs, v);
        double expect = kInfiniteDistance;
        for (const auto& fp : facs)
            expect = std::min(expect, space.distance(fp, v));
        CHECK(res.distance == expect);
    }
}

TEST_CASE("euclidean construction rejects ragged dimensions") {
    CHECK_THROWS_AS(MetricSpace::euclidean({{0.0, 1.0}, {2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MetricSpace::explicit_matrix({{0.0, 1.0}}), std::invalid_argument);
}

}  // TEST_SUITE
