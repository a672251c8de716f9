#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ofl {

/// Extended-real sentinel for "no open facility". Kept as a true IEEE
/// infinity so that min{infinity, 1} = 1 holds exactly in the opening rule.
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Absolute tolerance for metric-axiom checks; instance values are small
/// rationals and this absorbs float rounding.
inline constexpr double kMetricTolerance = 1e-9;

/// Descriptor of a metric-space point: either a concrete point id (x >= 0)
/// or an implicit subset point addressed by its sorted index set.
struct PointRef {
    int x = -1;
    std::vector<int> subset;

    bool is_subset() const { return !subset.empty(); }

    static PointRef point(int id) {
        PointRef r;
        r.x = id;
        return r;
    }

    static PointRef subset_point(std::vector<int> ids) {
        PointRef r;
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        r.subset = std::move(ids);
        return r;
    }

    friend bool operator==(const PointRef& a, const PointRef& b) {
        return a.x == b.x && a.subset == b.subset;
    }

    // Fixed total order used everywhere ties are broken: point ids by index,
    // then subset descriptors lexicographically.
    friend bool operator<(const PointRef& a, const PointRef& b) {
        if (a.is_subset() != b.is_subset()) return !a.is_subset();
        if (!a.is_subset()) return a.x < b.x;
        return a.subset < b.subset;
    }

    std::string to_string() const {
        if (!is_subset()) return "x" + std::to_string(x);
        std::string s = "s{";
        for (std::size_t i = 0; i < subset.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(subset[i]);
        }
        s += '}';
        return s;
    }
};

struct MetricViolation {
    enum class Kind { asymmetry, diagonal, negative, triangle };
    Kind kind;
    int i = 0, j = 0, k = 0;
    double magnitude = 0.0;

    std::string to_string() const {
        switch (kind) {
            case Kind::asymmetry:
                return "asymmetry at (" + std::to_string(i) + "," + std::to_string(j) +
                       "): |d_ij - d_ji| = " + std::to_string(magnitude);
            case Kind::diagonal:
                return "nonzero diagonal at " + std::to_string(i) + ": " +
                       std::to_string(magnitude);
            case Kind::negative:
                return "negative distance at (" + std::to_string(i) + "," +
                       std::to_string(j) + "): " + std::to_string(magnitude);
            case Kind::triangle:
                return "triangle violation d(" + std::to_string(i) + "," + std::to_string(k) +
                       ") > d(" + std::to_string(i) + "," + std::to_string(j) + ") + d(" +
                       std::to_string(j) + "," + std::to_string(k) + ") by " +
                       std::to_string(magnitude);
        }
        return "?";
    }
};

struct ValidationReport {
    std::vector<MetricViolation> violations;
    bool ok() const { return violations.empty(); }
};

struct ExplicitMetric {
    std::vector<std::vector<double>> dist;
};

struct EuclideanMetric {
    std::vector<std::vector<double>> points;
};

/// m concrete "x-points" at pairwise distance delta, plus C(m, subset_size)
/// implicit subset points: s_I is at delta/2 from x_j for j in I and at delta
/// from everything else. Subset points are never enumerated.
struct SubsetPointsMetric {
    int m = 0;
    int subset_size = 0;
    double delta = 1.0;
};

class MetricSpace {
public:
    MetricSpace() : rep_(ExplicitMetric{}) {}

    static MetricSpace explicit_matrix(std::vector<std::vector<double>> dist) {
        const std::size_t n = dist.size();
        for (const auto& row : dist)
            if (row.size() != n)
                throw std::invalid_argument("explicit metric: matrix is not square");
        MetricSpace s;
        s.rep_ = ExplicitMetric{std::move(dist)};
        return s;
    }

    static MetricSpace euclidean(std::vector<std::vector<double>> points) {
        if (!points.empty()) {
            const std::size_t dim = points.front().size();
            for (const auto& p : points)
                if (p.size() != dim)
                    throw std::invalid_argument("euclidean metric: inconsistent dimensions");
        }
        MetricSpace s;
        s.rep_ = EuclideanMetric{std::move(points)};
        return s;
    }

    static MetricSpace subset_points(int m, int subset_size, double delta) {
        if (m < 1 || subset_size < 1 || subset_size > m)
            throw std::invalid_argument("subset_points metric: need 1 <= subset_size <= m");
        if (!(delta > 0.0))
            throw std::invalid_argument("subset_points metric: delta must be positive");
        MetricSpace s;
        s.rep_ = SubsetPointsMetric{m, subset_size, delta};
        return s;
    }

    const std::variant<ExplicitMetric, EuclideanMetric, SubsetPointsMetric>& rep() const {
        return rep_;
    }

    bool is_explicit() const { return std::holds_alternative<ExplicitMetric>(rep_); }
    bool is_euclidean() const { return std::holds_alternative<EuclideanMetric>(rep_); }
    bool is_subset_points() const { return std::holds_alternative<SubsetPointsMetric>(rep_); }

    const SubsetPointsMetric& subset_rep() const {
        if (!is_subset_points())
            throw std::invalid_argument("metric space is not a subset-points space");
        return std::get<SubsetPointsMetric>(rep_);
    }

    /// Number of concrete points (x-points for subset-points spaces).
    int point_count() const {
        if (auto* e = std::get_if<ExplicitMetric>(&rep_)) return static_cast<int>(e->dist.size());
        if (auto* e = std::get_if<EuclideanMetric>(&rep_)) return static_cast<int>(e->points.size());
        return std::get<SubsetPointsMetric>(rep_).m;
    }

    bool valid_ref(const PointRef& r) const {
        if (!r.is_subset()) return r.x >= 0 && r.x < point_count();
        const auto* sp = std::get_if<SubsetPointsMetric>(&rep_);
        if (sp == nullptr) return false;
        if (static_cast<int>(r.subset.size()) != sp->subset_size) return false;
        if (!std::is_sorted(r.subset.begin(), r.subset.end())) return false;
        for (std::size_t i = 0; i < r.subset.size(); ++i) {
            if (r.subset[i] < 0 || r.subset[i] >= sp->m) return false;
            if (i > 0 && r.subset[i] == r.subset[i - 1]) return false;
        }
        return true;
    }

    void require_valid(const PointRef& r) const {
        if (!valid_ref(r))
            throw std::out_of_range("point descriptor " + r.to_string() +
                                    " is out of range for this metric space");
    }

    /// Distance between two concrete points.
    double point_distance(int a, int b) const {
        if (auto* e = std::get_if<ExplicitMetric>(&rep_)) return e->dist[a][b];
        if (auto* e = std::get_if<EuclideanMetric>(&rep_)) {
            const auto& pa = e->points[a];
            const auto& pb = e->points[b];
            double sum = 0.0;
            for (std::size_t i = 0; i < pa.size(); ++i) {
                const double d = pa[i] - pb[i];
                sum += d * d;
            }
            return std::sqrt(sum);
        }
        const auto& sp = std::get<SubsetPointsMetric>(rep_);
        return a == b ? 0.0 : sp.delta;
    }

    double distance(const PointRef& a, const PointRef& b) const {
        require_valid(a);
        require_valid(b);
        return distance_unchecked(a, b);
    }

    double distance_unchecked(const PointRef& a, const PointRef& b) const {
        if (!a.is_subset() && !b.is_subset()) return point_distance(a.x, b.x);
        const auto& sp = std::get<SubsetPointsMetric>(rep_);
        if (a.is_subset() && b.is_subset())
            return a.subset == b.subset ? 0.0 : sp.delta;
        const auto& set = a.is_subset() ? a.subset : b.subset;
        const int x = a.is_subset() ? b.x : a.x;
        return std::binary_search(set.begin(), set.end(), x) ? sp.delta / 2.0 : sp.delta;
    }

    /// Checks the metric axioms of an explicit matrix; euclidean and
    /// subset-points spaces are valid by construction.
    ValidationReport validate() const {
        ValidationReport report;
        const auto* e = std::get_if<ExplicitMetric>(&rep_);
        if (e == nullptr) return report;
        const int n = static_cast<int>(e->dist.size());
        const auto& d = e->dist;
        for (int i = 0; i < n; ++i) {
            if (std::abs(d[i][i]) > kMetricTolerance)
                report.violations.push_back(
                    {MetricViolation::Kind::diagonal, i, i, 0, d[i][i]});
            for (int j = 0; j < n; ++j) {
                if (d[i][j] < -kMetricTolerance)
                    report.violations.push_back(
                        {MetricViolation::Kind::negative, i, j, 0, d[i][j]});
                if (j > i && std::abs(d[i][j] - d[j][i]) > kMetricTolerance)
                    report.violations.push_back({MetricViolation::Kind::asymmetry, i, j, 0,
                                                 std::abs(d[i][j] - d[j][i])});
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double slack = d[i][k] - d[i][j] - d[j][k];
                    if (slack > kMetricTolerance)
                        report.violations.push_back(
                            {MetricViolation::Kind::triangle, i, j, k, slack});
                }
        return report;
    }

private:
    std::variant<ExplicitMetric, EuclideanMetric, SubsetPointsMetric> rep_;
};

/// Set of open facilities kept in the fixed descriptor order so that
/// iteration (and therefore nearest-tie-breaking) is deterministic.
class FacilitySet {
public:
    void insert(PointRef r) {
        auto it = std::lower_bound(items_.begin(), items_.end(), r);
        if (it == items_.end() || !(*it == r)) items_.insert(it, std::move(r));
    }

    bool contains(const PointRef& r) const {
        return std::binary_search(items_.begin(), items_.end(), r);
    }

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    void clear() { items_.clear(); }

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    const std::vector<PointRef>& items() const { return items_; }

    friend bool operator==(const FacilitySet& a, const FacilitySet& b) {
        return a.items_ == b.items_;
    }

private:
    std::vector<PointRef> items_;
};

struct NearestResult {
    std::optional<PointRef> facility;
    double distance = kInfiniteDistance;
};

/// Closest facility to v; (none, +infinity) when the set is empty. Ties go to
/// the lowest descriptor in the fixed total order.
inline NearestResult nearest(const MetricSpace& space, const FacilitySet& facilities,
                             const PointRef& v) {
    space.require_valid(v);
    NearestResult best;
    for (const auto& f : facilities) {
        const double d = space.distance_unchecked(f, v);
        if (d < best.distance) {
            best.distance = d;
            best.facility = f;
        }
    }
    return best;
}

namespace detail {

inline void combinations_rec(int m, int size, int start, std::vector<int>& cur,
                             std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == size) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i <= m - (size - static_cast<int>(cur.size())); ++i) {
        cur.push_back(i);
        combinations_rec(m, size, i + 1, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<int>> combinations(int m, int size) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    combinations_rec(m, size, 0, cur, out);
    return out;
}

}  // namespace detail

/// Every point of the space, including enumerated subset points. Intended for
/// small spaces only (tests, full-enumeration oracles); throws when the count
/// would exceed max_points.
inline std::vector<PointRef> all_points(const MetricSpace& space,
                                        std::size_t max_points = 100000) {
    std::vector<PointRef> out;
    const int n = space.point_count();
    if (const auto* sp = std::get_if<SubsetPointsMetric>(&space.rep())) {
        double count = sp->m;
        double binom = 1.0;
        for (int i = 0; i < sp->subset_size; ++i)
            binom = binom * (sp->m - i) / (i + 1);
        count += binom;
        if (count > static_cast<double>(max_points))
            throw std::invalid_argument("all_points: subset-points space has too many points");
        for (int i = 0; i < n; ++i) out.push_back(PointRef::point(i));
        for (auto& c : detail::combinations(sp->m, sp->subset_size))
            out.push_back(PointRef::subset_point(std::move(c)));
        return out;
    }
    if (static_cast<std::size_t>(n) > max_points)
        throw std::invalid_argument("all_points: space has too many points");
    for (int i = 0; i < n; ++i) out.push_back(PointRef::point(i));
    return out;
}

/// Materializes any small space as an explicit matrix (subset points included),
/// in all_points order. Test/validation helper.
inline MetricSpace materialize_explicit(const MetricSpace& space,
                                        std::size_t max_points = 4096) {
    const auto pts = all_points(space, max_points);
    std::vector<std::vector<double>> dist(pts.size(), std::vector<double>(pts.size(), 0.0));
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            dist[i][j] = space.distance_unchecked(pts[i], pts[j]);
    return MetricSpace::explicit_matrix(std::move(dist));
}

}  // namespace ofl
