#pragma once

// Self-maps of convex sets and sampled falsifiers for the nonexpansive,
// asymptotically nonexpansive and generalized hybrid classes. A checker that
// returns holds = true has found no counterexample at its sample budget; a
// failing report always carries the worst witness it saw.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nonexp/convex.hpp"
#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"

namespace nonexp {

class Mapping;

namespace maps {

/// Rotation by `angle` in the coordinate plane (axis0, axis1) about `center`;
/// other coordinates are left alone.
struct Rotation {
    Vector center;
    double angle = 0.0;
    std::size_t axis0 = 0;
    std::size_t axis1 = 1;
};

struct Translation {
    Vector displacement;
};

/// x -> A x + b on dense vectors. `matrix` is row-major.
struct Affine {
    std::vector<std::vector<double>> matrix;
    Vector offset;
};

struct Projection {
    ConvexSet set;
};

/// (x1, x2, x3, ...) -> (x1, x1, x2, x3, ...) on finitely supported sequences.
struct Shift {};

/// On [0,1]: x -> sqrt(x) for x != 0 and 0 -> 1.
struct SqrtSection {};

/// One-dimensional map given by affine pieces on closed intervals. The first
/// piece whose interval contains x wins, so jumps are allowed.
struct PiecewiseLinear {
    struct Piece {
        double lower = 0.0;
        double upper = 0.0;
        double slope = 0.0;
        double intercept = 0.0;
    };
    std::vector<Piece> pieces;
};

/// maps[0] o maps[1] o ... o maps[n-1]; the last map is applied first.
struct Composition {
    std::vector<Mapping> maps;
};

} // namespace maps

/// Self-map of a convex domain. Immutable; copies share state.
class Mapping {
public:
    using Kind = std::variant<maps::Rotation, maps::Translation, maps::Affine, maps::Projection, maps::Shift,
                              maps::SqrtSection, maps::PiecewiseLinear, maps::Composition>;

    /// Points within this distance of the domain are accepted by apply().
    static constexpr double kDomainTol = 1e-9;

    static Mapping rotation(Vector center, double angle, std::optional<ConvexSet> domain = std::nullopt,
                            std::size_t axis0 = 0, std::size_t axis1 = 1) {
        if (center.is_sparse()) throw InvalidArgument("rotation: center must be dense");
        if (axis0 == axis1 || axis0 >= center.dimension() || axis1 >= center.dimension())
            throw InvalidArgument("rotation: invalid rotation plane");
        if (!std::isfinite(angle)) throw InvalidArgument("rotation: non-finite angle");
        auto dom = domain.value_or(ConvexSet::whole_space(center.dimension()));
        return Mapping(maps::Rotation{std::move(center), angle, axis0, axis1}, std::move(dom));
    }

    static Mapping translation(Vector displacement, std::optional<ConvexSet> domain = std::nullopt) {
        auto dom = domain.value_or(ConvexSet::whole_space(displacement.dimension(), displacement.is_sparse()));
        return Mapping(maps::Translation{std::move(displacement)}, std::move(dom));
    }

    static Mapping affine(std::vector<std::vector<double>> matrix, Vector offset,
                          std::optional<ConvexSet> domain = std::nullopt) {
        if (offset.is_sparse()) throw InvalidArgument("affine: offset must be dense");
        const std::size_t d = offset.dimension();
        if (matrix.size() != d) throw InvalidArgument("affine: matrix rows do not match offset");
        for (const auto& row : matrix) {
            if (row.size() != d) throw InvalidArgument("affine: matrix must be square");
            for (double v : row)
                if (!std::isfinite(v)) throw InvalidArgument("affine: non-finite entry");
        }
        auto dom = domain.value_or(ConvexSet::whole_space(d));
        return Mapping(maps::Affine{std::move(matrix), std::move(offset)}, std::move(dom));
    }

    /// The metric projection onto `set`, as a self-map of `domain`.
    static Mapping projection(ConvexSet set, std::optional<ConvexSet> domain = std::nullopt) {
        auto dom = domain.value_or(ConvexSet::whole_space(set.ambient().dimension, set.ambient().sparse));
        return Mapping(maps::Projection{std::move(set)}, std::move(dom));
    }

    /// Domain defaults to {x : x_1 >= 0} in l2.
    static Mapping shift(std::optional<ConvexSet> domain = std::nullopt) {
        return Mapping(maps::Shift{}, domain.value_or(ConvexSet::halfline_coordinate(0)));
    }

    static Mapping sqrt_section() { return Mapping(maps::SqrtSection{}, ConvexSet::box({0.0}, {1.0})); }

    static Mapping piecewise_linear(std::vector<maps::PiecewiseLinear::Piece> pieces) {
        if (pieces.empty()) throw InvalidArgument("piecewise-linear: no pieces");
        double lo = pieces.front().lower, hi = pieces.front().upper;
        for (const auto& p : pieces) {
            if (!(p.lower <= p.upper) || !std::isfinite(p.lower) || !std::isfinite(p.upper) ||
                !std::isfinite(p.slope) || !std::isfinite(p.intercept))
                throw InvalidArgument("piecewise-linear: invalid piece");
            lo = std::min(lo, p.lower);
            hi = std::max(hi, p.upper);
        }
        // The pieces must cover [lo, hi] without gaps.
        auto sorted = pieces;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lower < b.lower; });
        double reach = sorted.front().lower;
        for (const auto& p : sorted) {
            if (p.lower > reach) throw InvalidArgument("piecewise-linear: pieces leave a gap");
            reach = std::max(reach, p.upper);
        }
        return Mapping(maps::PiecewiseLinear{std::move(pieces)}, ConvexSet::box({lo}, {hi}));
    }

    /// maps[0] o ... o maps[n-1]. The domain defaults to the domain of the
    /// map applied first.
    static Mapping composition(std::vector<Mapping> parts, std::optional<ConvexSet> domain = std::nullopt) {
        if (parts.empty()) throw InvalidArgument("composition: no maps");
        auto dom = domain.value_or(parts.back().domain());
        return Mapping(maps::Composition{std::move(parts)}, std::move(dom));
    }

    /// Same rule, different domain. The new domain must still be mapped into
    /// itself.
    Mapping restricted_to(ConvexSet domain) const { return Mapping(*kind_, std::move(domain)); }

    const Kind& kind() const { return *kind_; }
    const ConvexSet& domain() const { return domain_; }

    std::string kind_name() const {
        return std::visit(
            [](const auto& k) -> std::string {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, maps::Rotation>) return "rotation";
                else if constexpr (std::is_same_v<K, maps::Translation>) return "translation";
                else if constexpr (std::is_same_v<K, maps::Affine>) return "affine";
                else if constexpr (std::is_same_v<K, maps::Projection>) return "projection";
                else if constexpr (std::is_same_v<K, maps::Shift>) return "shift-remark33";
                else if constexpr (std::is_same_v<K, maps::SqrtSection>) return "sqrt-section3";
                else if constexpr (std::is_same_v<K, maps::PiecewiseLinear>) return "piecewise-linear";
                else return "composition";
            },
            *kind_);
    }

    /// Throws DomainError when x is not in the domain.
    Vector operator()(const Vector& x) const {
        if (!domain_.contains(x, kDomainTol))
            throw DomainError(kind_name() + ": point " + x.to_string() + " is outside the domain");
        return evaluate(x);
    }

private:
    Mapping(Kind k, ConvexSet domain) : kind_(std::make_shared<const Kind>(std::move(k))), domain_(std::move(domain)) {
        check_self_map();
    }

    void check_self_map() const {
        constexpr std::size_t kSpotChecks = 16;
        for (const auto& x : sample(domain_, kSpotChecks, 10.0, 0x5eedULL)) {
            const Vector y = evaluate(x);
            if (!domain_.contains(y, 1e-7 * (1.0 + norm(y))))
                throw InvalidArgument(kind_name() + ": does not map its domain into itself (image of " +
                                      x.to_string() + ")");
        }
    }

    Vector evaluate(const Vector& x) const {
        return std::visit([&](const auto& k) { return eval(k, x); }, *kind_);
    }

    static Vector eval(const maps::Rotation& r, const Vector& x) {
        Vector out = x.is_sparse() ? x.densified(r.center.dimension()) : x;
        if (out.dimension() != r.center.dimension()) throw IncompatibleSpace("rotation: dimension mismatch");
        const double c = std::cos(r.angle), s = std::sin(r.angle);
        const double u = x[r.axis0] - r.center[r.axis0];
        const double v = x[r.axis1] - r.center[r.axis1];
        out.at(r.axis0) = r.center[r.axis0] + c * u - s * v;
        out.at(r.axis1) = r.center[r.axis1] + s * u + c * v;
        return out;
    }

    static Vector eval(const maps::Translation& t, const Vector& x) { return x + t.displacement; }

    static Vector eval(const maps::Affine& a, const Vector& x) {
        const std::size_t d = a.offset.dimension();
        const auto xv = x.to_dense(d);
        std::vector<double> out(a.offset.values().begin(), a.offset.values().end());
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) out[i] += a.matrix[i][j] * xv[j];
        return detail::checked(Vector::dense(std::move(out)), "affine");
    }

    static Vector eval(const maps::Projection& p, const Vector& x) { return nearest_point(p.set, x); }

    static Vector eval(const maps::Shift&, const Vector& x) {
        if (!x.is_sparse()) throw IncompatibleSpace("shift-remark33: acts on sparse sequences");
        std::vector<Vector::Entry> out;
        out.reserve(x.entries().size() + 1);
        const double first = x[0];
        if (first != 0.0) out.emplace_back(0, first);
        for (const auto& [i, v] : x.entries()) out.emplace_back(i + 1, v);
        return Vector::sparse(std::move(out));
    }

    static Vector eval(const maps::SqrtSection&, const Vector& x) {
        const double t = x[0];
        return Vector::dense({t == 0.0 ? 1.0 : std::sqrt(std::max(t, 0.0))});
    }

    static Vector eval(const maps::PiecewiseLinear& p, const Vector& x) {
        const double t = x[0];
        for (const auto& piece : p.pieces)
            if (t >= piece.lower && t <= piece.upper) return Vector::dense({piece.slope * t + piece.intercept});
        // Within kDomainTol of the domain but outside every piece: snap to the nearest end.
        const auto* best = &p.pieces.front();
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& piece : p.pieces) {
            const double g = std::min(std::abs(t - piece.lower), std::abs(t - piece.upper));
            if (g < gap) {
                gap = g;
                best = &piece;
            }
        }
        const double s = std::clamp(t, best->lower, best->upper);
        return Vector::dense({best->slope * s + best->intercept});
    }

    static Vector eval(const maps::Composition& c, const Vector& x) {
        Vector cur = x;
        for (auto it = c.maps.rbegin(); it != c.maps.rend(); ++it) cur = (*it)(cur);
        return cur;
    }

    std::shared_ptr<const Kind> kind_;
    ConvexSet domain_;
};

inline Vector apply(const Mapping& m, const Vector& x) { return m(x); }

struct Witness {
    Vector x;
    Vector y;
    /// How far the defining inequality is violated (left minus right side).
    double violation = 0.0;
    std::string detail;
};

struct PropertyReport {
    bool holds = true;
    std::optional<Witness> witness;
    std::size_t samples_used = 0;
    std::string note;
};

namespace detail {

/// Keeps the worst violation seen; ties keep the earliest.
inline void record(PropertyReport& rep, double violation, double tol, const Vector& x, const Vector& y,
                   std::string detail = {}) {
    ++rep.samples_used;
    if (violation > tol && (!rep.witness || violation > rep.witness->violation)) {
        rep.holds = false;
        rep.witness = Witness{x, y, violation, std::move(detail)};
    }
}

} // namespace detail

/// ||Tx - Ty|| <= ||x - y|| + tol over all unordered pairs of `points`.
inline PropertyReport check_nonexpansive(const Mapping& m, std::span<const Vector> points, double tol) {
    PropertyReport rep;
    std::vector<Vector> images;
    images.reserve(points.size());
    for (const auto& p : points) images.push_back(m(p));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            detail::record(rep, distance(images[i], images[j]) - distance(points[i], points[j]), tol, points[i],
                           points[j]);
    return rep;
}

inline PropertyReport check_nonexpansive(const Mapping& m, std::size_t samples, double radius, double tol,
                                         std::uint64_t seed) {
    if (samples < 2) throw InvalidArgument("check_nonexpansive: need at least 2 samples");
    const auto pts = sample(m.domain(), samples, radius, seed);
    return check_nonexpansive(m, pts, tol);
}

/// Finite-horizon surrogate of limsup_n ||T^n x - T^n y|| <= ||x - y||: the
/// limsup is replaced by the max over n in [n_tail, 2 n_tail].
inline PropertyReport check_asymptotically_nonexpansive(const Mapping& m, std::span<const Vector> points,
                                                        std::size_t n_tail, double tol) {
    if (n_tail < 2) throw InvalidArgument("check_asymptotically_nonexpansive: n_tail must be >= 2");
    PropertyReport rep;
    rep.note = "finite-horizon surrogate: limsup replaced by max over n in [" + std::to_string(n_tail) + ", " +
               std::to_string(2 * n_tail) + "]";
    std::vector<std::vector<Vector>> tails(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Vector cur = points[i];
        for (std::size_t n = 1; n <= 2 * n_tail; ++n) {
            cur = m(cur);
            if (n >= n_tail) tails[i].push_back(cur);
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double tail_max = 0.0;
            for (std::size_t k = 0; k < tails[i].size(); ++k)
                tail_max = std::max(tail_max, distance(tails[i][k], tails[j][k]));
            detail::record(rep, tail_max - distance(points[i], points[j]), tol, points[i], points[j]);
        }
    }
    return rep;
}

inline PropertyReport check_asymptotically_nonexpansive(const Mapping& m, std::size_t samples, double radius,
                                                        std::size_t n_tail, double tol, std::uint64_t seed) {
    if (samples < 2) throw InvalidArgument("check_asymptotically_nonexpansive: need at least 2 samples");
    const auto pts = sample(m.domain(), samples, radius, seed);
    return check_asymptotically_nonexpansive(m, pts, n_tail, tol);
}

/// alpha||Tx-Ty||^2 + (1-alpha)||x-Ty||^2 <= beta||Tx-y||^2 + (1-beta)||x-y||^2
/// over all ordered pairs (x, y) of `points`, diagonal included. `tol` is in
/// squared-norm units.
inline PropertyReport check_generalized_hybrid(const Mapping& m, double alpha, double beta,
                                               std::span<const Vector> points, double tol) {
    PropertyReport rep;
    std::vector<Vector> images;
    images.reserve(points.size());
    for (const auto& p : points) images.push_back(m(p));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            const Vector &x = points[i], &y = points[j], &tx = images[i], &ty = images[j];
            const double lhs = alpha * squared_norm(tx - ty) + (1.0 - alpha) * squared_norm(x - ty);
            const double rhs = beta * squared_norm(tx - y) + (1.0 - beta) * squared_norm(x - y);
            detail::record(rep, lhs - rhs, tol, x, y);
        }
    }
    return rep;
}

inline PropertyReport check_generalized_hybrid(const Mapping& m, double alpha, double beta, std::size_t samples,
                                               double radius, double tol, std::uint64_t seed) {
    const auto pts = sample(m.domain(), std::max<std::size_t>(samples, 1), radius, seed);
    return check_generalized_hybrid(m, alpha, beta, pts, tol);
}

} // namespace nonexp
