#pragma once

// Closed convex sets with exact metric projections for the primitive kinds
// and Dykstra's algorithm for intersections.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/random.hpp"

namespace nonexp {

class ConvexSet;

namespace sets {

struct WholeSpace {
    Ambient ambient;
};

/// Per-coordinate bounds; infinities allowed.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct Ball {
    Vector center;
    double radius = 0.0;
};

/// {x : <x|normal> <= offset}
struct HalfSpace {
    Vector normal;
    double offset = 0.0;
};

/// anchor + span(basis), basis orthonormal.
struct AffineSubspace {
    Vector anchor;
    std::vector<Vector> basis;
};

/// {x : x_index >= 0}
struct HalflineCoordinate {
    std::size_t index = 0;
    Ambient ambient;
};

struct Intersection {
    std::vector<ConvexSet> members;
    Vector witness;
};

} // namespace sets

struct ProjectionReport {
    Vector point;
    std::size_t iterations = 0;
    /// Largest distance from `point` to any member set.
    double residual = 0.0;
    bool converged = true;
};

/// Nonempty closed convex set. Immutable; copies share state.
class ConvexSet {
public:
    using Kind = std::variant<sets::WholeSpace, sets::Box, sets::Ball, sets::HalfSpace,
                              sets::AffineSubspace, sets::HalflineCoordinate, sets::Intersection>;

    /// Tolerance used when validating witnesses and orthonormal bases.
    static constexpr double kValidationTol = 1e-9;

    static ConvexSet whole_space(std::size_t dimension, bool sparse = false) {
        return ConvexSet(sets::WholeSpace{Ambient{dimension, sparse}});
    }

    static ConvexSet box(std::vector<double> lower, std::vector<double> upper) {
        if (lower.size() != upper.size()) throw InvalidArgument("box: bound lengths differ");
        if (lower.empty()) throw InvalidArgument("box: zero-dimensional");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (std::isnan(lower[i]) || std::isnan(upper[i]))
                throw InvalidArgument("box: NaN bound");
            if (!(lower[i] <= upper[i]) || lower[i] == std::numeric_limits<double>::infinity() ||
                upper[i] == -std::numeric_limits<double>::infinity())
                throw InvalidArgument("box: bounds not ordered at coordinate " + std::to_string(i + 1));
        }
        return ConvexSet(sets::Box{std::move(lower), std::move(upper)});
    }

    static ConvexSet ball(Vector center, double radius) {
        if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball: radius must be >= 0");
        if (!center.is_finite()) throw InvalidArgument("ball: non-finite center");
        return ConvexSet(sets::Ball{std::move(center), radius});
    }

    static ConvexSet halfspace(Vector normal, double offset) {
        if (!normal.is_finite() || !std::isfinite(offset)) throw InvalidArgument("halfspace: non-finite data");
        if (squared_norm(normal) == 0.0) throw InvalidArgument("halfspace: zero normal");
        return ConvexSet(sets::HalfSpace{std::move(normal), offset});
    }

    static ConvexSet affine(Vector anchor, std::vector<Vector> basis) {
        for (std::size_t i = 0; i < basis.size(); ++i) {
            for (std::size_t j = i; j < basis.size(); ++j) {
                const double want = i == j ? 1.0 : 0.0;
                if (std::abs(inner(basis[i], basis[j]) - want) > kValidationTol)
                    throw InvalidArgument("affine: basis is not orthonormal");
            }
            detail::require_compatible(anchor, basis[i], "affine");
        }
        return ConvexSet(sets::AffineSubspace{std::move(anchor), std::move(basis)});
    }

    /// {x : x_index >= 0} with a 0-based index. The ambient only matters for
    /// sampling; by default sparse sequences with support in the first
    /// max(index+1, 8) coordinates.
    static ConvexSet halfline_coordinate(std::size_t index, std::optional<Ambient> ambient = std::nullopt) {
        Ambient amb = ambient.value_or(Ambient{std::max<std::size_t>(index + 1, 8), true});
        if (amb.dimension <= index) throw InvalidArgument("halfline-coordinate: ambient too small");
        return ConvexSet(sets::HalflineCoordinate{index, amb});
    }

    /// Nested intersections are flattened. `witness` must lie in every member.
    static ConvexSet intersection(std::vector<ConvexSet> members, Vector witness) {
        if (members.empty()) throw InvalidArgument("intersection: no members");
        std::vector<ConvexSet> flat;
        for (auto& m : members) {
            if (const auto* in = std::get_if<sets::Intersection>(&m.kind())) {
                flat.insert(flat.end(), in->members.begin(), in->members.end());
            } else {
                flat.push_back(std::move(m));
            }
        }
        for (std::size_t i = 0; i < flat.size(); ++i) {
            if (!flat[i].contains(witness, kValidationTol))
                throw InvalidArgument("intersection: witness is outside member " + std::to_string(i));
        }
        return ConvexSet(sets::Intersection{std::move(flat), std::move(witness)});
    }

    const Kind& kind() const { return *kind_; }

    std::string kind_name() const {
        return std::visit(
            [](const auto& k) -> std::string {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, sets::WholeSpace>) return "whole-space";
                else if constexpr (std::is_same_v<K, sets::Box>) return "box";
                else if constexpr (std::is_same_v<K, sets::Ball>) return "ball";
                else if constexpr (std::is_same_v<K, sets::HalfSpace>) return "halfspace";
                else if constexpr (std::is_same_v<K, sets::AffineSubspace>) return "affine";
                else if constexpr (std::is_same_v<K, sets::HalflineCoordinate>) return "halfline-coordinate";
                else return "intersection";
            },
            *kind_);
    }

    bool is_primitive() const { return !std::holds_alternative<sets::Intersection>(*kind_); }

    /// Exact metric projection. Primitive kinds only.
    Vector project(const Vector& x) const {
        return std::visit([&](const auto& k) { return project_onto(k, x); }, *kind_);
    }

    /// Exact distance for primitives; for intersections the largest member
    /// distance (a lower bound on the true distance, zero iff x is inside).
    double distance(const Vector& x) const {
        if (const auto* in = std::get_if<sets::Intersection>(kind_.get())) {
            double d = 0.0;
            for (const auto& m : in->members) d = std::max(d, m.distance(x));
            return d;
        }
        return nonexp::distance(x, project(x));
    }

    bool contains(const Vector& x, double tol = 0.0) const { return distance(x) <= tol; }

    Ambient ambient() const {
        return std::visit(
            [](const auto& k) -> Ambient {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, sets::WholeSpace>) return k.ambient;
                else if constexpr (std::is_same_v<K, sets::Box>) return {k.lower.size(), false};
                else if constexpr (std::is_same_v<K, sets::Ball>) return ambient_of(k.center);
                else if constexpr (std::is_same_v<K, sets::HalfSpace>) return ambient_of(k.normal);
                else if constexpr (std::is_same_v<K, sets::AffineSubspace>) return ambient_of(k.anchor);
                else if constexpr (std::is_same_v<K, sets::HalflineCoordinate>) return k.ambient;
                else return ambient_of(k.witness);
            },
            *kind_);
    }

    /// A point known to be in the set: the projection of the ambient origin,
    /// or the witness for intersections.
    Vector reference_point() const {
        if (const auto* in = std::get_if<sets::Intersection>(kind_.get())) return in->witness;
        return project(ambient().zero());
    }

private:
    explicit ConvexSet(Kind k) : kind_(std::make_shared<const Kind>(std::move(k))) {}

    static Ambient ambient_of(const Vector& v) {
        if (v.is_sparse()) return {std::max<std::size_t>(v.dimension(), 1), true};
        return {v.dimension(), false};
    }

    static Vector project_onto(const sets::WholeSpace&, const Vector& x) { return x; }

    static Vector project_onto(const sets::Box& b, const Vector& x) {
        auto v = x.to_dense(b.lower.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], b.lower[i], b.upper[i]);
        return Vector::dense(std::move(v));
    }

    static Vector project_onto(const sets::Ball& b, const Vector& x) {
        const Vector diff = x - b.center;
        const double d = norm(diff);
        if (d <= b.radius) return x;
        return b.center + (b.radius / d) * diff;
    }

    static Vector project_onto(const sets::HalfSpace& h, const Vector& x) {
        const double excess = inner(x, h.normal) - h.offset;
        if (excess <= 0.0) return x;
        return x - (excess / squared_norm(h.normal)) * h.normal;
    }

    static Vector project_onto(const sets::AffineSubspace& a, const Vector& x) {
        const Vector rel = x - a.anchor;
        Vector out = a.anchor;
        for (const auto& b : a.basis) out = out + inner(rel, b) * b;
        return out;
    }

    static Vector project_onto(const sets::HalflineCoordinate& h, const Vector& x) {
        if (x[h.index] >= 0.0) return x;
        if (x.is_sparse()) {
            std::vector<Vector::Entry> e;
            for (const auto& entry : x.entries())
                if (entry.first != h.index) e.push_back(entry);
            return Vector::sparse(std::move(e));
        }
        if (x.dimension() <= h.index) throw IncompatibleSpace("halfline-coordinate: index outside dimension");
        Vector out = x;
        out.at(h.index) = 0.0;
        return out;
    }

    static Vector project_onto(const sets::Intersection&, const Vector&) {
        throw UseDykstra("project: intersection sets need dykstra_project");
    }

    std::shared_ptr<const Kind> kind_;
};

inline bool contains(const ConvexSet& set, const Vector& x, double tol) {
    if (tol < 0.0) throw InvalidArgument("contains: negative tolerance");
    return set.contains(x, tol);
}

inline Vector project(const ConvexSet& set, const Vector& x) { return set.project(x); }

struct DykstraOptions {
    std::size_t max_iter = 10000;
    double tol = 1e-10;
};

/// Dykstra's cyclic projection algorithm. Converges to the metric projection
/// onto the intersection of `members` (not merely some point of it).
/// Stops once no intermediate projection or increment moved by more than
/// `tol` since the previous cycle and every member is within `tol`; otherwise
/// reports converged = false after `max_iter` cycles. (The iterate alone can
/// revisit a point while the increments are still changing.)
inline ProjectionReport dykstra_project(std::span<const ConvexSet> members, const Vector& x,
                                        DykstraOptions opts = {}) {
    std::vector<ConvexSet> flat;
    for (const auto& m : members) {
        if (const auto* in = std::get_if<sets::Intersection>(&m.kind())) {
            flat.insert(flat.end(), in->members.begin(), in->members.end());
        } else {
            flat.push_back(m);
        }
    }
    if (flat.empty()) return {x, 0, 0.0, true};

    ProjectionReport rep;
    Vector cur = x;
    if (flat.size() == 1) {
        rep.point = flat.front().project(x);
        rep.iterations = 1;
        rep.residual = 0.0;
        return rep;
    }

    std::vector<Vector> increments(flat.size(), zero_like(x));
    std::vector<Vector> last(flat.size());
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const Vector shifted = cur + increments[i];
            Vector next = flat[i].project(shifted);
            Vector inc = shifted - next;
            change = std::max(change, it == 1 ? std::numeric_limits<double>::infinity()
                                              : std::max(distance(next, last[i]), distance(inc, increments[i])));
            increments[i] = std::move(inc);
            last[i] = next;
            cur = std::move(next);
        }
        double residual = 0.0;
        for (const auto& m : flat) residual = std::max(residual, m.distance(cur));
        rep.iterations = it;
        rep.residual = residual;
        if (residual <= opts.tol && change <= opts.tol) {
            rep.point = std::move(cur);
            rep.converged = true;
            return rep;
        }
    }
    rep.point = std::move(cur);
    rep.converged = false;
    return rep;
}

inline ProjectionReport dykstra_project(const ConvexSet& set, const Vector& x, DykstraOptions opts = {}) {
    return dykstra_project(std::span<const ConvexSet>(&set, 1), x, opts);
}

/// Metric projection onto any set: closed form for primitives, Dykstra for
/// intersections.
inline Vector nearest_point(const ConvexSet& set, const Vector& x, DykstraOptions opts = {}) {
    if (set.is_primitive()) return set.project(x);
    return dykstra_project(set, x, opts).point;
}

/// n deterministic points of set within `radius` of `center` (default: the
/// set's reference point, which must lie in the set). Uniform draws from the
/// ball are kept when inside the set; after a few misses the last draw is
/// projected, which stays inside the ball because projections are
/// nonexpansive and fix the center.
inline std::vector<Vector> sample(const ConvexSet& set, std::size_t n, double radius, std::uint64_t seed,
                                  std::optional<Vector> center = std::nullopt) {
    if (n < 1) throw InvalidArgument("sample: n must be >= 1");
    if (!(radius > 0.0)) throw InvalidArgument("sample: radius must be > 0");
    const Vector ref = center ? *center : set.reference_point();
    Ambient amb = set.ambient();
    if (!ref.is_sparse()) amb = {ref.dimension(), false};
    Rng rng(seed);
    constexpr int kAttempts = 4;
    std::vector<Vector> out;
    out.reserve(n);
    while (out.size() < n) {
        Vector p;
        bool inside = false;
        for (int a = 0; a < kAttempts && !inside; ++a) {
            p = uniform_in_ball(rng, amb, ref, radius);
            inside = set.contains(p);
        }
        out.push_back(inside ? std::move(p) : nearest_point(set, p));
    }
    return out;
}

struct VerifyReport {
    bool holds = true;
    /// min over sampled c of <x-u | u-c>.
    double worst = 0.0;
    std::optional<Vector> witness;
};

/// Samples c from the set and checks the variational characterization of the
/// metric projection, <x-u | u-c> >= -tol.
inline VerifyReport verify_projection(const ConvexSet& set, const Vector& x, const Vector& u,
                                      std::size_t samples, double tol, std::uint64_t seed) {
    if (!set.contains(u, std::max(tol, 1e-12)))
        throw NotInSet("verify_projection: u is not in the set");
    VerifyReport rep;
    const Vector gap = x - u;
    const double radius = 1.0 + norm(gap);
    for (const auto& c : sample(set, samples, radius, seed, u)) {
        const double v = inner(gap, u - c);
        if (v < rep.worst) {
            rep.worst = v;
            if (v < -tol) rep.witness = c;
        }
    }
    rep.holds = rep.worst >= -tol;
    return rep;
}

} // namespace nonexp
