#pragma once

// Attractive points of a semigroup action and a polyhedral outer model of the
// set of attractive points.
//
// Squaring ||a - T_s x|| <= ||a - x|| and expanding both sides gives
//     2 <a | x - T_s x> <= ||x||^2 - ||T_s x||^2,
// which is linear in a. Every sampled pair (x, s) therefore contributes one
// half-space, and the attractive set is contained in their intersection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nonexp/convex.hpp"
#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/mappings.hpp"
#include "nonexp/semigroup.hpp"

namespace nonexp {

/// Test points and semigroup elements over which attractiveness is checked.
struct Battery {
    std::vector<Vector> points;
    std::vector<Address> elements;
    double tol = 1e-9;
};

/// `n_points` samples of the action's domain within `radius` of `center` (the
/// domain's reference point by default) together with the first
/// `n_elements` semigroup elements in graded order.
inline Battery make_battery(const SemigroupAction& action, std::size_t n_points, double radius, std::uint64_t seed,
                            std::size_t n_elements = 1, double tol = 1e-9,
                            std::optional<Vector> center = std::nullopt) {
    Battery b;
    b.points = sample(action.domain(), n_points, radius, seed, std::move(center));
    b.elements = action.enumerate(n_elements);
    b.tol = tol;
    return b;
}

/// ||a - T_s x|| <= ||a - x|| + tol for every test point x and element s.
inline PropertyReport is_attractive(const Vector& a, const SemigroupAction& action, std::span<const Vector> points,
                                    std::span<const Address> elements, double tol) {
    PropertyReport rep;
    for (const auto& x : points) {
        const double base = distance(a, x);
        for (const auto& s : elements) {
            const Vector y = action.act(s, x);
            detail::record(rep, distance(a, y) - base, tol, x, y, "element " + to_string(s));
        }
    }
    return rep;
}

inline PropertyReport is_attractive(const Vector& a, const SemigroupAction& action, const Battery& battery) {
    return is_attractive(a, action, battery.points, battery.elements, battery.tol);
}

/// Finite-horizon surrogate of limsup_n ||a - (T_t)^n x|| <= ||a - x||: the
/// limsup is replaced by the max over n in [n_tail, 2 n_tail].
inline PropertyReport is_asymptotically_attractive(const Vector& a, const SemigroupAction& action,
                                                   std::span<const Vector> points, std::span<const Address> elements,
                                                   std::size_t n_tail, double tol,
                                                   double blowup = kBlowUpThreshold) {
    if (n_tail < 2) throw InvalidArgument("is_asymptotically_attractive: n_tail must be >= 2");
    PropertyReport rep;
    rep.note = "finite-horizon surrogate: limsup replaced by max over n in [" + std::to_string(n_tail) + ", " +
               std::to_string(2 * n_tail) + "]";
    for (const auto& x : points) {
        const double base = distance(a, x);
        for (const auto& t : elements) {
            Vector cur = x;
            double tail_max = 0.0;
            for (std::size_t n = 1; n <= 2 * n_tail; ++n) {
                cur = action.act(t, cur);
                const double nc = norm(cur);
                if (nc > blowup)
                    throw DivergingOrbit("is_asymptotically_attractive: orbit of " + x.to_string() + " under " +
                                         to_string(t) + " exceeds the blow-up threshold");
                if (n >= n_tail) tail_max = std::max(tail_max, distance(a, cur));
            }
            detail::record(rep, tail_max - base, tol, x, cur, "element " + to_string(t));
        }
    }
    return rep;
}

/// One linearized attractiveness constraint <a | normal> <= offset, with the
/// sample it came from.
struct ModelConstraint {
    Vector normal;
    double offset = 0.0;
    Vector source;
    Address element;
    Vector image;

    /// Re-derives (normal, offset) from (source, image).
    static ModelConstraint from_sample(Vector x, Address s, Vector tx) {
        ModelConstraint c;
        const Vector d = x - tx;
        c.normal = 2.0 * d;
        // ||x||^2 - ||Tx||^2 factored; no cancellation when Tx is close to x.
        c.offset = inner(d, x + tx);
        c.source = std::move(x);
        c.element = std::move(s);
        c.image = std::move(tx);
        return c;
    }

    bool trivial() const { return norm(normal) <= 1e-14 * (1.0 + norm(source)); }

    /// Amount by which a violates the constraint (<= 0 when satisfied).
    double violation(const Vector& a) const { return inner(a, normal) - offset; }
};

/// Sampled outer model of the attractive set: the intersection of the
/// half-spaces of its constraints. Constraints whose unit normals agree to
/// cosine >= 1 - 1e-10 with normalized offsets within 1e-10 are merged.
class AttractiveModel {
public:
    static constexpr double kDedupCos = 1e-10;
    static constexpr double kDedupOffset = 1e-10;

    /// Returns false when the constraint duplicated an existing one.
    bool add(ModelConstraint c) {
        if (c.trivial()) {
            if (c.offset < -1e-12 * (1.0 + squared_norm(c.source)))
                throw EmptyModel("attractive model: constraint 0 <= " + std::to_string(c.offset) + " is infeasible");
            if (has_trivial_) return false;
            has_trivial_ = true;
            constraints_.push_back(std::move(c));
            return true;
        }
        const double n = norm(c.normal);
        const Vector unit = (1.0 / n) * c.normal;
        const double off = c.offset / n;
        auto& bucket = buckets_[bucket_key(unit)];
        for (std::size_t idx : bucket) {
            const auto& other = constraints_[idx];
            const double on = norm(other.normal);
            if (inner(unit, other.normal) / on >= 1.0 - kDedupCos && std::abs(other.offset / on - off) <= kDedupOffset)
                return false;
        }
        bucket.push_back(constraints_.size());
        constraints_.push_back(std::move(c));
        return true;
    }

    std::span<const ModelConstraint> constraints() const { return constraints_; }
    std::size_t size() const { return constraints_.size(); }

    /// Every non-trivial constraint as a half-space.
    std::vector<ConvexSet> halfspaces() const {
        std::vector<ConvexSet> out;
        for (const auto& c : constraints_)
            if (!c.trivial()) out.push_back(ConvexSet::halfspace(c.normal, c.offset));
        return out;
    }

    /// Largest constraint violation at a, scaled to a distance.
    double max_violation(const Vector& a) const {
        double worst = 0.0;
        for (const auto& c : constraints_)
            if (!c.trivial()) worst = std::max(worst, c.violation(a) / norm(c.normal));
        return worst;
    }

    bool feasible(const Vector& a, double tol) const { return max_violation(a) <= tol; }

private:
    static std::string bucket_key(const Vector& unit) {
        // Quantized direction; near-duplicates straddling a cell edge survive,
        // which only costs an extra (harmless) half-space.
        std::string key;
        char buf[32];
        if (unit.is_sparse()) {
            for (const auto& [i, v] : unit.entries()) {
                std::snprintf(buf, sizeof buf, "%zu:%.0f;", i, std::round(v * 1e6));
                key += buf;
            }
        } else {
            for (double v : unit.values()) {
                std::snprintf(buf, sizeof buf, "%.0f;", std::round(v * 1e6));
                key += buf;
            }
        }
        return key;
    }

    std::vector<ModelConstraint> constraints_;
    std::unordered_map<std::string, std::vector<std::size_t>> buckets_;
    bool has_trivial_ = false;
};

/// One constraint per (x, s) in sample_x x elements.
inline AttractiveModel build_model(const SemigroupAction& action, std::span<const Vector> sample_x,
                                   std::span<const Address> elements) {
    AttractiveModel model;
    for (const auto& x : sample_x)
        for (const auto& s : elements) model.add(ModelConstraint::from_sample(x, s, action.act(s, x)));
    return model;
}

/// Adds the constraints of (x, s) pairs to an existing model.
inline void extend_model(AttractiveModel& model, const SemigroupAction& action, std::span<const Vector> sample_x,
                         std::span<const Address> elements) {
    for (const auto& x : sample_x)
        for (const auto& s : elements) model.add(ModelConstraint::from_sample(x, s, action.act(s, x)));
}

enum class ModelSolver {
    active_set, ///< exact dual active-set QP (default)
    dykstra     ///< Dykstra on a growing working set of half-spaces
};

struct ModelProjectionOptions {
    ModelSolver solver = ModelSolver::active_set;
    std::size_t max_iter = 10000;
    /// Allowed constraint violation, in distance units.
    double tol = 1e-10;
};

namespace detail {

// min ||u - x||^2 / 2 subject to <n_i | u> <= b_i, unit n_i. Dual active-set
// method in the style of Goldfarb and Idnani: start from the unconstrained
// minimizer x and repeatedly add the most violated constraint, dropping active
// ones whose multiplier would turn negative. Active normals stay linearly
// independent, so the working set never exceeds the dimension.
inline ProjectionReport active_set_project(const std::vector<ConvexSet>& hs, const Vector& x,
                                           const ModelProjectionOptions& opts) {
    std::size_t dim = x.dimension();
    for (const auto& h : hs) dim = std::max(dim, std::get<sets::HalfSpace>(h.kind()).normal.dimension());
    const auto m = static_cast<Eigen::Index>(hs.size());
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd n = Eigen::MatrixXd::Zero(m, d);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& h = std::get<sets::HalfSpace>(hs[static_cast<std::size_t>(i)].kind());
        const double len = norm(h.normal);
        const auto dense = h.normal.to_dense(dim);
        for (Eigen::Index j = 0; j < d; ++j) n(i, j) = dense[static_cast<std::size_t>(j)] / len;
        b[i] = h.offset / len;
    }
    Eigen::VectorXd u(d);
    {
        const auto xd = x.to_dense(dim);
        for (Eigen::Index j = 0; j < d; ++j) u[j] = xd[static_cast<std::size_t>(j)];
    }

    std::vector<Eigen::Index> active;
    std::vector<double> lambda;
    std::vector<bool> in_active(hs.size(), false);
    ProjectionReport rep;
    rep.converged = false;
    std::size_t it = 0;
    for (; it < opts.max_iter; ++it) {
        Eigen::Index p = -1;
        double worst = opts.tol;
        const Eigen::VectorXd slack = n * u - b;
        for (Eigen::Index i = 0; i < m; ++i)
            if (!in_active[static_cast<std::size_t>(i)] && slack[i] > worst) {
                worst = slack[i];
                p = i;
            }
        if (p < 0) {
            rep.converged = true;
            break;
        }
        const Eigen::VectorXd np = n.row(p).transpose();
        double lp = 0.0;
        while (true) {
            const auto k = static_cast<Eigen::Index>(active.size());
            Eigen::VectorXd r(k);
            Eigen::VectorXd z = np;
            if (k > 0) {
                Eigen::MatrixXd na(k, d);
                for (Eigen::Index j = 0; j < k; ++j) na.row(j) = n.row(active[static_cast<std::size_t>(j)]);
                r = (na * na.transpose()).ldlt().solve(na * np);
                z = np - na.transpose() * r;
            }
            double t2 = std::numeric_limits<double>::infinity();
            Eigen::Index block = -1;
            for (Eigen::Index j = 0; j < k; ++j)
                if (r[j] > 1e-14 && lambda[static_cast<std::size_t>(j)] / r[j] < t2) {
                    t2 = lambda[static_cast<std::size_t>(j)] / r[j];
                    block = j;
                }
            const double zz = z.squaredNorm();
            const double t1 = zz > 1e-20 ? (np.dot(u) - b[p]) / zz : std::numeric_limits<double>::infinity();
            if (!std::isfinite(t1) && block < 0)
                throw EmptyModel("project_onto_model: the half-spaces have empty intersection");
            const double t = std::min(t1, t2);
            if (std::isfinite(t1)) u -= t * z;
            for (Eigen::Index j = 0; j < k; ++j) lambda[static_cast<std::size_t>(j)] -= t * r[j];
            lp += t;
            if (t1 <= t2) {
                active.push_back(p);
                lambda.push_back(lp);
                in_active[static_cast<std::size_t>(p)] = true;
                break;
            }
            in_active[static_cast<std::size_t>(active[static_cast<std::size_t>(block)])] = false;
            active.erase(active.begin() + block);
            lambda.erase(lambda.begin() + block);
        }
    }
    rep.iterations = it;
    std::vector<double> out(u.data(), u.data() + d);
    if (x.is_sparse()) {
        std::vector<Vector::Entry> e;
        for (std::size_t j = 0; j < out.size(); ++j)
            if (out[j] != 0.0) e.emplace_back(j, out[j]);
        rep.point = Vector::sparse(std::move(e));
    } else {
        rep.point = Vector::dense(std::move(out));
    }
    return rep;
}

inline ProjectionReport working_set_dykstra(const std::vector<ConvexSet>& hs, const Vector& x,
                                            const ModelProjectionOptions& opts) {
    constexpr std::size_t kBatch = 8;
    DykstraOptions dopts{opts.max_iter, opts.tol};
    std::vector<ConvexSet> working;
    std::vector<bool> used(hs.size(), false);
    ProjectionReport rep{x, 0, 0.0, true};
    std::size_t total_iters = 0;
    while (true) {
        std::vector<std::pair<double, std::size_t>> violated;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            if (used[i]) continue;
            const double dist = hs[i].distance(rep.point);
            if (dist > opts.tol) violated.emplace_back(dist, i);
        }
        if (violated.empty()) break;
        std::sort(violated.begin(), violated.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
        for (std::size_t k = 0; k < std::min(kBatch, violated.size()); ++k) {
            used[violated[k].second] = true;
            working.push_back(hs[violated[k].second]);
        }
        rep = dykstra_project(working, x, dopts);
        total_iters += rep.iterations;
        if (!rep.converged) break;
    }
    rep.iterations = total_iters;
    return rep;
}

} // namespace detail

/// Metric projection onto the model's feasible region. The default solver is
/// exact up to rounding; the Dykstra solver adds the most violated
/// constraints to a working set until the result satisfies all of them (the
/// projection onto a superset that lands in the model is the projection onto
/// the model). When a witness is given it must satisfy every constraint.
inline ProjectionReport project_onto_model(const AttractiveModel& model, const Vector& x,
                                           ModelProjectionOptions opts = {},
                                           const std::optional<Vector>& witness = std::nullopt) {
    if (witness && !model.feasible(*witness, 1e-9 * (1.0 + norm(*witness))))
        throw EmptyModel("project_onto_model: witness violates the model by " +
                         std::to_string(model.max_violation(*witness)));
    const auto hs = model.halfspaces();
    ProjectionReport rep = opts.solver == ModelSolver::active_set ? detail::active_set_project(hs, x, opts)
                                                                  : detail::working_set_dykstra(hs, x, opts);
    rep.residual = 0.0;
    for (const auto& h : hs) rep.residual = std::max(rep.residual, h.distance(rep.point));
    rep.converged = rep.converged && rep.residual <= std::max(opts.tol, 1e-12 * (1.0 + norm(rep.point)));
    return rep;
}

struct PipelineReport {
    Vector attractive_candidate;
    Vector projected_fixed_candidate;
    double max_fixed_residual = 0.0;
    /// max_fixed_residual <= the requested tolerance.
    bool fixed = false;
};

/// Takes an attractive point a, projects it onto C and measures how far the
/// projection is from being fixed by every generator. Throws NotAttractive
/// (with the witness in the message) when a fails the battery.
inline PipelineReport attractive_to_fixed(const Vector& a, const ConvexSet& set, const SemigroupAction& action,
                                          const Battery& battery, double tol = 1e-6) {
    const auto check = is_attractive(a, action, battery);
    if (!check.holds) {
        const auto& w = *check.witness;
        throw NotAttractive("attractive_to_fixed: " + a.to_string() + " is not attractive: ||a - T x|| exceeds " +
                            "||a - x|| by " + std::to_string(w.violation) + " at x = " + w.x.to_string() + " (" +
                            w.detail + ")");
    }
    PipelineReport rep;
    rep.attractive_candidate = a;
    rep.projected_fixed_candidate = nearest_point(set, a);
    for (const auto& g : action.generators())
        rep.max_fixed_residual =
            std::max(rep.max_fixed_residual, distance(g(rep.projected_fixed_candidate), rep.projected_fixed_candidate));
    rep.fixed = rep.max_fixed_residual <= tol;
    return rep;
}

} // namespace nonexp
