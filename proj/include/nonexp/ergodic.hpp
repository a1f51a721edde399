#pragma once

// Desk-scale ergodic experiments: the net P(T_t x) of projections of an
// orbit onto the attractive model, its agreement with the mean vector T_mu x,
// and the three counterexample specimens (shift, translation, sqrt).

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nonexp/attractive.hpp"
#include "nonexp/convex.hpp"
#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/mappings.hpp"
#include "nonexp/means.hpp"
#include "nonexp/semigroup.hpp"

namespace nonexp {

struct ErgodicRow {
    Address element;
    Vector point;      ///< T_t x
    Vector projected;  ///< P_model(T_t x)
    Vector running_average;  ///< uniform average of the points enumerated so far
    double distance_to_model = 0.0;  ///< ||T_t x - P_model(T_t x)||
    double distance_to_mean = std::numeric_limits<double>::quiet_NaN();
    double dykstra_residual = 0.0;
    /// ||T_t x - P(T_t x)|| exceeded the value at a predecessor by more than tol.
    bool flagged = false;
};

enum class Verdict { agree, disagree, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::agree: return "agree";
    case Verdict::disagree: return "disagree";
    default: return "inconclusive";
    }
}

struct ErgodicTolerances {
    double monotonicity = 1e-9;
    double net_cauchy = 1e-6;
    double agreement = 1e-5;
    double mean = 1e-8;
    double dykstra = 1e-10;
};

struct ErgodicTrace {
    std::vector<ErgodicRow> rows;
    Verdict verdict = Verdict::inconclusive;
    ErgodicTolerances tolerances;
    std::size_t flagged_rows = 0;
    /// Diameter of the P column over the last `cauchy_window` rows.
    double net_cauchy_residual = 0.0;
    std::size_t cauchy_window = 20;
    std::optional<MeanVectorReport> mean;
    double final_distance = std::numeric_limits<double>::quiet_NaN();
    std::size_t model_constraints = 0;
    std::string note;
};

/// Projects T_t x onto the model for the first `horizon` elements t in graded
/// order. Rows where the distance to the model grows along the semigroup
/// order (compared with every immediate predecessor) by more than
/// tol.monotonicity are flagged.
inline ErgodicTrace run_projection_net(const SemigroupAction& action, const AttractiveModel& model, const Vector& x,
                                       std::size_t horizon, const ErgodicTolerances& tol = {},
                                       std::size_t cauchy_window = 20) {
    ErgodicTrace trace;
    trace.tolerances = tol;
    trace.cauchy_window = cauchy_window;
    trace.model_constraints = model.size();
    const auto orb = orbit(action, x, horizon);
    std::map<std::string, std::size_t> index;
    Vector sum = zero_like(x);
    ModelProjectionOptions popts;
    popts.tol = tol.dykstra;
    for (const auto& [t, p] : orb.points) {
        ErgodicRow row;
        row.element = t;
        row.point = p;
        const auto proj = project_onto_model(model, p, popts);
        row.projected = proj.point;
        row.dykstra_residual = proj.residual;
        row.distance_to_model = distance(p, proj.point);
        sum = sum + p;
        row.running_average = (1.0 / static_cast<double>(trace.rows.size() + 1)) * sum;
        for (const auto& pred : predecessors(t)) {
            const auto it = index.find(to_string(pred));
            if (it != index.end() &&
                row.distance_to_model > trace.rows[it->second].distance_to_model + tol.monotonicity)
                row.flagged = true;
        }
        if (row.flagged) ++trace.flagged_rows;
        index.emplace(to_string(t), trace.rows.size());
        trace.rows.push_back(std::move(row));
    }
    const std::size_t n = trace.rows.size();
    const std::size_t from = n > cauchy_window ? n - cauchy_window : 0;
    for (std::size_t i = from; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            trace.net_cauchy_residual =
                std::max(trace.net_cauchy_residual, distance(trace.rows[i].projected, trace.rows[j].projected));
    return trace;
}

struct ErgodicCheckConfig {
    AveragingScheme scheme = AveragingScheme::cesaro();
    MeanOptions mean;
    ErgodicTolerances tol;
    std::size_t horizon = 1024;
    std::size_t cauchy_window = 20;
    /// Random test points added to the model, drawn within `battery_radius`
    /// of the domain's reference point.
    std::size_t battery_points = 200;
    double battery_radius = 10.0;
    /// Elements per test point (graded order); generators come first.
    std::size_t battery_elements = 1;
    /// Also add constraints from the orbit points themselves, which is what
    /// makes the distance column provably non-increasing on the model.
    bool orbit_constraints = true;
    std::uint64_t seed = 1;
};

/// Computes T_mu x and the projection net and compares their limits.
inline ErgodicTrace run_ergodic_check(const SemigroupAction& action, const Vector& x, const ErgodicCheckConfig& cfg) {
    const auto orb = orbit(action, x, cfg.horizon, cfg.mean.blowup);
    if (orb.verdict == Boundedness::no)
        throw DivergingOrbit("run_ergodic_check: orbit norm " + std::to_string(orb.max_norm) +
                             " exceeds the blow-up threshold");
    MeanOptions mopts = cfg.mean;
    mopts.tol = cfg.tol.mean;
    auto mean = mean_vector(cfg.scheme, action, x, mopts);

    auto battery = make_battery(action, cfg.battery_points, cfg.battery_radius, cfg.seed, cfg.battery_elements);
    auto model = build_model(action, battery.points, battery.elements);
    if (cfg.orbit_constraints) {
        std::vector<Vector> pts{x};
        for (const auto& [t, p] : orb.points) pts.push_back(p);
        std::vector<Address> gens;
        for (std::size_t i = 0; i < action.rank(); ++i) gens.push_back(action.generator_address(i));
        extend_model(model, action, pts, gens);
    }

    auto trace = run_projection_net(action, model, x, cfg.horizon, cfg.tol, cfg.cauchy_window);
    for (auto& row : trace.rows) row.distance_to_mean = distance(row.projected, mean.value);
    trace.final_distance = trace.rows.back().distance_to_mean;

    const double slack = cfg.tol.agreement;
    if (!model.feasible(mean.value, slack))
        trace.note = "mean vector violates the attractive model by " + std::to_string(model.max_violation(mean.value));
    if (!mean.converged) {
        trace.verdict = Verdict::inconclusive;
        trace.note = "mean vector did not converge (residual " + std::to_string(mean.cauchy_residual) + ")";
    } else {
        trace.verdict = trace.final_distance <= cfg.tol.agreement ? Verdict::agree : Verdict::disagree;
    }
    trace.mean = std::move(mean);
    return trace;
}

struct CounterexampleCheck {
    std::string name;
    bool passed = false;
    /// Informational checks are reported but do not decide the outcome.
    bool required = true;
    double value = 0.0;
    std::string detail;
};

struct CounterexampleReport {
    std::string name;
    bool passed = false;
    std::vector<CounterexampleCheck> checks;
    /// Candidates refuted on the grid (shift only) with their witnesses.
    std::size_t candidates = 0;
    std::size_t refuted = 0;
};

inline const std::vector<std::string>& counterexample_names() {
    static const std::vector<std::string> names{"shift-remark33", "sqrt-section3", "translation"};
    return names;
}

namespace detail {

inline void finish(CounterexampleReport& rep) {
    rep.passed = true;
    for (const auto& c : rep.checks)
        if (c.required && !c.passed) rep.passed = false;
}

inline CounterexampleReport shift_counterexample(std::uint64_t seed) {
    CounterexampleReport rep{"shift-remark33"};
    const auto shift = Mapping::shift();
    const auto action = SemigroupAction::cyclic(shift);

    const Vector origin;
    const double fixed_residual = distance(shift(origin), origin);
    rep.checks.push_back({"fixed point at 0", fixed_residual == 0.0, true, fixed_residual,
                          "||T(0) - 0|| must be exactly 0"});

    // Battery: rays t e_1 plus random points of {x_1 >= 0}; elements T and T^2.
    std::vector<Vector> battery;
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) battery.push_back(Vector::sparse({{0, t}}));
    for (auto& p : sample(shift.domain(), 32, 4.0, seed)) battery.push_back(std::move(p));
    const auto elements = action.enumerate(2);

    constexpr int kSide = 11;
    for (int i = 0; i < kSide; ++i)
        for (int j = 0; j < kSide; ++j)
            for (int k = 0; k < kSide; ++k) {
                const auto coord = [](int m) { return -2.0 + 0.4 * m; };
                const Vector a = Vector::sparse({{0, coord(i)}, {1, coord(j)}, {2, coord(k)}});
                ++rep.candidates;
                const auto r = is_attractive(a, action, battery, elements, 0.0);
                if (r.holds || !r.witness) continue;
                // Re-check the witness independently of the report.
                const auto& w = *r.witness;
                if (distance(a, w.y) > distance(a, w.x)) ++rep.refuted;
            }
    rep.checks.push_back({"grid candidates refuted", rep.refuted == rep.candidates, true,
                          static_cast<double>(rep.refuted),
                          std::to_string(rep.refuted) + " of " + std::to_string(rep.candidates) +
                              " candidates on the 11x11x11 grid in [-2,2]^3 have a witness x with ||a - Tx|| > ||a - x||"});

    const auto ne = check_nonexpansive(shift, 32, 4.0, 1e-12, seed);
    rep.checks.push_back({"nonexpansive (sampled)", ne.holds, false, ne.witness ? ne.witness->violation : 0.0,
                          ne.holds ? "no counterexample found"
                                   : "||T(x-y)||^2 = (x_1-y_1)^2 + ||x-y||^2 in l2, so the shift expands pairs with "
                                     "x_1 != y_1"});
    finish(rep);
    return rep;
}

inline CounterexampleReport translation_counterexample(std::uint64_t seed) {
    CounterexampleReport rep{"translation"};
    const Vector v = Vector::dense({1.0, 0.0});
    const auto t = Mapping::translation(v);
    const auto action = SemigroupAction::cyclic(t);
    const double vn = norm(v);

    const auto ne = check_nonexpansive(t, 64, 10.0, 1e-12, seed);
    rep.checks.push_back({"nonexpansive", ne.holds, true, ne.witness ? ne.witness->violation : 0.0, ne.note});

    double min_move = std::numeric_limits<double>::infinity();
    for (const auto& p : sample(t.domain(), 256, 100.0, seed + 1)) min_move = std::min(min_move, distance(t(p), p));
    rep.checks.push_back({"fixed-point free", min_move >= vn * (1.0 - 1e-12), true, min_move,
                          "min over samples of ||Tx - x|| equals ||v||"});

    const auto orb = orbit(action, Vector::zeros(2), 100, 50.0 * vn);
    rep.checks.push_back({"unbounded orbit", orb.verdict == Boundedness::no, true, orb.max_norm,
                          "orbit of 0 over 100 elements against threshold 50||v||"});

    const double avg = norm(stage_average(AveragingScheme::cesaro(), action, Vector::zeros(2), 1000));
    const double expected = 500.5 * vn;
    rep.checks.push_back({"Cesaro stage average at n=1000", std::abs(avg - expected) <= 1e-9 * expected, true, avg,
                          "||(1/n) sum_k T^k 0|| = (n+1)/2 ||v||"});

    bool diverged = false;
    try {
        const auto m = mean_vector(AveragingScheme::cesaro(), action, Vector::zeros(2));
        diverged = !m.converged;
    } catch (const DivergingOrbit&) {
        diverged = true;
    }
    rep.checks.push_back({"mean vector diverges", diverged, true, 0.0, "Cesaro averages blow up"});
    finish(rep);
    return rep;
}

inline CounterexampleReport sqrt_counterexample(std::uint64_t seed) {
    CounterexampleReport rep{"sqrt-section3"};
    const auto t = Mapping::sqrt_section();
    const auto action = SemigroupAction::cyclic(t);

    const std::vector<Vector> pair{Vector::dense({0.0}), Vector::dense({0.01})};
    const auto ne = check_nonexpansive(t, pair, 0.0);
    const double gap = ne.witness ? ne.witness->violation : 0.0;
    rep.checks.push_back({"nonexpansive fails at (0, 0.01)", !ne.holds && gap >= 0.89, true, gap,
                          "|T(0) - T(0.01)| - |0 - 0.01| = 0.9 - 0.01"});

    auto pts = sample(t.domain(), 64, 1.0, seed);
    pts.insert(pts.begin(), pair.begin(), pair.end());
    const auto asym = check_asymptotically_nonexpansive(t, pts, 50, 1e-12);
    rep.checks.push_back({"asymptotically nonexpansive surrogate", asym.holds, true,
                          asym.witness ? asym.witness->violation : 0.0, asym.note});

    const auto elements = action.enumerate(1);
    const auto aa = is_asymptotically_attractive(Vector::dense({1.0}), action, pts, elements, 50, 1e-12);
    rep.checks.push_back({"a = 1 asymptotically attractive", aa.holds, true,
                          aa.witness ? aa.witness->violation : 0.0, aa.note});
    finish(rep);
    return rep;
}

} // namespace detail

inline CounterexampleReport run_counterexample(const std::string& name, std::uint64_t seed = 1) {
    if (name == "shift-remark33") return detail::shift_counterexample(seed);
    if (name == "translation") return detail::translation_counterexample(seed);
    if (name == "sqrt-section3") return detail::sqrt_counterexample(seed);
    throw InvalidArgument("unknown counterexample '" + name + "'");
}

} // namespace nonexp
