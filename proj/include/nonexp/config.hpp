#pragma once

// JSON descriptors for vectors, sets, mappings, actions, schemes and whole
// experiments. Every parse error is a ConfigError carrying the JSON pointer
// of the offending value.
//
// Vector literals: dense `[1, 2]` or sparse `{"3": 1.5}` (1-based keys).
// Coordinate indices in descriptors (half-line index, rotation plane) are
// 1-based as well.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonexp/convex.hpp"
#include "nonexp/errors.hpp"
#include "nonexp/ergodic.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/mappings.hpp"
#include "nonexp/means.hpp"
#include "nonexp/semigroup.hpp"

namespace nonexp::config {

using json = nlohmann::json;

namespace detail {

inline std::string child(const std::string& ptr, const std::string& key) {
    std::string esc;
    for (char c : key) {
        if (c == '~') esc += "~0";
        else if (c == '/') esc += "~1";
        else esc += c;
    }
    return ptr + "/" + esc;
}

inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline const json& require(const json& j, const std::string& ptr, const std::string& key) {
    if (!j.is_object()) throw ConfigError(ptr, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(child(ptr, key), "missing required key");
    return *it;
}

inline const json* optional(const json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double number(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
    return v;
}

inline double positive(const json& j, const std::string& ptr) {
    const double v = number(j, ptr);
    if (!(v > 0.0)) throw ConfigError(ptr, "must be positive");
    return v;
}

inline std::size_t count(const json& j, const std::string& ptr, std::size_t min = 0) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(ptr, "expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < static_cast<std::int64_t>(min)) throw ConfigError(ptr, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

inline std::string string(const json& j, const std::string& ptr) {
    if (!j.is_string()) throw ConfigError(ptr, "expected a string");
    return j.get<std::string>();
}

/// Bound of a box: number, or null / "inf" / "-inf" for infinite.
inline double bound(const json& j, const std::string& ptr, double infinite) {
    if (j.is_null()) return infinite;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw ConfigError(ptr, "expected a number, null, \"inf\" or \"-inf\"");
    }
    return number(j, ptr);
}

template <class F>
auto wrap(const std::string& ptr, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(ptr, e.what());
    }
}

} // namespace detail

inline Vector parse_vector(const json& j, const std::string& ptr) {
    if (j.is_array()) {
        std::vector<double> v;
        for (std::size_t i = 0; i < j.size(); ++i) v.push_back(detail::number(j[i], detail::child(ptr, i)));
        return Vector::dense(std::move(v));
    }
    if (j.is_object()) {
        std::vector<Vector::Entry> e;
        for (const auto& [key, val] : j.items()) {
            const auto p = detail::child(ptr, key);
            std::size_t pos = 0;
            unsigned long long idx = 0;
            try {
                idx = std::stoull(key, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != key.size() || idx < 1) throw ConfigError(p, "sparse keys must be 1-based integers");
            e.emplace_back(static_cast<std::size_t>(idx - 1), detail::number(val, p));
        }
        return Vector::sparse(std::move(e));
    }
    throw ConfigError(ptr, "expected a vector: array (dense) or object (sparse, 1-based keys)");
}

inline std::vector<double> parse_numbers(const json& j, const std::string& ptr) {
    if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(detail::number(j[i], detail::child(ptr, i)));
    return v;
}

inline const std::vector<std::string>& set_kinds() {
    static const std::vector<std::string> k{"affine", "ball", "box", "halfline-coordinate", "halfspace",
                                            "intersection", "whole-space"};
    return k;
}

inline ConvexSet parse_set(const json& j, const std::string& ptr) {
    using detail::child;
    using detail::require;
    const auto kind = detail::string(require(j, ptr, "kind"), child(ptr, "kind"));
    if (kind == "whole-space") {
        const auto d = detail::count(require(j, ptr, "dimension"), child(ptr, "dimension"), 1);
        bool sparse = false;
        if (const auto* s = detail::optional(j, "sparse")) {
            if (!s->is_boolean()) throw ConfigError(child(ptr, "sparse"), "expected a boolean");
            sparse = s->get<bool>();
        }
        return ConvexSet::whole_space(d, sparse);
    }
    if (kind == "box") {
        const auto& lo = require(j, ptr, "lower");
        const auto& hi = require(j, ptr, "upper");
        if (!lo.is_array()) throw ConfigError(child(ptr, "lower"), "expected an array");
        if (!hi.is_array()) throw ConfigError(child(ptr, "upper"), "expected an array");
        if (lo.size() != hi.size()) throw ConfigError(child(ptr, "upper"), "length differs from lower");
        std::vector<double> l, u;
        const double inf = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < lo.size(); ++i) {
            l.push_back(detail::bound(lo[i], child(child(ptr, "lower"), i), -inf));
            u.push_back(detail::bound(hi[i], child(child(ptr, "upper"), i), inf));
            if (l.back() > u.back()) throw ConfigError(child(child(ptr, "upper"), i), "upper bound below lower bound");
        }
        return detail::wrap(ptr, [&] { return ConvexSet::box(std::move(l), std::move(u)); });
    }
    if (kind == "ball") {
        const auto center = parse_vector(require(j, ptr, "center"), child(ptr, "center"));
        const double r = detail::number(require(j, ptr, "radius"), child(ptr, "radius"));
        if (r < 0.0) throw ConfigError(child(ptr, "radius"), "radius must be >= 0");
        return detail::wrap(ptr, [&] { return ConvexSet::ball(center, r); });
    }
    if (kind == "halfspace") {
        const auto normal = parse_vector(require(j, ptr, "normal"), child(ptr, "normal"));
        if (norm(normal) == 0.0) throw ConfigError(child(ptr, "normal"), "normal must be nonzero");
        const double off = detail::number(require(j, ptr, "offset"), child(ptr, "offset"));
        return detail::wrap(ptr, [&] { return ConvexSet::halfspace(normal, off); });
    }
    if (kind == "affine") {
        const auto anchor = parse_vector(require(j, ptr, "anchor"), child(ptr, "anchor"));
        const auto& b = require(j, ptr, "basis");
        if (!b.is_array()) throw ConfigError(child(ptr, "basis"), "expected an array of vectors");
        std::vector<Vector> basis;
        for (std::size_t i = 0; i < b.size(); ++i) basis.push_back(parse_vector(b[i], child(child(ptr, "basis"), i)));
        return detail::wrap(child(ptr, "basis"), [&] { return ConvexSet::affine(anchor, basis); });
    }
    if (kind == "halfline-coordinate") {
        const auto idx = detail::count(require(j, ptr, "index"), child(ptr, "index"), 1);
        std::optional<Ambient> amb;
        if (const auto* d = detail::optional(j, "dimension"))
            amb = Ambient{detail::count(*d, child(ptr, "dimension"), idx), false};
        return detail::wrap(ptr, [&] { return ConvexSet::halfline_coordinate(idx - 1, amb); });
    }
    if (kind == "intersection") {
        const auto& m = require(j, ptr, "members");
        if (!m.is_array() || m.empty()) throw ConfigError(child(ptr, "members"), "expected a nonempty array");
        std::vector<ConvexSet> members;
        for (std::size_t i = 0; i < m.size(); ++i) members.push_back(parse_set(m[i], child(child(ptr, "members"), i)));
        const auto witness = parse_vector(require(j, ptr, "witness"), child(ptr, "witness"));
        return detail::wrap(child(ptr, "witness"), [&] { return ConvexSet::intersection(members, witness); });
    }
    throw ConfigError(child(ptr, "kind"), "unknown set kind '" + kind + "'");
}

inline const std::vector<std::string>& mapping_kinds() {
    static const std::vector<std::string> k{"affine",      "composition",   "piecewise-linear", "projection",
                                            "rotation",    "shift-remark33", "sqrt-section3",    "translation"};
    return k;
}

inline Mapping parse_mapping(const json& j, const std::string& ptr) {
    using detail::child;
    using detail::require;
    const auto kind = detail::string(require(j, ptr, "kind"), child(ptr, "kind"));
    std::optional<ConvexSet> domain;
    if (const auto* d = detail::optional(j, "domain")) domain = parse_set(*d, child(ptr, "domain"));

    if (kind == "rotation") {
        const auto center = parse_vector(require(j, ptr, "center"), child(ptr, "center"));
        if (center.is_sparse()) throw ConfigError(child(ptr, "center"), "rotation center must be dense");
        const double angle = detail::number(require(j, ptr, "angle"), child(ptr, "angle"));
        std::size_t a0 = 0, a1 = 1;
        if (const auto* pl = detail::optional(j, "plane")) {
            const auto pp = child(ptr, "plane");
            if (!pl->is_array() || pl->size() != 2) throw ConfigError(pp, "expected two 1-based axes");
            a0 = detail::count((*pl)[0], child(pp, 0), 1) - 1;
            a1 = detail::count((*pl)[1], child(pp, 1), 1) - 1;
        }
        return detail::wrap(ptr, [&] { return Mapping::rotation(center, angle, domain, a0, a1); });
    }
    if (kind == "translation") {
        const auto v = parse_vector(require(j, ptr, "displacement"), child(ptr, "displacement"));
        return detail::wrap(ptr, [&] { return Mapping::translation(v, domain); });
    }
    if (kind == "affine") {
        const auto& m = require(j, ptr, "matrix");
        const auto mp = child(ptr, "matrix");
        if (!m.is_array()) throw ConfigError(mp, "expected an array of rows");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < m.size(); ++i) rows.push_back(parse_numbers(m[i], child(mp, i)));
        const auto offset = parse_vector(require(j, ptr, "offset"), child(ptr, "offset"));
        return detail::wrap(ptr, [&] { return Mapping::affine(rows, offset, domain); });
    }
    if (kind == "projection") {
        const auto set = parse_set(require(j, ptr, "set"), child(ptr, "set"));
        return detail::wrap(ptr, [&] { return Mapping::projection(set, domain); });
    }
    if (kind == "shift-remark33") return detail::wrap(ptr, [&] { return Mapping::shift(domain); });
    if (kind == "sqrt-section3") {
        if (domain) throw ConfigError(child(ptr, "domain"), "sqrt-section3 has the fixed domain [0, 1]");
        return Mapping::sqrt_section();
    }
    if (kind == "piecewise-linear") {
        const auto& ps = require(j, ptr, "pieces");
        const auto pp = child(ptr, "pieces");
        if (!ps.is_array() || ps.empty()) throw ConfigError(pp, "expected a nonempty array");
        std::vector<maps::PiecewiseLinear::Piece> pieces;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const auto ip = child(pp, i);
            maps::PiecewiseLinear::Piece piece;
            piece.lower = detail::number(require(ps[i], ip, "lower"), child(ip, "lower"));
            piece.upper = detail::number(require(ps[i], ip, "upper"), child(ip, "upper"));
            piece.slope = detail::number(require(ps[i], ip, "slope"), child(ip, "slope"));
            piece.intercept = detail::number(require(ps[i], ip, "intercept"), child(ip, "intercept"));
            pieces.push_back(piece);
        }
        if (domain) throw ConfigError(child(ptr, "domain"), "piecewise-linear maps take the span of their pieces");
        return detail::wrap(ptr, [&] { return Mapping::piecewise_linear(pieces); });
    }
    if (kind == "composition") {
        const auto& ms = require(j, ptr, "maps");
        const auto mp = child(ptr, "maps");
        if (!ms.is_array() || ms.empty()) throw ConfigError(mp, "expected a nonempty array");
        std::vector<Mapping> parts;
        for (std::size_t i = 0; i < ms.size(); ++i) parts.push_back(parse_mapping(ms[i], child(mp, i)));
        return detail::wrap(ptr, [&] { return Mapping::composition(parts, domain); });
    }
    throw ConfigError(child(ptr, "kind"), "unknown mapping kind '" + kind + "'");
}

inline SemigroupAction parse_action(const json& j, const std::string& ptr) {
    using detail::child;
    const auto structure = detail::string(detail::require(j, ptr, "structure"), child(ptr, "structure"));
    const auto& g = detail::require(j, ptr, "generators");
    const auto gp = child(ptr, "generators");
    if (!g.is_array() || g.empty()) throw ConfigError(gp, "expected a nonempty array of mappings");
    std::vector<Mapping> gens;
    for (std::size_t i = 0; i < g.size(); ++i) gens.push_back(parse_mapping(g[i], child(gp, i)));
    if (structure == "commutative") return detail::wrap(gp, [&] { return SemigroupAction::commutative(gens); });
    if (structure == "free-words") return detail::wrap(gp, [&] { return SemigroupAction::free_words(gens); });
    throw ConfigError(child(ptr, "structure"), "expected \"commutative\" or \"free-words\"");
}

inline const std::vector<std::string>& scheme_kinds() {
    static const std::vector<std::string> k{"box", "cesaro", "smooth"};
    return k;
}

inline AveragingScheme parse_scheme(const json& j, const std::string& ptr) {
    const auto kind = detail::string(detail::require(j, ptr, "kind"), detail::child(ptr, "kind"));
    if (kind == "cesaro") return AveragingScheme::cesaro();
    if (kind == "box") return AveragingScheme::box();
    if (kind == "smooth") return AveragingScheme::smooth();
    throw ConfigError(detail::child(ptr, "kind"), "unknown averaging scheme '" + kind + "'");
}

/// Sampled generalized hybrid specimen: a map, its (alpha, beta) and the
/// grid its inequality is checked on.
struct HybridSpec {
    Mapping mapping = Mapping::sqrt_section();
    double alpha = 1.0;
    double beta = 0.0;
    double grid_lower = 0.0;
    double grid_upper = 1.0;
    std::size_t grid_points = 100;
    std::optional<Vector> start;
};

inline HybridSpec parse_hybrid(const json& j, const std::string& ptr) {
    using detail::child;
    HybridSpec h;
    h.mapping = parse_mapping(detail::require(j, ptr, "mapping"), child(ptr, "mapping"));
    h.alpha = detail::number(detail::require(j, ptr, "alpha"), child(ptr, "alpha"));
    h.beta = detail::number(detail::require(j, ptr, "beta"), child(ptr, "beta"));
    const auto& g = detail::require(j, ptr, "grid");
    const auto gp = child(ptr, "grid");
    h.grid_lower = detail::number(detail::require(g, gp, "lower"), child(gp, "lower"));
    h.grid_upper = detail::number(detail::require(g, gp, "upper"), child(gp, "upper"));
    if (!(h.grid_upper > h.grid_lower)) throw ConfigError(child(gp, "upper"), "must exceed lower");
    h.grid_points = detail::count(detail::require(g, gp, "points"), child(gp, "points"), 2);
    if (const auto* s = detail::optional(j, "start")) h.start = parse_vector(*s, child(ptr, "start"));
    return h;
}

inline HybridSpec load_hybrid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open hybrid fixture " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + ": " + e.what());
    }
    return parse_hybrid(j, "");
}

enum class ExperimentKind { ergodic, pipeline, counterexample, hybrid };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::ergodic: return "ergodic";
    case ExperimentKind::pipeline: return "pipeline";
    case ExperimentKind::counterexample: return "counterexample";
    default: return "hybrid";
    }
}

/// Tolerances of an experiment. Unset entries take the defaults scaled by
/// `--tol-scale`.
struct Tolerances {
    double mean = 1e-8;
    double agreement = 1e-5;
    double monotonicity = 1e-9;
    double net_cauchy = 1e-6;
    double dykstra = 1e-10;
    double attractive = 1e-9;
    double fixed = 1e-6;
    double hybrid = 1e-9;

    Tolerances scaled(double s) const {
        return {mean * s, agreement * s, monotonicity * s, net_cauchy * s, dykstra * s, attractive * s, fixed * s,
                hybrid * s};
    }
};

struct ExperimentConfig {
    std::string name;
    ExperimentKind kind = ExperimentKind::ergodic;
    std::uint64_t seed = 1;
    std::optional<SemigroupAction> action;
    std::optional<ConvexSet> set;
    std::vector<Vector> start_points;
    AveragingScheme scheme = AveragingScheme::smooth();
    std::size_t horizon = 1024;
    std::size_t cauchy_window = 20;
    std::size_t battery_points = 200;
    double battery_radius = 10.0;
    std::size_t battery_elements = 1;
    std::size_t max_stage = std::size_t{1} << 22;
    std::size_t mean_window = 3;
    Tolerances tol;
    std::string counterexample;
    std::optional<HybridSpec> hybrid;
    /// The parsed document, kept for hashing.
    json source;
};

/// Parses a whole experiment. Relative fixture paths resolve against
/// `base_dir`.
inline ExperimentConfig parse_experiment(const json& j, double tol_scale = 1.0,
                                         const std::filesystem::path& base_dir = {}) {
    using detail::child;
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    if (!(tol_scale > 0.0) || !std::isfinite(tol_scale)) throw ConfigError("", "tol-scale must be positive");
    static const std::vector<std::string> known{"name",     "experiment",    "seed",         "action",  "set",
                                                "start_points", "scheme",    "budgets",      "tolerances",
                                                "counterexample", "hybrid",  "fixture"};
    for (const auto& [key, val] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(child("", key), "unknown key");

    ExperimentConfig cfg;
    cfg.source = j;
    if (const auto* n = detail::optional(j, "name")) cfg.name = detail::string(*n, "/name");
    const auto kind = detail::string(detail::require(j, "", "experiment"), "/experiment");
    if (kind == "ergodic") cfg.kind = ExperimentKind::ergodic;
    else if (kind == "pipeline") cfg.kind = ExperimentKind::pipeline;
    else if (kind == "counterexample") cfg.kind = ExperimentKind::counterexample;
    else if (kind == "hybrid") cfg.kind = ExperimentKind::hybrid;
    else throw ConfigError("/experiment", "expected ergodic, pipeline, counterexample or hybrid");
    if (const auto* s = detail::optional(j, "seed")) cfg.seed = detail::count(*s, "/seed");

    cfg.tol = Tolerances{}.scaled(tol_scale);
    if (const auto* t = detail::optional(j, "tolerances")) {
        if (!t->is_object()) throw ConfigError("/tolerances", "expected an object");
        for (const auto& [key, val] : t->items()) {
            const auto p = child("/tolerances", key);
            double* slot = key == "mean"           ? &cfg.tol.mean
                           : key == "agreement"    ? &cfg.tol.agreement
                           : key == "monotonicity" ? &cfg.tol.monotonicity
                           : key == "net_cauchy"   ? &cfg.tol.net_cauchy
                           : key == "dykstra"      ? &cfg.tol.dykstra
                           : key == "attractive"   ? &cfg.tol.attractive
                           : key == "fixed"        ? &cfg.tol.fixed
                           : key == "hybrid"       ? &cfg.tol.hybrid
                                                   : nullptr;
            if (!slot) throw ConfigError(p, "unknown tolerance");
            *slot = detail::positive(val, p);
        }
    }
    if (const auto* b = detail::optional(j, "budgets")) {
        if (!b->is_object()) throw ConfigError("/budgets", "expected an object");
        for (const auto& [key, val] : b->items()) {
            const auto p = child("/budgets", key);
            if (key == "horizon") cfg.horizon = detail::count(val, p, 1);
            else if (key == "cauchy_window") cfg.cauchy_window = detail::count(val, p, 2);
            else if (key == "battery_points") cfg.battery_points = detail::count(val, p, 1);
            else if (key == "battery_radius") cfg.battery_radius = detail::positive(val, p);
            else if (key == "battery_elements") cfg.battery_elements = detail::count(val, p, 1);
            else if (key == "max_stage") cfg.max_stage = detail::count(val, p, 2);
            else if (key == "mean_window") cfg.mean_window = detail::count(val, p, 1);
            else throw ConfigError(p, "unknown budget");
        }
    }

    if (cfg.kind == ExperimentKind::counterexample) {
        cfg.counterexample = detail::string(detail::require(j, "", "counterexample"), "/counterexample");
        const auto& names = counterexample_names();
        if (std::find(names.begin(), names.end(), cfg.counterexample) == names.end())
            throw ConfigError("/counterexample", "unknown counterexample '" + cfg.counterexample + "'");
        return cfg;
    }

    if (cfg.kind == ExperimentKind::hybrid) {
        if (const auto* h = detail::optional(j, "hybrid")) {
            cfg.hybrid = parse_hybrid(*h, "/hybrid");
        } else {
            const auto path = std::filesystem::path(detail::string(detail::require(j, "", "fixture"), "/fixture"));
            try {
                cfg.hybrid = load_hybrid(path.is_absolute() ? path : base_dir / path);
            } catch (const ConfigError& e) {
                throw ConfigError("/fixture", e.what());
            }
        }
        if (const auto* s = detail::optional(j, "scheme")) cfg.scheme = parse_scheme(*s, "/scheme");
        cfg.action = SemigroupAction::cyclic(cfg.hybrid->mapping);
        if (cfg.hybrid->start) cfg.start_points.push_back(*cfg.hybrid->start);
        if (const auto* sp = detail::optional(j, "start_points")) {
            cfg.start_points.clear();
            if (!sp->is_array()) throw ConfigError("/start_points", "expected an array of vectors");
            for (std::size_t i = 0; i < sp->size(); ++i)
                cfg.start_points.push_back(parse_vector((*sp)[i], child("/start_points", i)));
        }
        if (cfg.start_points.empty()) throw ConfigError("/start_points", "at least one start point is required");
    } else {
        cfg.action = parse_action(detail::require(j, "", "action"), "/action");
        if (const auto* s = detail::optional(j, "scheme")) cfg.scheme = parse_scheme(*s, "/scheme");
        detail::wrap("/scheme", [&] {
            cfg.scheme.require_supported(*cfg.action);
            return 0;
        });
        const auto& sp = detail::require(j, "", "start_points");
        if (!sp.is_array() || sp.empty()) throw ConfigError("/start_points", "expected a nonempty array of vectors");
        for (std::size_t i = 0; i < sp.size(); ++i)
            cfg.start_points.push_back(parse_vector(sp[i], child("/start_points", i)));
    }
    if (const auto* s = detail::optional(j, "set")) cfg.set = parse_set(*s, "/set");
    if (cfg.kind == ExperimentKind::pipeline && !cfg.set) throw ConfigError("/set", "missing required key");

    const auto& dom = cfg.action->domain();
    for (std::size_t i = 0; i < cfg.start_points.size(); ++i) {
        const auto p = child("/start_points", i);
        const auto amb = dom.ambient();
        const auto& x = cfg.start_points[i];
        if (x.is_sparse() != amb.sparse || (!amb.sparse && x.dimension() != amb.dimension))
            throw ConfigError(p, amb.sparse ? "expected a sparse vector"
                                            : "expected a dense vector of dimension " + std::to_string(amb.dimension));
        try {
            if (!dom.contains(cfg.start_points[i], Mapping::kDomainTol))
                throw ConfigError(p, "start point lies outside the action's domain");
        } catch (const IncompatibleSpace& e) {
            throw ConfigError(p, e.what());
        }
    }
    return cfg;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path, double tol_scale = 1.0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + ": " + e.what());
    }
    return parse_experiment(j, tol_scale, path.parent_path());
}

} // namespace nonexp::config
