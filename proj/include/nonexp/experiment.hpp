#pragma once

// Runs a parsed experiment config and renders its trace and summary. Nothing
// here touches the filesystem except write_outputs().

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nonexp/attractive.hpp"
#include "nonexp/config.hpp"
#include "nonexp/ergodic.hpp"
#include "nonexp/io.hpp"
#include "nonexp/means.hpp"

#ifndef NONEXP_VERSION
#define NONEXP_VERSION "0.0.0"
#endif

namespace nonexp {

using json = nlohmann::json;

/// Calls f(0) ... f(n-1) on up to `jobs` threads. The first exception (by
/// index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& f) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    std::vector<std::exception_ptr> errors(n);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        f(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct ExperimentResult {
    bool passed = false;
    json summary;
    std::string trace_csv;
};

namespace detail {

inline std::vector<std::string> vector_columns(const std::string& prefix, const Vector& sample) {
    if (sample.is_sparse()) return {prefix};
    std::vector<std::string> cols;
    for (std::size_t i = 0; i < sample.dimension(); ++i) cols.push_back(prefix + "_" + std::to_string(i + 1));
    return cols;
}

inline void append_vector(std::vector<std::string>& row, const Vector& v, const Vector& sample) {
    if (sample.is_sparse()) {
        row.push_back(v.to_string());
        return;
    }
    for (std::size_t i = 0; i < sample.dimension(); ++i) row.push_back(io::format_double(v[i]));
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline MeanOptions mean_options(const config::ExperimentConfig& cfg) {
    MeanOptions m;
    m.tol = cfg.tol.mean;
    m.max_stage = cfg.max_stage;
    m.window = cfg.mean_window;
    return m;
}

inline json property_json(const PropertyReport& r) {
    json j{{"holds", r.holds}, {"samples", r.samples_used}};
    if (r.witness) {
        j["witness"] = {{"x", io::vector_json(r.witness->x)},
                        {"y", io::vector_json(r.witness->y)},
                        {"violation", io::number_or_null(r.witness->violation)}};
    }
    return j;
}

/// Trace rows of a mean-vector computation, one per doubling stage.
inline void mean_rows(io::CsvWriter& csv, std::size_t start, const MeanVectorReport& rep, const Vector& sample) {
    for (const auto& h : rep.history) {
        std::vector<std::string> row{std::to_string(start), std::to_string(h.stage), io::format_double(h.residual)};
        append_vector(row, h.value, sample);
        csv.row(row);
    }
}

inline ExperimentResult run_ergodic(const config::ExperimentConfig& cfg, std::size_t jobs) {
    ErgodicCheckConfig ec;
    ec.scheme = cfg.scheme;
    ec.mean = mean_options(cfg);
    ec.tol.mean = cfg.tol.mean;
    ec.tol.agreement = cfg.tol.agreement;
    ec.tol.monotonicity = cfg.tol.monotonicity;
    ec.tol.net_cauchy = cfg.tol.net_cauchy;
    ec.tol.dykstra = cfg.tol.dykstra;
    ec.horizon = cfg.horizon;
    ec.cauchy_window = cfg.cauchy_window;
    ec.battery_points = cfg.battery_points;
    ec.battery_radius = cfg.battery_radius;
    ec.battery_elements = cfg.battery_elements;
    ec.seed = cfg.seed;

    std::vector<ErgodicTrace> traces(cfg.start_points.size());
    parallel_for(traces.size(), jobs,
                 [&](std::size_t i) { traces[i] = run_ergodic_check(*cfg.action, cfg.start_points[i], ec); });

    const Vector& sample = cfg.start_points.front();
    io::CsvWriter csv(concat(concat({"start", "row", "element", "distance_to_model", "distance_to_mean",
                                     "dykstra_residual", "flagged"},
                                    vector_columns("point", sample)),
                             vector_columns("projected", sample)));
    ExperimentResult res;
    res.passed = true;
    json results = json::array();
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            std::vector<std::string> f{std::to_string(i),
                                       std::to_string(r + 1),
                                       to_string(row.element),
                                       io::format_double(row.distance_to_model),
                                       io::format_double(row.distance_to_mean),
                                       io::format_double(row.dykstra_residual),
                                       row.flagged ? "1" : "0"};
            append_vector(f, row.point, sample);
            append_vector(f, row.projected, sample);
            csv.row(f);
        }
        const bool ok = t.verdict == Verdict::agree && t.flagged_rows == 0;
        res.passed = res.passed && ok;
        json r{{"start", io::vector_json(cfg.start_points[i])},
               {"passed", ok},
               {"verdict", to_string(t.verdict)},
               {"final_distance", io::number_or_null(t.final_distance)},
               {"net_cauchy_residual", io::number_or_null(t.net_cauchy_residual)},
               {"flagged_rows", t.flagged_rows},
               {"rows", t.rows.size()},
               {"note", t.note}};
        if (t.mean) {
            r["mean"] = io::vector_json(t.mean->value);
            r["mean_stage"] = t.mean->stage;
            r["mean_residual"] = io::number_or_null(t.mean->cauchy_residual);
            r["mean_converged"] = t.mean->converged;
        }
        results.push_back(std::move(r));
    }
    res.summary["results"] = std::move(results);
    res.trace_csv = csv.str();
    return res;
}

inline ExperimentResult run_pipeline(const config::ExperimentConfig& cfg, std::size_t jobs) {
    struct Item {
        MeanVectorReport mean;
        PropertyReport attractive;
        std::optional<PipelineReport> pipeline;
    };
    std::vector<Item> items(cfg.start_points.size());
    const auto battery = make_battery(*cfg.action, cfg.battery_points, cfg.battery_radius, cfg.seed,
                                      cfg.battery_elements, cfg.tol.attractive);
    parallel_for(items.size(), jobs, [&](std::size_t i) {
        auto& it = items[i];
        it.mean = mean_vector(cfg.scheme, *cfg.action, cfg.start_points[i], mean_options(cfg));
        it.attractive = is_attractive(it.mean.value, *cfg.action, battery);
        if (it.attractive.holds)
            it.pipeline = attractive_to_fixed(it.mean.value, *cfg.set, *cfg.action, battery, cfg.tol.fixed);
    });

    const Vector& sample = cfg.start_points.front();
    io::CsvWriter csv(concat({"start", "stage", "residual"}, vector_columns("mean", sample)));
    ExperimentResult res;
    res.passed = true;
    json results = json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        mean_rows(csv, i, it.mean, sample);
        const bool ok = it.mean.converged && it.attractive.holds && it.pipeline && it.pipeline->fixed;
        res.passed = res.passed && ok;
        json r{{"start", io::vector_json(cfg.start_points[i])},
               {"passed", ok},
               {"mean", io::vector_json(it.mean.value)},
               {"mean_stage", it.mean.stage},
               {"mean_residual", io::number_or_null(it.mean.cauchy_residual)},
               {"mean_converged", it.mean.converged},
               {"attractive", property_json(it.attractive)}};
        if (it.pipeline) {
            r["fixed_candidate"] = io::vector_json(it.pipeline->projected_fixed_candidate);
            r["max_fixed_residual"] = io::number_or_null(it.pipeline->max_fixed_residual);
        }
        results.push_back(std::move(r));
    }
    res.summary["results"] = std::move(results);
    res.trace_csv = csv.str();
    return res;
}

inline ExperimentResult run_counterexample_experiment(const config::ExperimentConfig& cfg) {
    const auto rep = run_counterexample(cfg.counterexample, cfg.seed);
    io::CsvWriter csv({"check", "required", "passed", "value", "detail"});
    json checks = json::array();
    for (const auto& c : rep.checks) {
        csv.row({c.name, c.required ? "1" : "0", c.passed ? "1" : "0", io::format_double(c.value), c.detail});
        checks.push_back({{"name", c.name},
                          {"required", c.required},
                          {"passed", c.passed},
                          {"value", io::number_or_null(c.value)},
                          {"detail", c.detail}});
    }
    ExperimentResult res;
    res.passed = rep.passed;
    res.summary["results"] = json::array({{{"counterexample", rep.name},
                                           {"passed", rep.passed},
                                           {"candidates", rep.candidates},
                                           {"refuted", rep.refuted},
                                           {"checks", std::move(checks)}}});
    res.trace_csv = csv.str();
    return res;
}

inline std::vector<Vector> hybrid_grid(const config::HybridSpec& h) {
    std::vector<Vector> g;
    for (std::size_t i = 0; i < h.grid_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(h.grid_points - 1);
        g.push_back(Vector::dense({h.grid_lower + t * (h.grid_upper - h.grid_lower)}));
    }
    return g;
}

inline ExperimentResult run_hybrid(const config::ExperimentConfig& cfg, std::size_t jobs) {
    const auto& h = *cfg.hybrid;
    const auto grid = hybrid_grid(h);
    const auto gh = check_generalized_hybrid(h.mapping, h.alpha, h.beta, grid, cfg.tol.hybrid);
    const auto ne = check_nonexpansive(h.mapping, grid, cfg.tol.hybrid);
    const auto elements = cfg.action->enumerate(cfg.battery_elements);

    std::vector<MeanVectorReport> means(cfg.start_points.size());
    std::vector<PropertyReport> attr(means.size());
    parallel_for(means.size(), jobs, [&](std::size_t i) {
        means[i] = mean_vector(cfg.scheme, *cfg.action, cfg.start_points[i], mean_options(cfg));
        attr[i] = is_attractive(means[i].value, *cfg.action, grid, elements, cfg.tol.attractive);
    });

    const Vector& sample = cfg.start_points.front();
    io::CsvWriter csv(concat({"start", "stage", "residual"}, vector_columns("mean", sample)));
    ExperimentResult res;
    res.passed = gh.holds && !ne.holds;
    json results = json::array();
    for (std::size_t i = 0; i < means.size(); ++i) {
        mean_rows(csv, i, means[i], sample);
        const bool ok = means[i].converged && attr[i].holds;
        res.passed = res.passed && ok;
        results.push_back({{"start", io::vector_json(cfg.start_points[i])},
                           {"passed", ok},
                           {"mean", io::vector_json(means[i].value)},
                           {"mean_stage", means[i].stage},
                           {"mean_residual", io::number_or_null(means[i].cauchy_residual)},
                           {"mean_converged", means[i].converged},
                           {"attractive", property_json(attr[i])}});
    }
    res.summary["hybrid"] = {{"alpha", h.alpha},
                             {"beta", h.beta},
                             {"pairs", grid.size() * grid.size()},
                             {"generalized_hybrid", property_json(gh)},
                             {"nonexpansive", property_json(ne)}};
    res.summary["results"] = std::move(results);
    res.trace_csv = csv.str();
    return res;
}

} // namespace detail

/// Runs `cfg`; independent start points are spread over `jobs` threads and
/// collected in input order, so the output does not depend on `jobs`.
inline ExperimentResult run_experiment(const config::ExperimentConfig& cfg, std::size_t jobs = 1) {
    ExperimentResult res;
    switch (cfg.kind) {
    case config::ExperimentKind::ergodic: res = detail::run_ergodic(cfg, jobs); break;
    case config::ExperimentKind::pipeline: res = detail::run_pipeline(cfg, jobs); break;
    case config::ExperimentKind::counterexample: res = detail::run_counterexample_experiment(cfg); break;
    case config::ExperimentKind::hybrid: res = detail::run_hybrid(cfg, jobs); break;
    }
    res.summary["name"] = cfg.name;
    res.summary["experiment"] = config::to_string(cfg.kind);
    res.summary["seed"] = cfg.seed;
    res.summary["passed"] = res.passed;
    if (cfg.kind != config::ExperimentKind::counterexample) res.summary["scheme"] = cfg.scheme.name();
    res.summary["tolerances"] = {{"mean", cfg.tol.mean},
                                 {"agreement", cfg.tol.agreement},
                                 {"monotonicity", cfg.tol.monotonicity},
                                 {"net_cauchy", cfg.tol.net_cauchy},
                                 {"dykstra", cfg.tol.dykstra},
                                 {"attractive", cfg.tol.attractive},
                                 {"fixed", cfg.tol.fixed},
                                 {"hybrid", cfg.tol.hybrid}};
    return res;
}

/// Checks a summary document against its schema; returns the problems found
/// as "pointer: message" strings (empty when valid).
inline std::vector<std::string> validate_summary(const json& s) {
    std::vector<std::string> err;
    const auto need = [&](const json& obj, const std::string& ptr, const std::string& key,
                          bool (json::*is)() const noexcept, const char* type) -> const json* {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            err.push_back(ptr + "/" + key + ": missing");
            return nullptr;
        }
        if (!((*it).*is)()) {
            err.push_back(ptr + "/" + key + ": expected " + type);
            return nullptr;
        }
        return &*it;
    };
    if (!s.is_object()) return {": expected an object"};
    need(s, "", "name", &json::is_string, "string");
    need(s, "", "seed", &json::is_number_unsigned, "unsigned integer");
    need(s, "", "passed", &json::is_boolean, "boolean");
    need(s, "", "tolerances", &json::is_object, "object");
    std::string kind;
    if (const auto* e = need(s, "", "experiment", &json::is_string, "string")) {
        kind = e->get<std::string>();
        if (kind != "ergodic" && kind != "pipeline" && kind != "counterexample" && kind != "hybrid")
            err.push_back("/experiment: unknown experiment kind");
    }
    if (kind == "hybrid") need(s, "", "hybrid", &json::is_object, "object");
    const auto* results = need(s, "", "results", &json::is_array, "array");
    if (!results) return err;
    bool all = true;
    for (std::size_t i = 0; i < results->size(); ++i) {
        const auto& r = (*results)[i];
        const auto p = "/results/" + std::to_string(i);
        if (!r.is_object()) {
            err.push_back(p + ": expected an object");
            continue;
        }
        if (const auto* ok = need(r, p, "passed", &json::is_boolean, "boolean")) all = all && ok->get<bool>();
        if (kind == "ergodic") {
            need(r, p, "verdict", &json::is_string, "string");
            need(r, p, "flagged_rows", &json::is_number_unsigned, "unsigned integer");
        } else if (kind == "pipeline" || kind == "hybrid") {
            need(r, p, "mean_converged", &json::is_boolean, "boolean");
            need(r, p, "attractive", &json::is_object, "object");
        } else if (kind == "counterexample") {
            need(r, p, "checks", &json::is_array, "array");
        }
    }
    if (kind != "hybrid" && s.contains("passed") && s["passed"].is_boolean() && s["passed"].get<bool>() != all)
        err.push_back("/passed: disagrees with the per-result verdicts");
    return err;
}

struct RunOutputs {
    io::RunManifest manifest;
    std::vector<std::filesystem::path> paths;
};

/// Writes trace.csv, summary.json and manifest.json into `dir`.
inline RunOutputs write_outputs(const std::filesystem::path& dir, const config::ExperimentConfig& cfg,
                                const ExperimentResult& res, double wall_time_seconds) {
    std::filesystem::create_directories(dir);
    RunOutputs out;
    io::write_atomic(dir / "trace.csv", res.trace_csv);
    io::write_atomic(dir / "summary.json", res.summary.dump(2) + "\n");
    out.manifest.config_hash = io::config_hash(cfg.source);
    out.manifest.version = NONEXP_VERSION;
    out.manifest.seed = cfg.seed;
    out.manifest.wall_time_seconds = wall_time_seconds;
    out.manifest.files = {"trace.csv", "summary.json", "manifest.json"};
    io::write_atomic(dir / "manifest.json", out.manifest.to_json().dump(2) + "\n");
    for (const auto& f : out.manifest.files) out.paths.push_back(dir / f);
    return out;
}

} // namespace nonexp
