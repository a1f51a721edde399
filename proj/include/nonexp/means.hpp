#pragma once

// Asymptotically invariant averaging schemes on N^k and the mean vector
// T_mu x obtained as the limit of their stage averages.
//
// A scheme assigns, at stage n, nonnegative weights summing to one to the
// orbit points T_{(i_1..i_k)} x with 1 <= i_j <= n. For k > 1 the weights are
// products of one-dimensional stage weights.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/semigroup.hpp"

namespace nonexp {

class AveragingScheme {
public:
    enum class Kind {
        cesaro,   ///< uniform weights on T^1 x ... T^n x; N only
        box,      ///< uniform weights on the box [1, n]^k
        smooth,   ///< bump-weighted box, w(t) ~ exp(-1/(t(1-t))), t = i/(n+1)
        weighted  ///< caller-supplied weights on N
    };

    using WeightFn = std::function<std::vector<double>(std::size_t)>;

    static AveragingScheme cesaro() { return AveragingScheme(Kind::cesaro); }
    static AveragingScheme box() { return AveragingScheme(Kind::box); }
    static AveragingScheme smooth() { return AveragingScheme(Kind::smooth); }

    /// `fn(n)` must return n nonnegative weights (for T^1 x ... T^n x) summing to 1.
    static AveragingScheme weighted(WeightFn fn) {
        AveragingScheme s(Kind::weighted);
        s.weights_ = std::move(fn);
        return s;
    }

    Kind kind() const noexcept { return kind_; }

    std::string name() const {
        switch (kind_) {
        case Kind::cesaro: return "cesaro";
        case Kind::box: return "box";
        case Kind::smooth: return "smooth";
        default: return "weighted";
        }
    }

    /// Throws when the scheme cannot average over `action`.
    void require_supported(const SemigroupAction& action) const {
        if (action.structure() != Structure::commutative)
            throw InvalidArgument(name() + " averaging needs a commutative (N^k) action");
        if ((kind_ == Kind::cesaro || kind_ == Kind::weighted) && action.rank() != 1)
            throw InvalidArgument(name() + " averaging is defined on N only; use box or smooth on N^k");
    }

    /// One-dimensional weights for stage n.
    std::vector<double> stage_weights(std::size_t n) const {
        if (n < 1) throw InvalidArgument("stage must be >= 1");
        std::vector<double> w;
        switch (kind_) {
        case Kind::cesaro:
        case Kind::box: w.assign(n, 1.0 / static_cast<double>(n)); return w;
        case Kind::smooth: {
            w.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i + 1) / static_cast<double>(n + 1);
                w[i] = std::exp(-1.0 / (t * (1.0 - t)));
            }
            const double total = std::accumulate(w.begin(), w.end(), 0.0);
            for (double& v : w) v /= total;
            return w;
        }
        case Kind::weighted: {
            w = weights_(n);
            if (w.size() != n) throw InvalidArgument("weighted scheme returned the wrong number of weights");
            double total = 0.0;
            for (double v : w) {
                if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("weighted scheme: negative weight");
                total += v;
            }
            if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("weighted scheme: weights do not sum to 1");
            return w;
        }
        }
        return w;
    }

private:
    explicit AveragingScheme(Kind k) : kind_(k) {}

    Kind kind_;
    WeightFn weights_;
};

struct StageAverage {
    Vector value;
    /// Largest norm among the averaged orbit points.
    double orbit_sup = 0.0;
};

namespace detail {

struct GridWalker {
    const SemigroupAction& action;
    const std::vector<double>& w;
    double blowup;
    Vector sum;
    double sup = 0.0;

    void walk(std::size_t level, const Vector& start, double weight) {
        const auto& g = action.generators()[level];
        Vector cur = start;
        for (std::size_t i = 0; i < w.size(); ++i) {
            cur = g(cur);
            const double wi = weight * w[i];
            if (level + 1 == action.rank()) {
                const double nc = norm(cur);
                if (nc > blowup)
                    throw DivergingOrbit("stage average: orbit norm " + std::to_string(nc) +
                                         " exceeds the blow-up threshold");
                sup = std::max(sup, nc);
                sum = sum + wi * cur;
            } else {
                walk(level + 1, cur, wi);
            }
        }
    }
};

} // namespace detail

/// The stage-n average sum_i w_i T_i x over the box [1, n]^k, plus the orbit
/// sup needed for invariance bounds.
inline StageAverage stage_average_with_sup(const AveragingScheme& scheme, const SemigroupAction& action,
                                           const Vector& x, std::size_t n, double blowup = kBlowUpThreshold) {
    scheme.require_supported(action);
    const auto w = scheme.stage_weights(n);
    detail::GridWalker walker{action, w, blowup, zero_like(x)};
    walker.walk(0, x, 1.0);
    return {std::move(walker.sum), walker.sup};
}

inline Vector stage_average(const AveragingScheme& scheme, const SemigroupAction& action, const Vector& x,
                            std::size_t n, double blowup = kBlowUpThreshold) {
    return stage_average_with_sup(scheme, action, x, n, blowup).value;
}

/// ||avg_n(x) - avg_n(T_s x)||: how far the stage-n mean is from being
/// invariant under translation by s. For Cesaro and s = 1 this telescopes to
/// ||T^{n+1} x - T x|| / n.
inline double invariance_defect(const AveragingScheme& scheme, const SemigroupAction& action, const Vector& x,
                                std::size_t n, const Address& s, double blowup = kBlowUpThreshold) {
    const Vector shifted = action.act(s, x);
    return distance(stage_average(scheme, action, x, n, blowup), stage_average(scheme, action, shifted, n, blowup));
}

struct MeanStage {
    std::size_t stage = 0;
    double residual = 0.0;
    Vector value;
};

struct MeanVectorReport {
    Vector value;
    std::size_t stage = 0;
    double cauchy_residual = 0.0;
    bool converged = false;
    /// One row per computed stage; the first row has residual NaN.
    std::vector<MeanStage> history;
};

struct MeanOptions {
    double tol = 1e-8;
    std::size_t max_stage = std::size_t{1} << 22;
    /// Consecutive doublings that must pass the Cauchy test.
    std::size_t window = 3;
    double blowup = kBlowUpThreshold;
};

/// Doubles the stage n = 1, 2, 4, ... until ||avg(2n) - avg(n)|| <= tol on
/// `window` consecutive doublings, or until max_stage is reached
/// (converged = false). Cesaro on N reuses the running sum between stages.
inline MeanVectorReport mean_vector(const AveragingScheme& scheme, const SemigroupAction& action, const Vector& x,
                                    MeanOptions opts = {}) {
    scheme.require_supported(action);
    if (opts.window < 1) throw InvalidArgument("mean_vector: window must be >= 1");
    if (opts.max_stage < 2) throw InvalidArgument("mean_vector: max_stage must be >= 2");
    MeanVectorReport rep;

    const bool running = scheme.kind() == AveragingScheme::Kind::cesaro;
    Vector sum = zero_like(x), cur = x;
    std::size_t done = 0;
    auto average_at = [&](std::size_t n) -> Vector {
        if (!running) return stage_average(scheme, action, x, n, opts.blowup);
        const auto& g = action.generators().front();
        for (; done < n; ++done) {
            cur = g(cur);
            const double nc = norm(cur);
            if (nc > opts.blowup)
                throw DivergingOrbit("mean_vector: orbit norm " + std::to_string(nc) + " exceeds the blow-up threshold");
            sum = sum + cur;
        }
        return (1.0 / static_cast<double>(n)) * sum;
    };

    std::size_t n = 1;
    Vector prev = average_at(n);
    rep.history.push_back({n, std::nan(""), prev});
    std::size_t passes = 0;
    while (2 * n <= opts.max_stage) {
        n *= 2;
        Vector next = average_at(n);
        const double r = distance(next, prev);
        rep.history.push_back({n, r, next});
        rep.cauchy_residual = r;
        passes = r <= opts.tol ? passes + 1 : 0;
        prev = std::move(next);
        if (passes >= opts.window) {
            rep.converged = true;
            break;
        }
    }
    rep.value = prev;
    rep.stage = n;
    return rep;
}

} // namespace nonexp
