#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nonexp/hilbert.hpp"

namespace nonexp {

using Rng = std::mt19937_64;

/// Shape of the space a set lives in, used when drawing random points.
struct Ambient {
    std::size_t dimension = 0;
    bool sparse = false;

    Vector zero() const { return sparse ? Vector{} : Vector::zeros(dimension); }
};

/// Uniform point in the closed ball of radius `radius` about `center`,
/// restricted to the first `ambient.dimension` coordinates.
inline Vector uniform_in_ball(Rng& rng, const Ambient& ambient, const Vector& center, double radius) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t d = ambient.dimension;
    std::vector<double> g(d);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (double& v : g) {
            v = gauss(rng);
            n2 += v * v;
        }
    } while (d > 0 && n2 == 0.0);
    if (d == 0) return center;
    const double scale = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d)) / std::sqrt(n2);
    for (double& v : g) v *= scale;
    if (ambient.sparse) {
        std::vector<Vector::Entry> e;
        e.reserve(d);
        for (std::size_t i = 0; i < d; ++i) e.emplace_back(i, g[i]);
        return center + Vector::sparse(std::move(e));
    }
    return center + Vector::dense(std::move(g));
}

} // namespace nonexp
