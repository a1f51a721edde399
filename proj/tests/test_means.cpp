#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "nonexp/attractive.hpp"
#include "nonexp/means.hpp"
#include "oracles.hpp"

using nonexp::AveragingScheme;
using nonexp::ConvexSet;
using nonexp::Mapping;
using nonexp::MultiIndex;
using nonexp::SemigroupAction;
using nonexp::Vector;

namespace {

constexpr double kPi = std::numbers::pi;

Vector origin2() { return Vector::dense({0, 0}); }

Mapping rotation_matrix_map(double angle, const Vector& offset) {
    const double c = std::cos(angle), s = std::sin(angle);
    return Mapping::affine({{c, -s}, {s, c}}, offset);
}

} // namespace

TEST(Means, StageAverageExamples) {
    const auto quarter = SemigroupAction::cyclic(Mapping::rotation(origin2(), kPi / 2));
    const auto a = nonexp::stage_average(AveragingScheme::cesaro(), quarter, Vector::dense({1, 0}), 4);
    EXPECT_LE(nonexp::norm(a), 1e-15);

    const auto id = SemigroupAction::cyclic(Mapping::affine({{1, 0}, {0, 1}}, origin2()));
    const Vector x = Vector::dense({3, -7});
    for (std::size_t n : {1u, 5u, 64u})
        EXPECT_LE(nonexp::max_abs_diff(nonexp::stage_average(AveragingScheme::cesaro(), id, x, n), x), 1e-14);

    const Vector v = Vector::dense({1, 2});
    const auto tr = SemigroupAction::cyclic(Mapping::translation(v));
    for (std::size_t n : {1u, 10u, 999u}) {
        const auto avg = nonexp::stage_average(AveragingScheme::cesaro(), tr, origin2(), n);
        EXPECT_LE(nonexp::max_abs_diff(avg, (static_cast<double>(n + 1) / 2.0) * v), 1e-12 * n);
    }
}

TEST(Means, WeightsAreMeans) {
    for (const auto& s : {AveragingScheme::cesaro(), AveragingScheme::box(), AveragingScheme::smooth()}) {
        for (std::size_t n : {1u, 2u, 7u, 100u, 4096u}) {
            const auto w = s.stage_weights(n);
            ASSERT_EQ(w.size(), n);
            double total = 0.0;
            for (double v : w) {
                EXPECT_GE(v, 0.0);
                total += v;
            }
            EXPECT_NEAR(total, 1.0, 1e-12) << s.name() << " n=" << n;
        }
    }
    const auto bad = AveragingScheme::weighted([](std::size_t n) { return std::vector<double>(n, 0.5); });
    EXPECT_THROW(bad.stage_weights(3), nonexp::InvalidArgument);
    const auto neg = AveragingScheme::weighted([](std::size_t) { return std::vector<double>{1.5, -0.5}; });
    EXPECT_THROW(neg.stage_weights(2), nonexp::InvalidArgument);
}

TEST(Means, SchemeSupport) {
    const auto two = SemigroupAction::commutative(
        {Mapping::rotation(origin2(), 0.3), Mapping::rotation(origin2(), 0.5)});
    EXPECT_THROW(nonexp::stage_average(AveragingScheme::cesaro(), two, origin2(), 3), nonexp::InvalidArgument);
    EXPECT_NO_THROW(nonexp::stage_average(AveragingScheme::box(), two, origin2(), 3));
    const auto words = SemigroupAction::free_words({Mapping::rotation(origin2(), 0.3)});
    EXPECT_THROW(nonexp::stage_average(AveragingScheme::box(), words, origin2(), 3), nonexp::InvalidArgument);
}

TEST(Means, InvarianceDefectExamples) {
    const auto rot = SemigroupAction::cyclic(Mapping::rotation(origin2(), 1.0));
    const MultiIndex one{{1}};
    const double d = nonexp::invariance_defect(AveragingScheme::cesaro(), rot, Vector::dense({1, 0}), 100, one);
    EXPECT_LE(d, 2.0 / 100 + 1e-15);
    // Telescoped form ||T^{n+1}x - T x|| / n.
    const Vector x = Vector::dense({1, 0});
    EXPECT_NEAR(d, nonexp::distance(rot.act(MultiIndex{{101}}, x), rot.act(one, x)) / 100, 1e-14);

    const auto id = SemigroupAction::cyclic(Mapping::affine({{1, 0}, {0, 1}}, origin2()));
    EXPECT_EQ(nonexp::invariance_defect(AveragingScheme::cesaro(), id, x, 17, MultiIndex{{3}}), 0.0);

    // Translation: the defect is exactly ||v|| at every stage, while the
    // averages themselves run off to infinity.
    const Vector v = Vector::dense({0.6, 0.8});
    const auto tr = SemigroupAction::cyclic(Mapping::translation(v));
    for (std::size_t n : {10u, 100u, 1000u})
        EXPECT_NEAR(nonexp::invariance_defect(AveragingScheme::cesaro(), tr, origin2(), n, one), 1.0, 1e-9);
}

// ||defect|| <= 2 sup_k ||T^k x|| / n, checked with the exact sup over the
// orbit segment used.
TEST(Means, CesaroTelescopingBound) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 3.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int trial = 0; trial < 60; ++trial) {
        const auto act = SemigroupAction::cyclic(
            trial % 2 ? Mapping::rotation(Vector::dense({g(rng), g(rng)}), ang(rng))
                      : Mapping::projection(ConvexSet::ball(Vector::dense({g(rng), g(rng)}), 1.0)));
        const Vector x = Vector::dense({g(rng), g(rng)});
        const std::size_t n = 1 + static_cast<std::size_t>(trial) * 7;
        const auto full = nonexp::stage_average_with_sup(AveragingScheme::cesaro(), act, x, n + 1);
        const double defect = nonexp::invariance_defect(AveragingScheme::cesaro(), act, x, n, MultiIndex{{1}});
        EXPECT_LE(defect, 2.0 * full.orbit_sup / static_cast<double>(n) * (1 + 1e-12));
    }
}

TEST(Means, StageAverageInOrbitHull) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 3.0);
    const auto act = SemigroupAction::commutative(
        {Mapping::rotation(Vector::dense({1, 1}), 0.5), Mapping::rotation(Vector::dense({1, 1}), -2.0)});
    for (const auto& s : {AveragingScheme::box(), AveragingScheme::smooth()}) {
        for (std::size_t n : {1u, 3u, 20u}) {
            const Vector x = Vector::dense({g(rng), g(rng)});
            const auto avg = nonexp::stage_average_with_sup(s, act, x, n);
            EXPECT_LE(nonexp::norm(avg.value), avg.orbit_sup + 1e-12);
            EXPECT_LE(avg.orbit_sup, nonexp::orbit(act, x, (n + 1) * (n + 1) * 4).max_norm + 1e-12);
        }
    }
}

TEST(Means, BlowUpIsReported) {
    const auto tr = SemigroupAction::cyclic(Mapping::translation(Vector::dense({1, 0})));
    EXPECT_THROW(nonexp::stage_average(AveragingScheme::cesaro(), tr, origin2(), 200, 50.0), nonexp::DivergingOrbit);
    nonexp::MeanOptions opts;
    opts.blowup = 1e3;
    EXPECT_THROW(nonexp::mean_vector(AveragingScheme::cesaro(), tr, origin2(), opts), nonexp::DivergingOrbit);
}

TEST(Means, MeanVectorRotationCenter) {
    const Vector p = Vector::dense({2, -1});
    const auto act = SemigroupAction::cyclic(Mapping::rotation(p, kPi / 2));
    for (const auto& x : {Vector::dense({5, 5}), Vector::dense({-1, 0.25})}) {
        const auto rep = nonexp::mean_vector(AveragingScheme::cesaro(), act, x);
        ASSERT_TRUE(rep.converged);
        EXPECT_LE(nonexp::max_abs_diff(rep.value, p), 1e-12);
        EXPECT_LE(rep.cauchy_residual, 1e-8);
    }
    // A generic angle converges only at rate 1/n under Cesaro; the smooth
    // scheme reaches the tolerance.
    const auto generic = SemigroupAction::cyclic(Mapping::rotation(p, 1.0));
    const auto slow = nonexp::mean_vector(AveragingScheme::cesaro(), generic, Vector::dense({3, 3}),
                                          {1e-8, 1u << 12, 3});
    EXPECT_FALSE(slow.converged);
    EXPECT_GT(slow.cauchy_residual, 1e-8);
    const auto fast = nonexp::mean_vector(AveragingScheme::smooth(), generic, Vector::dense({3, 3}));
    ASSERT_TRUE(fast.converged);
    EXPECT_LE(nonexp::max_abs_diff(fast.value, p), 1e-8);
}

TEST(Means, MeanVectorAffineFixedPoint) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::Matrix3d a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = g(rng);
        a *= 0.8 / Eigen::JacobiSVD<Eigen::Matrix3d>(a).singularValues()(0);
        const Eigen::Vector3d b(g(rng), g(rng), g(rng));
        const Eigen::VectorXd fixed = oracle::affine_fixed_point(a, b);

        std::vector<std::vector<double>> rows(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) rows[i][j] = a(i, j);
        const auto map = Mapping::affine(rows, Vector::dense({b[0], b[1], b[2]}));
        const auto act = SemigroupAction::cyclic(map);
        const Vector x = Vector::dense({5 * g(rng), 5 * g(rng), 5 * g(rng)});
        const auto rep = nonexp::mean_vector(AveragingScheme::smooth(), act, x);
        ASSERT_TRUE(rep.converged);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(rep.value[i], fixed[i], 1e-7);
        EXPECT_LE(nonexp::distance(map(rep.value), rep.value), 10 * 1e-8);

        // Cesaro gets there too, just to a looser tolerance.
        if (trial % 3 == 0) {
            const auto ces = nonexp::mean_vector(AveragingScheme::cesaro(), act, x, {1e-4, 1u << 22, 3});
            ASSERT_TRUE(ces.converged);
            for (int i = 0; i < 3; ++i) EXPECT_NEAR(ces.value[i], fixed[i], 1e-3);
        }
    }
}

TEST(Means, MeanVectorShiftAtZero) {
    const auto act = SemigroupAction::cyclic(Mapping::shift());
    const auto rep = nonexp::mean_vector(AveragingScheme::cesaro(), act, Vector{});
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.value, Vector{});
    EXPECT_EQ(rep.cauchy_residual, 0.0);
}

TEST(Means, MeanVectorOnNk) {
    const Vector p = Vector::dense({0.5, 0.5});
    const auto act = SemigroupAction::commutative(
        {Mapping::rotation(p, 1.0), rotation_matrix_map(2.0, Vector::dense({0.5 - (std::cos(2.0) * 0.5 - std::sin(2.0) * 0.5),
                                                                             0.5 - (std::sin(2.0) * 0.5 + std::cos(2.0) * 0.5)}))});
    const auto rep = nonexp::mean_vector(AveragingScheme::smooth(), act, Vector::dense({2, 0}));
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(nonexp::max_abs_diff(rep.value, p), 1e-8);
    for (const auto& g : act.generators()) EXPECT_LE(nonexp::distance(g(rep.value), rep.value), 1e-7);
}

TEST(Means, ConvergedMeanIsAttractive) {
    const auto act = SemigroupAction::commutative(
        {Mapping::rotation(Vector::dense({1, 2}), 0.7), Mapping::rotation(Vector::dense({1, 2}), 2.9)});
    const auto rep = nonexp::mean_vector(AveragingScheme::smooth(), act, Vector::dense({4, -3}));
    ASSERT_TRUE(rep.converged);
    const auto battery = nonexp::make_battery(act, 100, 10.0, 77, 5, 1e-7);
    EXPECT_TRUE(nonexp::is_attractive(rep.value, act, battery).holds);
}

TEST(Means, HistoryIsRecorded) {
    const auto act = SemigroupAction::cyclic(Mapping::rotation(origin2(), kPi / 2));
    const auto rep = nonexp::mean_vector(AveragingScheme::cesaro(), act, Vector::dense({1, 0}));
    ASSERT_GE(rep.history.size(), 2u);
    EXPECT_TRUE(std::isnan(rep.history.front().residual));
    EXPECT_EQ(rep.history.back().stage, rep.stage);
    for (std::size_t i = 1; i < rep.history.size(); ++i)
        EXPECT_EQ(rep.history[i].stage, 2 * rep.history[i - 1].stage);
    EXPECT_THROW(nonexp::mean_vector(AveragingScheme::cesaro(), act, Vector::dense({1, 0}), {1e-8, 1, 3}),
                 nonexp::InvalidArgument);
}
