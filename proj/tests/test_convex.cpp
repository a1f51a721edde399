#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nonexp/convex.hpp"
#include "oracles.hpp"

using nonexp::ConvexSet;
using nonexp::Vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector random_point(std::mt19937_64& rng, std::size_t d, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(d);
    for (auto& x : v) x = g(rng);
    return Vector::dense(std::move(v));
}

/// One random set of every primitive kind in dimension d.
std::vector<ConvexSet> primitive_zoo(std::mt19937_64& rng, std::size_t d) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = u(rng);
        hi[i] = lo[i] + std::abs(u(rng));
    }
    lo[0] = -kInf;
    std::vector<ConvexSet> out;
    out.push_back(ConvexSet::whole_space(d));
    out.push_back(ConvexSet::box(lo, hi));
    out.push_back(ConvexSet::ball(random_point(rng, d, 1.0), std::abs(u(rng)) + 0.1));
    out.push_back(ConvexSet::halfspace(random_point(rng, d, 1.0), u(rng)));
    // Random orthonormal pair (or single direction in 1-D) by Gram-Schmidt.
    std::vector<Vector> basis;
    for (std::size_t k = 0; k < std::min<std::size_t>(2, d - (d > 1 ? 1 : 0)); ++k) {
        Vector v = random_point(rng, d, 1.0);
        for (const auto& b : basis) v = v - nonexp::inner(v, b) * b;
        basis.push_back((1.0 / nonexp::norm(v)) * v);
    }
    out.push_back(ConvexSet::affine(random_point(rng, d, 1.0), basis));
    out.push_back(ConvexSet::halfline_coordinate(d - 1, nonexp::Ambient{d, false}));
    return out;
}

std::vector<oracle::Inequality> to_inequalities(const ConvexSet& s, std::size_t d) {
    if (const auto* h = std::get_if<nonexp::sets::HalfSpace>(&s.kind())) {
        Eigen::VectorXd a(d);
        for (std::size_t i = 0; i < d; ++i) a[i] = h->normal[i];
        return {{a, h->offset}};
    }
    const auto& b = std::get<nonexp::sets::Box>(s.kind());
    Eigen::VectorXd lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = b.lower[i];
        hi[i] = b.upper[i];
    }
    return oracle::box_inequalities(lo, hi);
}

} // namespace

TEST(Convex, ContainsExamples) {
    EXPECT_TRUE(nonexp::contains(ConvexSet::ball(Vector::zeros(2), 1.0), Vector::dense({0.5, 0}), 0.0));
    EXPECT_FALSE(nonexp::contains(ConvexSet::halfline_coordinate(0), Vector::sparse({{0, -0.1}}), 0.0));
    EXPECT_TRUE(nonexp::contains(ConvexSet::box({0, 0}, {1, 1}), Vector::dense({1 + 1e-12, 0}), 1e-9));
    EXPECT_FALSE(nonexp::contains(ConvexSet::box({0, 0}, {1, 1}), Vector::dense({1 + 1e-6, 0}), 1e-9));
    EXPECT_THROW(nonexp::contains(ConvexSet::whole_space(2), Vector::zeros(2), -1.0), nonexp::InvalidArgument);
}

TEST(Convex, ProjectExamples) {
    EXPECT_EQ(nonexp::project(ConvexSet::ball(Vector::zeros(2), 1.0), Vector::dense({2, 0})), Vector::dense({1, 0}));
    const auto h = ConvexSet::halfspace(Vector::dense({1, 0}), 0.0);
    EXPECT_EQ(nonexp::project(h, Vector::dense({-1, 2})), Vector::dense({-1, 2}));
    EXPECT_EQ(nonexp::project(h, Vector::dense({1, 2})), Vector::dense({0, 2}));
    EXPECT_EQ(nonexp::project(ConvexSet::box({0, 0}, {1, 1}), Vector::dense({2, -1})), Vector::dense({1, 0}));
    const auto hl = ConvexSet::halfline_coordinate(0);
    EXPECT_EQ(nonexp::project(hl, Vector::sparse({{0, -3.0}, {4, 1.0}})), Vector::sparse({{4, 1.0}}));
    const auto line = ConvexSet::affine(Vector::dense({0, 1}), {Vector::dense({1, 0})});
    EXPECT_EQ(nonexp::project(line, Vector::dense({5, -2})), Vector::dense({5, 1}));
}

TEST(Convex, ConstructionValidates) {
    EXPECT_THROW(ConvexSet::box({1, 0}, {0, 1}), nonexp::InvalidArgument);
    EXPECT_THROW(ConvexSet::ball(Vector::zeros(2), -1.0), nonexp::InvalidArgument);
    EXPECT_THROW(ConvexSet::halfspace(Vector::zeros(2), 1.0), nonexp::InvalidArgument);
    EXPECT_THROW(ConvexSet::affine(Vector::zeros(2), {Vector::dense({1, 1})}), nonexp::InvalidArgument);
    const auto a = ConvexSet::halfspace(Vector::dense({1, 0}), 0.0);
    const auto b = ConvexSet::halfspace(Vector::dense({-1, 0}), -1.0);  // x1 >= 1
    EXPECT_THROW(ConvexSet::intersection({a, b}, Vector::zeros(2)), nonexp::InvalidArgument);
    EXPECT_NO_THROW(ConvexSet::intersection({a, a}, Vector::dense({-1, 0})));
}

TEST(Convex, ProjectOnIntersectionNeedsDykstra) {
    const auto a = ConvexSet::halfspace(Vector::dense({1, 0}), 0.0);
    const auto both = ConvexSet::intersection({a, ConvexSet::ball(Vector::zeros(2), 1.0)}, Vector::zeros(2));
    EXPECT_THROW(nonexp::project(both, Vector::dense({3, 3})), nonexp::UseDykstra);
    const auto rep = nonexp::dykstra_project(both, Vector::dense({3, 3}));
    EXPECT_TRUE(rep.converged);
    EXPECT_NEAR(rep.point[0], 0.0, 1e-9);
    EXPECT_NEAR(rep.point[1], 1.0, 1e-9);
}

TEST(Convex, VerifyProjectionExamples) {
    const auto ball = ConvexSet::ball(Vector::zeros(2), 1.0);
    EXPECT_TRUE(nonexp::verify_projection(ball, Vector::dense({2, 0}), Vector::dense({1, 0}), 100, 1e-9, 3).holds);

    const auto bad = nonexp::verify_projection(ball, Vector::dense({2, 0}), Vector::dense({0, 1}), 100, 1e-9, 3);
    EXPECT_FALSE(bad.holds);
    ASSERT_TRUE(bad.witness.has_value());
    EXPECT_TRUE(ball.contains(*bad.witness, 1e-12));
    EXPECT_LT(nonexp::inner(Vector::dense({2, -1}), Vector::dense({0, 1}) - *bad.witness), -1e-9);
    // The hand-computed witness c = (1,0): <(2,-1) | (-1,1)> = -3.
    EXPECT_EQ(nonexp::inner(Vector::dense({2, 0}) - Vector::dense({0, 1}), Vector::dense({0, 1}) - Vector::dense({1, 0})),
              -3.0);

    const auto x = Vector::dense({0.3, -7.0, 2.0});
    EXPECT_TRUE(nonexp::verify_projection(ConvexSet::whole_space(3), x, x, 10, 0.0, 1).holds);
    EXPECT_THROW(nonexp::verify_projection(ball, Vector::dense({2, 0}), Vector::dense({2, 0}), 10, 1e-9, 1),
                 nonexp::NotInSet);
}

TEST(Convex, DykstraExamples) {
    const auto h1 = ConvexSet::halfspace(Vector::dense({1, 0}), 0.0);
    const auto h2 = ConvexSet::halfspace(Vector::dense({0, 1}), 0.0);
    std::vector<ConvexSet> quad{h1, h2};
    auto rep = nonexp::dykstra_project(quad, Vector::dense({1, 1}));
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(nonexp::norm(rep.point), 1e-10);
    // Oracle agrees.
    const auto qp = oracle::qp_project(Eigen::Vector2d(1, 1), {{Eigen::Vector2d(1, 0), 0}, {Eigen::Vector2d(0, 1), 0}});
    ASSERT_TRUE(qp);
    EXPECT_LE(qp->norm(), 1e-12);

    const auto ball = ConvexSet::ball(Vector::zeros(2), 1.0);
    rep = nonexp::dykstra_project(ball, Vector::dense({2, 0}));
    EXPECT_EQ(rep.point, Vector::dense({1, 0}));

    std::vector<ConvexSet> rot{
        ConvexSet::halfspace(Vector::dense({1, -1}), 0.0), ConvexSet::halfspace(Vector::dense({-1, 1}), 0.0),
        ConvexSet::halfspace(Vector::dense({1, 1}), 0.0), ConvexSet::halfspace(Vector::dense({-1, -1}), 0.0)};
    rep = nonexp::dykstra_project(rot, Vector::dense({3, 1}));
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(nonexp::norm(rep.point), 1e-9);
}

TEST(Convex, DykstraReportsNonConvergence) {
    std::vector<ConvexSet> rot{
        ConvexSet::halfspace(Vector::dense({1, -0.999}), 0.0), ConvexSet::halfspace(Vector::dense({-1, 1}), 0.0),
        ConvexSet::ball(Vector::dense({0, 5}), 5.0)};
    const auto rep = nonexp::dykstra_project(rot, Vector::dense({30, 1}), {3, 1e-14});
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.iterations, 3u);
    EXPECT_GE(rep.residual, 0.0);
}

TEST(Convex, SampleContracts) {
    const auto pts = nonexp::sample(ConvexSet::whole_space(2), 3, 1.0, 7);
    ASSERT_EQ(pts.size(), 3u);
    for (const auto& p : pts) EXPECT_LE(nonexp::norm(p), 1.0 + 1e-12);

    const auto ball = ConvexSet::ball(Vector::zeros(2), 1.0);
    for (const auto& p : nonexp::sample(ball, 5, 10.0, 1)) EXPECT_TRUE(ball.contains(p));

    const auto hl = ConvexSet::halfline_coordinate(0);
    const auto sp = nonexp::sample(hl, 4, 2.0, 2);
    ASSERT_EQ(sp.size(), 4u);
    for (const auto& p : sp) {
        EXPECT_TRUE(p.is_sparse());
        EXPECT_GE(p[0], 0.0);
        EXPECT_LE(nonexp::norm(p), 2.0 + 1e-12);
    }
    EXPECT_EQ(nonexp::sample(ball, 5, 10.0, 1), nonexp::sample(ball, 5, 10.0, 1));
    EXPECT_THROW(nonexp::sample(ball, 0, 1.0, 1), nonexp::InvalidArgument);
    EXPECT_THROW(nonexp::sample(ball, 1, 0.0, 1), nonexp::InvalidArgument);
}

// Idempotence, nonexpansiveness and the variational characterization for every
// primitive kind.
TEST(Convex, ProjectionProperties) {
    std::mt19937_64 rng(11);
    for (std::size_t trial = 0; trial < 60; ++trial) {
        const std::size_t d = 1 + trial % 4;
        for (const auto& set : primitive_zoo(rng, d)) {
            for (int k = 0; k < 5; ++k) {
                const auto x = random_point(rng, d, 4.0);
                const auto y = random_point(rng, d, 4.0);
                const auto px = set.project(x), py = set.project(y);
                EXPECT_TRUE(set.contains(px, 1e-12)) << set.kind_name();
                EXPECT_LE(nonexp::max_abs_diff(set.project(px), px), 1e-12) << set.kind_name();
                EXPECT_LE(nonexp::distance(px, py), nonexp::distance(x, y) + 1e-12) << set.kind_name();
                EXPECT_TRUE(nonexp::verify_projection(set, x, px, 50, 1e-9, trial).holds) << set.kind_name();
            }
        }
    }
}

// Dykstra matches the enumeration oracle on random half-space/box systems.
TEST(Convex, DykstraMatchesQpOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    while (checked < 40) {
        const std::size_t d = 1 + static_cast<std::size_t>(checked % 4);
        const auto witness = random_point(rng, d, 0.5);
        std::vector<ConvexSet> members;
        std::vector<oracle::Inequality> cons;
        const int n = 1 + checked % 3;
        for (int k = 0; k < n; ++k) {
            if (k == 1) {
                std::vector<double> lo(d), hi(d);
                for (std::size_t i = 0; i < d; ++i) {
                    lo[i] = witness[i] - std::abs(u(rng)) - 0.05;
                    hi[i] = witness[i] + std::abs(u(rng)) + 0.05;
                }
                members.push_back(ConvexSet::box(lo, hi));
            } else {
                const auto nrm = random_point(rng, d, 1.0);
                members.push_back(ConvexSet::halfspace(nrm, nonexp::inner(nrm, witness) + std::abs(u(rng))));
            }
            const auto more = to_inequalities(members.back(), d);
            cons.insert(cons.end(), more.begin(), more.end());
        }
        const auto x = random_point(rng, d, 3.0);
        const auto rep = nonexp::dykstra_project(members, x);
        Eigen::VectorXd ex(d);
        for (std::size_t i = 0; i < d; ++i) ex[i] = x[i];
        const auto qp = oracle::qp_project(ex, cons);
        ASSERT_TRUE(qp);
        for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(rep.point[i], (*qp)[i], 1e-6);
        ++checked;
    }
}
