#include <gtest/gtest.h>

#include <cmath>

#include "neckforge/neck.hpp"

using namespace neckforge;

namespace {

NeckConfig cheap(int n = 3, double eps = 1e-2) {
    NeckConfig cfg;
    cfg.n = n;
    cfg.epsilon = eps;
    cfg.ds = 0.05;
    cfg.pad = 15.0;
    return cfg;
}

} // namespace

// ---- oracles

TEST(NeckOracle, CylinderHasConstantCurvature) {
    for (int n : {2, 3, 5}) {
        const LineFunction one = LineFunction::sample(-20.0, 20.0, 1024, [](double) { return 1.0; });
        const LineFunction q = neck::curvature(one, n, neck::gamma_symbol(n));
        for (double v : q.values) EXPECT_NEAR(v, symbol::constants(n).c, 1e-13);
    }
}

TEST(NeckOracle, SphericalBubbleHasCurvatureHalfNMinusOne) {
    // cosh(s)^{-(n-1)/2} is the round hemisphere boundary: Q = (n-1)/2
    for (int n : {2, 3, 4}) {
        const LineFunction u = LineFunction::sample(-40.0, 40.0, 4096, [&](double s) { return std::pow(std::cosh(s), -0.5 * (n - 1)); });
        const LineFunction q = neck::curvature(u, n, neck::gamma_symbol(n));
        for (double s : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
            const auto k = static_cast<std::size_t>(std::lround((s - u.s0) / u.ds));
            EXPECT_NEAR(q.values[k], 0.5 * (n - 1), 1e-8) << n << " " << s;
        }
    }
}

TEST(NeckOracle, CentredWeightValues) {
    const NeckConfig cfg = cheap(3, 1e-3);
    const double half = 0.5 * cfg.neck_length();
    EXPECT_NEAR(neck::weight(cfg, half), 1.0, 1e-14);
    EXPECT_NEAR(neck::weight(cfg, -half), 1.0, 1e-14);
    EXPECT_NEAR(neck::weight(cfg, 0.0), 1.0 / std::cosh(half), 1e-15);
    EXPECT_NEAR(neck::weight(cfg, 0.0) / (2.0 * std::sqrt(cfg.epsilon)), 1.0, 2e-3);
}

TEST(NeckOracle, LiteralWeightApproachesTwoEpsCosh) {
    NeckConfig cfg = cheap(3, 1e-4);
    cfg.weight_convention = WeightConvention::Literal;
    for (double s : {0.0, 1.5}) EXPECT_NEAR(neck::weight(cfg, s) / (2.0 * cfg.epsilon * std::cosh(s)), 1.0, 1e-7);
}

// ---- cutoffs and geometry

TEST(Neck, SmoothstepPartitionOfUnity) {
    for (double t : {-1.0, 0.0, 0.1, 0.5, 0.77, 1.0, 2.0}) EXPECT_NEAR(neck::smoothstep(t) + neck::smoothstep(1.0 - t), 1.0, 1e-15);
    EXPECT_EQ(neck::smoothstep(0.0), 0.0);
    EXPECT_EQ(neck::smoothstep(1.0), 1.0);
    EXPECT_EQ(neck::chi_tilde(-1.0, 1.0), 1.0);
    EXPECT_EQ(neck::chi_tilde(1.0, 1.0), 0.0);
}

TEST(Neck, GluedFactorCoincidesWithSummandsOutsideTransition) {
    const neck::GluedGeometry g = neck::build_geometry(cheap());
    const double w = g.config.cutoff_width;
    for (std::size_t k = 0; k < g.metric_factor.size(); ++k) {
        const double s = g.metric_factor.s(k);
        if (s <= -w) {
            EXPECT_EQ(g.metric_factor.values[k], g.side1.values[k]);
        }
        if (s >= w) {
            EXPECT_EQ(g.metric_factor.values[k], g.side2.values[k]);
        }
    }
}

TEST(Neck, MiddleOfNeckIsNearlyCylindrical) {
    NeckConfig cfg = cheap(3, 1e-3);
    const neck::GluedGeometry g = neck::build_geometry(cfg);
    const auto k = static_cast<std::size_t>(std::lround(-g.metric_factor.s0 / g.metric_factor.ds));
    const double d = cfg.chart_radius();
    EXPECT_NEAR(g.metric_factor.values[k], 1.0, d * d);
}

TEST(Neck, ConformalFactorPositive) {
    const LineFunction u = neck::build_glued_factor(cheap(2, 0.1));
    for (double v : u.values) EXPECT_GT(v, 0.0);
}

// ---- weighted norms

TEST(Neck, WeightedNormOfWeightPowerIsOne) {
    const NeckConfig cfg = cheap();
    const WeightedNormSpec spec{-0.5, 0};
    LineFunction v = LineFunction::on_interval(-5.0, 5.0, 512);
    for (std::size_t k = 0; k < v.size(); ++k) v.values[k] = std::pow(neck::weight(cfg, v.s(k)), spec.mu);
    EXPECT_NEAR(neck::weighted_norm(spec, cfg, v), 1.0, 1e-14);
}

TEST(Neck, WeightedNormZeroAndHomogeneous) {
    const NeckConfig cfg = cheap();
    const WeightedNormSpec spec{-0.5, 1};
    LineFunction v = LineFunction::sample(-5.0, 5.0, 512, [](double s) { return std::sin(s) * std::exp(-s * s); });
    const LineFunction zero = v.with_values(std::vector<double>(v.size(), 0.0));
    EXPECT_EQ(neck::weighted_norm(spec, cfg, zero), 0.0);
    std::vector<double> twice(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) twice[k] = 2.0 * v.values[k];
    EXPECT_NEAR(neck::weighted_norm(spec, cfg, v.with_values(twice)), 2.0 * neck::weighted_norm(spec, cfg, v), 1e-14);
}

TEST(Neck, NormsOrderedInExponentOnTheNeck) {
    // w <= 1 on the neck, so mu < mu' < 0 gives ||v||_mu <= ||v||_mu'
    const NeckConfig cfg = cheap();
    const double half = 0.5 * cfg.neck_length();
    const LineFunction v = LineFunction::sample(-10.0, 10.0, 1024, [](double s) { return 1.0 + 0.3 * std::cos(3.0 * s); });
    const double a = neck::weighted_norm(WeightedNormSpec{-0.9, 0}, cfg, v, half);
    const double b = neck::weighted_norm(WeightedNormSpec{-0.4, 0}, cfg, v, half);
    EXPECT_LE(a, b);
}

// ---- gluing error

TEST(Neck, GluingErrorVanishesAwayFromTransition) {
    // far out in the padding u is ~1e-5 and periodic wrap-around dominates; stay on the caps
    const auto err = neck::approximate_curvature_error(cheap(), WeightedNormSpec{});
    double inside = 0.0, outside = 0.0;
    for (std::size_t k = 0; k < err.u.size(); ++k) {
        const double s = err.u.s(k);
        const double e = std::abs(err.gluing_error.values[k]);
        if (std::abs(s) <= 1.0) inside = std::max(inside, e);
        if (std::abs(s) >= 4.0 && std::abs(s) <= err.window + 4.0) outside = std::max(outside, e);
    }
    EXPECT_GT(inside, 0.0);
    EXPECT_LT(outside, 0.1 * inside);
}

TEST(Neck, GluingErrorDecaysThreeDimensions) {
    NeckConfig cfg = cheap();
    const auto rows = neck::sweep(cfg, {1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3, 3.125e-3, 1.5625e-3}, WeightedNormSpec{-0.5, 0});
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k].E, rows[k - 1].E) << rows[k].epsilon;
    EXPECT_LT(rows.back().E / rows.front().E, 0.5);
}

TEST(Neck, LiteralErrorDoesNotDecay) {
    // Q - c is O(1) on the caps; only the gluing error is small
    const auto rows = neck::sweep(cheap(), {1e-1, 1e-2}, WeightedNormSpec{-0.5, 0});
    EXPECT_GT(rows.back().E_literal, 0.5);
}

TEST(Neck, CovarianceAgreesWithExtensionDtn) {
    NeckConfig cfg = cheap(3, 0.05);
    cfg.ds = 0.1;
    cfg.pad = 10.0;
    EXPECT_LT(neck::covariance_self_test(cfg), 1e-6);
}

// ---- errors

TEST(Neck, ConfigValidation) {
    NeckConfig cfg = cheap();
    cfg.epsilon = 0.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = cheap();
    cfg.delta = 0.05;
    EXPECT_THROW(cfg.validate(), ConfigOverlap);
    cfg = cheap();
    cfg.ds = 0.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
    EXPECT_THROW((WeightedNormSpec{-0.5, 2}.validate()), ValidationError);
}
