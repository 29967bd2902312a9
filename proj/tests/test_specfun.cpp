#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "neckforge/specfun.hpp"

using namespace neckforge;
using specfun::abs_gamma_sq;
using specfun::digamma;
using specfun::log_gamma;

constexpr double pi = std::numbers::pi;

// ---- oracles: closed-form Gamma values

TEST(SpecfunOracle, LogGammaHalfIsLogSqrtPi) {
    EXPECT_NEAR(log_gamma({0.5, 0.0}).real(), 0.5723649429247001, 1e-14);
    EXPECT_NEAR(log_gamma({0.5, 0.0}).imag(), 0.0, 1e-15);
}

TEST(SpecfunOracle, LogGammaOneIsZero) { EXPECT_NEAR(std::abs(log_gamma({1.0, 0.0})), 0.0, 1e-15); }

TEST(SpecfunOracle, AbsGammaSqOnVerticalLine) {
    // |Gamma(1 + iy)|^2 = pi y / sinh(pi y)
    EXPECT_NEAR(abs_gamma_sq({1.0, 1.0}), pi / std::sinh(pi), 1e-13);
    // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
    for (double y : {0.3, 2.0, 7.5}) EXPECT_NEAR(abs_gamma_sq({0.5, y}) * std::cosh(pi * y) / pi, 1.0, 1e-12);
}

TEST(SpecfunOracle, AbsGammaSqIntegers) {
    EXPECT_NEAR(abs_gamma_sq({0.5, 0.0}), pi, 1e-13);
    EXPECT_NEAR(abs_gamma_sq({3.0, 0.0}), 4.0, 1e-13);
}

TEST(SpecfunOracle, MatchesStdLgammaOnRealAxis) {
    for (double x : {0.01, 0.7, 1.5, 3.25, 14.0, 16.0, 40.0, 170.5}) {
        EXPECT_NEAR(log_gamma({x, 0.0}).real(), std::lgamma(x), 1e-12 * std::max(1.0, std::abs(std::lgamma(x))));
    }
}

TEST(SpecfunOracle, ReflectionOnNegativeAxis) {
    // Gamma(-1/2) = -2 sqrt(pi)
    EXPECT_NEAR(specfun::gamma({-0.5, 0.0}).real(), -2.0 * std::sqrt(pi), 1e-12);
}

TEST(SpecfunOracle, DigammaValues) {
    EXPECT_NEAR(digamma({1.0, 0.0}).real(), -0.57721566490153286, 1e-14);
    EXPECT_NEAR(digamma({0.5, 0.0}).real(), -0.57721566490153286 - 2.0 * std::numbers::ln2, 1e-14);
    // Im psi(1/2 + iy) = (pi/2) tanh(pi y)
    EXPECT_NEAR(digamma({0.5, 1.3}).imag(), 0.5 * pi * std::tanh(pi * 1.3), 1e-13);
}

// ---- identities

TEST(Specfun, RecurrenceAtComplexPoint) {
    const ComplexValue z(2.5, 1.3);
    const ComplexValue lhs = std::exp(log_gamma(z + 1.0));
    const ComplexValue rhs = z * std::exp(log_gamma(z));
    EXPECT_LT(std::abs(lhs - rhs) / std::abs(rhs), 1e-12);
}

TEST(Specfun, RecurrenceAcrossShiftRadius) {
    for (double re : {-7.3, -0.4, 0.2, 13.9, 14.6, 30.0}) {
        for (double im : {-20.0, -0.7, 0.9, 55.0}) {
            const ComplexValue z(re, im);
            const ComplexValue d = log_gamma(z + 1.0) - log_gamma(z) - std::log(z);
            // equal up to a multiple of 2 pi i on the principal branch
            EXPECT_NEAR(d.real(), 0.0, 1e-11) << z;
            EXPECT_NEAR(std::remainder(d.imag(), 2.0 * pi), 0.0, 1e-10) << z;
        }
    }
}

TEST(Specfun, ConjugateSymmetryIsExact) {
    for (ComplexValue z : {ComplexValue(0.3, 2.0), ComplexValue(-3.7, 0.4), ComplexValue(20.0, 100.0)}) {
        EXPECT_EQ(log_gamma(std::conj(z)), std::conj(log_gamma(z)));
        EXPECT_EQ(digamma(std::conj(z)), std::conj(digamma(z)));
    }
}

TEST(Specfun, DigammaIsLogGammaDerivative) {
    const ComplexValue z(1.7, -2.2);
    const double h = 1e-5;
    const ComplexValue fd = (log_gamma(z + h) - log_gamma(z - h)) / (2.0 * h);
    EXPECT_LT(std::abs(fd - digamma(z)), 1e-8);
}

TEST(Specfun, LargeImaginaryPartStaysFinite) {
    const ComplexValue v = log_gamma({0.75, 1e4});
    EXPECT_TRUE(std::isfinite(v.real()));
    // Stirling: Re log Gamma(x + iy) ~ (x - 1/2) log y - pi y / 2 + log sqrt(2 pi)
    EXPECT_NEAR(v.real(), 0.25 * std::log(1e4) - 0.5 * pi * 1e4 + 0.5 * std::log(2.0 * pi), 1e-4);
}

// ---- errors

TEST(Specfun, PolesRaise) {
    EXPECT_THROW(log_gamma({0.0, 0.0}), PoleError);
    EXPECT_THROW(log_gamma({-3.0, 0.0}), PoleError);
    EXPECT_THROW(digamma({-1.0, 0.0}), PoleError);
    EXPECT_NO_THROW(log_gamma({-3.0, 1e-6}));
}
