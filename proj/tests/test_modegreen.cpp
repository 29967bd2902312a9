#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "neckforge/modegreen.hpp"

using namespace neckforge;

namespace {

double kappa_of(int n) { return symbol::constants(n).kappa; }

double max_abs_diff(const LineFunction& a, const LineFunction& b, bool interior) {
    std::size_t lo = 0, hi = a.size();
    if (interior) std::tie(lo, hi) = a.interior_half();
    double out = 0.0;
    for (std::size_t k = lo; k < hi; ++k) out = std::max(out, std::abs(a.values[k] - b.values[k]));
    return out;
}

} // namespace

// ---- oracles

TEST(ModeGreenOracle, ConstantIsScaledByCMinusKappa) {
    const ModeSpec spec(3, 0.5, 0);
    const LineFunction one = LineFunction::sample(-10.0, 10.0, 256, [](double) { return 1.0; });
    const LineFunction r = modegreen::apply_L0(spec, one, kappa_of(3));
    const double expected = symbol::constants(3).c - kappa_of(3);
    EXPECT_LT(expected, 0.0);
    for (double v : r.values) EXPECT_NEAR(v, expected, 1e-13);
}

TEST(ModeGreenOracle, ResonantCosineIsAnnihilated) {
    const ModeSpec spec(3, 0.5, 0);
    const double tau = indicial::first_root(spec).tau;
    const double period = 2.0 * std::numbers::pi / tau;
    const LineFunction v = LineFunction::sample(-5.0 * period, 5.0 * period, 1024, [&](double s) { return std::cos(tau * s); });
    const LineFunction r = modegreen::apply_L0(spec, v, kappa_of(3));
    EXPECT_LT(sup_norm(r.values), 1e-8);
}

TEST(ModeGreenOracle, ModeZeroSineCoefficient) {
    // d_0 = 2 / Theta_0'(tau_0), n = 3
    EXPECT_NEAR(modegreen::mode0_sine_coefficient(ModeSpec(3, 0.5, 0), kappa_of(3)), 2.297197611, 1e-8);
}

TEST(ModeGreenOracle, GaussianRoundtripThroughInverse) {
    for (int m = 0; m <= 3; ++m) {
        const ModeSpec spec(3, 0.5, m);
        const LineFunction u = LineFunction::sample(-40.0, 40.0, 4096, [](double s) { return std::exp(-s * s); }, m);
        const LineFunction h = modegreen::apply_L0(spec, u, kappa_of(3));
        const LineFunction back = modegreen::green_solve(spec, h, DecayProfile{m == 0 ? 1.0 : 0.5, m == 0 ? 1.0 : 0.5});
        EXPECT_LT(max_abs_diff(back, u, true), 1e-6) << m;
    }
}

TEST(ModeGreenOracle, ResidueSeriesMatchesFftKernel) {
    const ModeSpec spec(3, 0.5, 1);
    const double beta = 0.0;
    const LineFunction kernel = modegreen::synthesize_kernel(spec, 60.0, 8192, beta);
    const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 0.0, 12);
    for (double s : {-8.0, -2.5, 2.0, 6.0}) {
        const auto k = static_cast<std::size_t>(std::lround((s - kernel.s0) / kernel.ds));
        EXPECT_NEAR(kernel.values[k], modegreen::residue_kernel(spec, cat, beta, kernel.s(k)), 1e-5) << s;
    }
}

TEST(ModeGreenOracle, ModeZeroKernelIsCausalSine) {
    const ModeSpec spec(3, 0.5, 0);
    const double beta = 0.2;
    const LineFunction kernel = modegreen::synthesize_kernel(spec, 60.0, 8192, beta);
    const double d0 = modegreen::mode0_sine_coefficient(spec, kappa_of(3));
    const double tau = indicial::first_root(spec).tau;
    // far to the left only the real pair survives: d_0 sin(tau s)
    for (double s : {-20.0, -15.3}) {
        const auto k = static_cast<std::size_t>(std::lround((s - kernel.s0) / kernel.ds));
        EXPECT_NEAR(kernel.values[k], d0 * std::sin(tau * kernel.s(k)), 1e-4) << s;
    }
    // and to the right the kernel decays
    const auto k = static_cast<std::size_t>(std::lround((20.0 - kernel.s0) / kernel.ds));
    EXPECT_LT(std::abs(kernel.values[k]), 1e-6);
}

// ---- Green operator properties

TEST(ModeGreen, ZeroInZeroOut) {
    const ModeSpec spec(3, 0.5, 2);
    const LineFunction zero = LineFunction::on_interval(-10.0, 10.0, 256, 2);
    const LineFunction v = modegreen::green_solve(spec, zero, DecayProfile{});
    EXPECT_EQ(sup_norm(v.values), 0.0);
}

TEST(ModeGreen, DecayRateInheritedInsideGap) {
    const ModeSpec spec(3, 0.5, 1);
    const double delta = 0.5;
    const LineFunction h = LineFunction::sample(-80.0, 80.0, 8192, [&](double s) { return 1.0 / std::cosh(delta * s); }, 1);
    const LineFunction v = modegreen::green_solve(spec, h, DecayProfile{delta, delta});
    const auto lo = static_cast<std::size_t>(std::lround((-40.0 - v.s0) / v.ds));
    const auto hi = static_cast<std::size_t>(std::lround((40.0 - v.s0) / v.ds));
    const LineFunction core(v.s(lo), v.ds, std::vector<double>(v.values.begin() + lo, v.values.begin() + hi + 1), 1);
    const auto rate = modegreen::tail_rate(core, true);
    ASSERT_TRUE(rate.has_value());
    EXPECT_NEAR(*rate, delta, 0.05 * delta);
}

TEST(ModeGreen, EvenKernelIsSymmetric) {
    for (int m = 1; m <= 3; ++m) {
        const LineFunction kernel = modegreen::synthesize_kernel(ModeSpec(3, 0.5, m), 40.0, 4096, 0.0);
        double asym = 0.0;
        for (std::size_t k = 1; k < kernel.size(); ++k) {
            asym = std::max(asym, std::abs(kernel.values[k] - kernel.values[kernel.size() - k]));
        }
        EXPECT_LT(asym, 1e-8 * sup_norm(kernel.values));
    }
}

TEST(ModeGreen, BetaStaysInsideAdmissibleGap) {
    const ModeSpec spec(3, 0.5, 1);
    const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 2.0);
    const double beta = modegreen::choose_beta(cat, DecayProfile{2.0, 2.0});
    EXPECT_GT(beta, 1.0);
    EXPECT_LT(beta, 2.0);
    EXPECT_DOUBLE_EQ(modegreen::choose_beta(cat, DecayProfile{0.5, 0.5}), 0.0);
}

// ---- homogeneous basis

TEST(ModeGreen, HomogeneousElementsAreAnnihilated) {
    for (int m : {0, 1}) {
        const ModeSpec spec(3, 0.5, m);
        const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 0.0);
        const auto basis = modegreen::homogeneous_basis(spec, cat, 2);
        ASSERT_FALSE(basis.empty());
        for (const auto& e : basis) EXPECT_LT(modegreen::annihilation_residual(spec, e), 1e-6) << e.label();
    }
}

TEST(ModeGreen, FirstModeBasisContainsExpPlusMinusS) {
    const ModeSpec spec(3, 0.5, 1);
    const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 0.0);
    const auto basis = modegreen::basis_functions(cat, 0);
    ASSERT_EQ(basis.size(), 2u);
    EXPECT_NEAR(basis[0].sigma, 1.0, 1e-9);
    EXPECT_EQ(basis[0].sign + basis[1].sign, 0);
}

TEST(ModeGreen, FitRecoversCoefficients) {
    const ModeSpec spec(3, 0.5, 1);
    const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 0.0);
    const auto basis = modegreen::basis_functions(cat, 1);
    const LineFunction v = LineFunction::sample(-3.0, 3.0, 512, [&](double s) {
        return 0.7 * basis[0].value(s) - 0.2 * basis[1].value(s) + 0.05 * basis[2].value(s);
    }, 1);
    const auto c = modegreen::fit_homogeneous(v, basis);
    EXPECT_NEAR(c[0], 0.7, 1e-8);
    EXPECT_NEAR(c[1], -0.2, 1e-8);
    EXPECT_NEAR(c[2], 0.05, 1e-8);
}

// ---- growth classification and Liouville bound

TEST(ModeGreen, ZeroIsTrivial) {
    const LineFunction v = LineFunction::on_interval(-20.0, 20.0, 512, 1);
    EXPECT_EQ(modegreen::classify_growth(v, -0.5).verdict, modegreen::Verdict::Trivial);
}

TEST(ModeGreen, DecayingExponentialIsNotAdmissible) {
    const LineFunction v = LineFunction::sample(-20.0, 20.0, 2048, [](double s) { return std::exp(-s); }, 1);
    EXPECT_EQ(modegreen::classify_growth(v, -0.5).verdict, modegreen::Verdict::NonAdmissible);
}

TEST(ModeGreen, ResonantCosineIsNotAdmissible) {
    const double tau = indicial::first_root(ModeSpec(3, 0.5, 0)).tau;
    const LineFunction v = LineFunction::sample(-40.0, 40.0, 4096, [&](double s) { return std::cos(tau * s); });
    EXPECT_EQ(modegreen::classify_growth(v, -0.3).verdict, modegreen::Verdict::NonAdmissible);
}

TEST(ModeGreen, WeightBoundedFunctionIsAdmissible) {
    const LineFunction v = LineFunction::sample(-20.0, 20.0, 2048, [](double s) { return std::exp(-0.8 * std::abs(s)); });
    EXPECT_EQ(modegreen::classify_growth(v, -0.5).verdict, modegreen::Verdict::AdmissibleNontrivial);
}

TEST(ModeGreen, LiouvilleBoundIsTiny) {
    const ModeSpec spec(3, 0.5, 0);
    const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 0.0);
    const auto b = modegreen::liouville_coefficient_bound(spec, cat, 3, -0.3, modegreen::BoundShape::Symmetric, 80.0);
    EXPECT_LT(b.max_coefficient, 1e-6);
    EXPECT_GT(b.sigma_min, 0.0);
}

// ---- errors

TEST(ModeGreen, SlowTailRaisesTailMismatch) {
    const ModeSpec spec(3, 0.5, 1);
    const LineFunction h = LineFunction::sample(-60.0, 60.0, 4096, [](double s) { return 1.0 / std::cosh(0.2 * s); }, 1);
    EXPECT_THROW(modegreen::green_solve(spec, h, DecayProfile{0.8, 0.8}), TailMismatch);
}

TEST(ModeGreen, DeclaredRateOnRootRaises) {
    const ModeSpec spec(3, 0.5, 1);
    const RootCatalog cat = modegreen::catalog_covering(spec, kappa_of(3), 1.0);
    EXPECT_THROW(modegreen::choose_beta(cat, DecayProfile{1.0, 1.0}), ResonanceError);
}

TEST(ModeGreen, MuOutsideRangeRaises) {
    EXPECT_THROW(modegreen::check_mu(ModeSpec(3, 0.5, 1), -1.2, nullptr), ValidationError);
    EXPECT_THROW(modegreen::check_mu(ModeSpec(3, 0.5, 1), 0.1, nullptr), ValidationError);
}

TEST(ModeGreen, ShortWindowRaises) {
    const LineFunction v = LineFunction::sample(-3.0, 3.0, 256, [](double s) { return std::exp(-s * s) + 0.1; });
    EXPECT_THROW(modegreen::classify_growth(v, -0.5), WindowTooShort);
}

TEST(ModeGreen, AliasWarningOnRoughInput) {
    const ModeSpec spec(3, 0.5, 0);
    LineFunction v = LineFunction::on_interval(-5.0, 5.0, 64);
    for (std::size_t k = 0; k < v.size(); ++k) v.values[k] = (k % 2 == 0) ? 1.0 : -1.0;
    Diagnostics diag;
    (void)modegreen::apply_L0(spec, v, kappa_of(3), 0.0, &diag);
    ASSERT_FALSE(diag.warnings.empty());
    EXPECT_NE(diag.warnings[0].find("AliasWarning"), std::string::npos);
}
