#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "neckforge/gmres.hpp"
#include "neckforge/quadrature.hpp"
#include "neckforge/solver.hpp"

using namespace neckforge;

namespace {

CylinderBackground small_cylinder(int m_max = 4, int n_s = 32) {
    return CylinderBackground(3, CylinderBackground::default_period(3), m_max, n_s);
}

double grid_value(const CylinderBackground& bg, const ModeTable& t, double x, int j) {
    const Eigen::VectorXd phi = bg.basis().evaluate(x);
    return phi.dot(t.col(j));
}

} // namespace

// ---- oracles

TEST(SolverOracle, CurvatureOfOneIsC) {
    const CylinderBackground bg = small_cylinder();
    const ModeTable q = solver::apply_Q(bg, bg.constant(1.0));
    const ModeTable diff = q - bg.constant(bg.c());
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(bg.c(), 2.0 / std::numbers::pi, 1e-13);
}

TEST(SolverOracle, CurvatureOfConstantScalesAsPower) {
    const CylinderBackground bg = small_cylinder();
    const double t = 1.7;
    const ModeTable q = solver::apply_Q(bg, bg.constant(t));
    // n = 3: c t^{-2/(n-1)} = c / t
    const ModeTable diff = q - bg.constant(bg.c() / t);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SolverOracle, LinearizedActsDiagonally) {
    const CylinderBackground bg = small_cylinder();
    const ModeTable one = bg.constant(1.0);
    const ModeTable l1 = solver::apply_linearized(bg, one);
    EXPECT_LT((l1 - (bg.c() - bg.kappa()) * one).cwiseAbs().maxCoeff(), 1e-13);
    const ModeTable v = bg.mode(1, 1, 1.0);
    const ModeTable lv = solver::apply_linearized(bg, v);
    const double expected = symbol::theta(ModeSpec(3, 0.5, 1), 2.0 * std::numbers::pi / bg.period()) - bg.kappa();
    EXPECT_LT((lv - expected * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SolverOracle, SmallestSingularValueIsSymbolGap) {
    const CylinderBackground bg = small_cylinder(2, 16);
    const Eigen::MatrixXd a = solver::assemble_linearized(bg);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    EXPECT_NEAR(svd.singularValues().minCoeff(), solver::min_symbol_gap(bg), 1e-12);
}

TEST(SolverOracle, BallSpectrumExcludingKernel) {
    const BallBackground bg(3, 6);
    double min_nonzero = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 6; ++k) {
        const double lam = bg.symbol(k, 0) - bg.kappa();
        EXPECT_DOUBLE_EQ(lam, k - 1.0);
        if (k != 1) min_nonzero = std::min(min_nonzero, std::abs(lam));
    }
    EXPECT_DOUBLE_EQ(min_nonzero, 1.0);
}

// ---- quadrature and transforms

TEST(Quadrature, GaussNodesIntegrateJacobiWeight) {
    // alpha = 0: Legendre, int_{-1}^{1} x^2 dx = 2/3
    const quadrature::JacobiBasis b(0.0, 6);
    const Eigen::VectorXd x = b.nodes();
    const Eigen::VectorXd w = b.weights();
    EXPECT_NEAR(w.sum(), 2.0, 1e-13);
    EXPECT_NEAR(w.dot(x.cwiseProduct(x)), 2.0 / 3.0, 1e-13);
}

TEST(Quadrature, ProjectionInvertsSynthesis) {
    const quadrature::JacobiBasis b(0.5, 8);
    Eigen::MatrixXd coef = Eigen::MatrixXd::Random(9, 3);
    const Eigen::MatrixXd back = b.project(b.synthesize(coef));
    EXPECT_LT((back - coef).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solver, GridRoundTrip) {
    const CylinderBackground bg = small_cylinder();
    const ModeTable v = bg.mode(2, 3, 0.4);
    const ModeTable back = bg.from_grid(bg.to_grid(v));
    EXPECT_LT((back - v).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(bg.to_grid(v).cwiseAbs().maxCoeff(), 0.4, 1e-14);
    EXPECT_GT(std::abs(grid_value(bg, v, 1.0, 0)), 0.0);
}

TEST(Solver, LinearSolveInvertsOperator) {
    const CylinderBackground bg = small_cylinder();
    const ModeTable v = bg.mode(1, 2, 1.0) + bg.mode(3, 0, 0.5);
    const ModeTable back = solver::solve_linearized(bg, solver::apply_linearized(bg, v));
    EXPECT_LT((back - v).cwiseAbs().maxCoeff(), 1e-12);
    const ModeTable zero = ModeTable::Zero(bg.rows(), bg.cols());
    EXPECT_EQ(solver::solve_linearized(bg, zero).cwiseAbs().maxCoeff(), 0.0);
    const ModeTable h = bg.constant(1.0);
    EXPECT_LT((solver::solve_linearized(bg, h) - h / (bg.c() - bg.kappa())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Solver, JacobianMatchesFiniteDifferences) {
    const CylinderBackground bg = small_cylinder();
    const ModeTable one = bg.constant(1.0);
    const ModeTable v = bg.mode(1, 1, 1.0) + bg.mode(0, 2, 0.5);
    const ModeTable lv = solver::apply_linearized(bg, v);
    double prev = std::numeric_limits<double>::infinity();
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
        const ModeTable fd = (solver::apply_Q(bg, ModeTable(one + h * v)) - solver::apply_Q(bg, ModeTable(one - h * v))) / (2.0 * h);
        const double err = (fd - lv).cwiseAbs().maxCoeff();
        EXPECT_LT(err, prev);
        prev = err;
    }
    const ModeTable jac = solver::apply_jacobian(bg, one, v);
    EXPECT_LT((jac - lv).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gmres, SolvesSmallSystem) {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Eigen::VectorXd b = Eigen::Vector3d(1.0, 2.0, 3.0);
    const auto res = linalg::gmres([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); },
                                   [](const Eigen::VectorXd& x) { return x; }, b, 1e-12, 10, 50);
    EXPECT_TRUE(res.converged);
    EXPECT_LT((a * res.x - b).norm(), 1e-10);
}

// ---- nonlinear solve

TEST(Solver, ExactSolutionNeedsNoIteration) {
    const CylinderBackground bg = small_cylinder();
    const auto rep = solver::newton_solve(bg, bg.constant(1.0), {solver::Method::Newton});
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 0);
}

TEST(Solver, NewtonConvergesQuadratically) {
    const CylinderBackground bg(3, CylinderBackground::default_period(3), 8, 64);
    const auto rep = solver::newton_solve(bg, ModeTable(bg.constant(1.0) + bg.mode(1, 1, 0.01)), {solver::Method::Newton});
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(rep.residual_history.back(), 1e-10);
    EXPECT_LE(rep.iterations, 5);
    const auto q = rep.quadratic_constants();
    ASSERT_GE(q.size(), 2u);
    EXPECT_LT(q[1], 10.0);
    EXPECT_LT(((rep.final_f - bg.constant(1.0))).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Solver, FixedPointConvergesLinearly) {
    const CylinderBackground bg(3, CylinderBackground::default_period(3), 8, 64);
    const auto rep = solver::newton_solve(bg, ModeTable(bg.constant(1.0) + bg.mode(2, 1, 0.01)), {solver::Method::FixedPoint});
    ASSERT_TRUE(rep.converged);
    for (double r : rep.linear_rates()) EXPECT_LT(r, 0.5);
}

TEST(Solver, QuadraticRemainder) {
    const CylinderBackground bg = small_cylinder();
    const ModeTable one = bg.constant(1.0);
    const ModeTable v = bg.mode(2, 1, 1.0) + bg.mode(0, 3, 0.7);
    const ModeTable lv = solver::apply_linearized(bg, v);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double a : {1e-2, 1e-3, 1e-4}) {
        const ModeTable rem = solver::apply_Q(bg, ModeTable(one + a * v)) - bg.constant(bg.c()) - a * lv;
        const double ratio = solver::grid_norm(bg, rem) / (a * a);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    EXPECT_LT(hi / lo, 3.0);
}

// ---- invertibility study

TEST(Solver, EssentialGapPositive) {
    EXPECT_GT(solver::essential_gap(3, -0.5), 0.1);
    EXPECT_GT(solver::essential_gap(2, -0.25), 0.1);
}

TEST(Solver, NeckInjectivityBoundedBelow) {
    NeckConfig cfg;
    cfg.ds = 0.05;
    cfg.pad = 15.0;
    const auto rep = solver::uniform_invertibility_study(cfg, {1e-1, 1e-2}, -0.5);
    for (const auto& row : rep.rows) EXPECT_GT(row.sigma_min, 0.3);
}

TEST(Solver, LogLogSlopeOfPowerLaw) {
    const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 0.7));
    EXPECT_NEAR(solver::loglog_slope(x, y), 0.7, 1e-12);
}

// ---- errors

TEST(Solver, BallDegreeOneIsResonant) {
    const BallBackground bg(3, 6);
    const ModeTable f0 = bg.constant(1.0) + bg.mode(1, 0, 0.01);
    EXPECT_THROW(solver::newton_solve(bg, f0, {solver::Method::Newton}), ResonanceError);
    EXPECT_THROW(solver::solve_linearized(bg, f0), ResonanceError);
}

TEST(Solver, ResonantPeriodIsRefused) {
    // L = 2 pi k / tau_0 puts the mode-0 zero on the grid
    const double tau = indicial::first_root(ModeSpec(3, 0.5, 0)).tau;
    const CylinderBackground bg(3, 2.0 * std::numbers::pi * 3.0 / tau, 2, 32);
    EXPECT_THROW(solver::check_resonance(bg), ResonanceError);
}

TEST(Solver, NegativeFactorRaises) {
    const CylinderBackground bg = small_cylinder();
    EXPECT_THROW(solver::apply_Q(bg, bg.constant(-1.0)), NonPositiveConformalFactor);
}

TEST(Solver, LargePerturbationDoesNotHang) {
    // outside the contraction radius: either Diverged or a reported outcome, never an exception of another type
    const CylinderBackground bg(3, CylinderBackground::default_period(3), 8, 64);
    try {
        const auto rep = solver::newton_solve(bg, ModeTable(bg.constant(1.0) + bg.mode(1, 1, 0.5)), {solver::Method::Newton});
        EXPECT_FALSE(rep.residual_history.empty());
    } catch (const Diverged&) {
        SUCCEED();
    } catch (const NonPositiveConformalFactor&) {
        SUCCEED();
    }
}

TEST(Solver, BackgroundValidation) {
    EXPECT_THROW(CylinderBackground(3, 5.0, 2, 15), ValidationError);
    EXPECT_THROW(CylinderBackground(3, -1.0, 2, 16), ValidationError);
}
