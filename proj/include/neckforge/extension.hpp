#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "neckforge/errors.hpp"
#include "neckforge/symbol.hpp"

namespace neckforge {

enum class ExtensionScheme { CollocationODE, FiniteDifference2D };

/// Separated extension problem on the half-sphere cross-section of R x S^n_+, one (m, xi) pair.
struct HalfCylinderProblem {
    ModeSpec spec;
    double xi = 0.0;
    int phi_grid = 2048;
    ExtensionScheme scheme = ExtensionScheme::CollocationODE;
    /// Angular points for the 2-D path.
    int theta_grid = 128;

    static constexpr int min_phi_grid = 64;

    void validate() const {
        spec.validate();
        if (spec.gamma != 0.5) throw DegenerateSpec("the extension problem is implemented for gamma = 1/2 only");
        if (phi_grid < min_phi_grid) throw ResolutionTooCoarse("phi_grid must be >= 64");
        if (!std::isfinite(xi)) throw DegenerateSpec("non-finite frequency");
        if (scheme == ExtensionScheme::FiniteDifference2D) {
            if (spec.n != 2) throw DegenerateSpec("the 2-D finite-difference path is for n = 2");
            if (theta_grid < 4 * spec.m + 8) throw ResolutionTooCoarse("theta_grid too small for the mode");
        }
    }

    /// Zeroth-order coefficient (n-1)^2/4 of the conformal Laplacian on the product metric.
    double potential() const { return 0.25 * (spec.n - 1.0) * (spec.n - 1.0); }
};

namespace extension {

namespace detail {

/// psi = sin^m(phi) y turns the singular mode problem into
///   -y'' - (2m+n-1) cot(phi) y' + (m(m+n-1) + xi^2 + (n-1)^2/4) y = 0,
/// y'(0) = 0, y(pi/2) = 1, and the DtN value is y'(pi/2).
inline double dtn_ode(const HalfCylinderProblem& prob) {
    const int N = prob.phi_grid;
    const int m = prob.spec.m;
    const int n = prob.spec.n;
    const double h = 0.5 * std::numbers::pi / N;
    const double k = 2.0 * m + n - 1.0;
    const double q = m * (m + n - 1.0) + prob.xi * prob.xi + prob.potential();

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> trip;
    trip.reserve(3 * N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    // phi = 0: cot(phi) y' -> y''(0); mirror ghost y_{-1} = y_1.
    trip.emplace_back(0, 0, 2.0 * (1.0 + k) / (h * h) + q);
    trip.emplace_back(0, 1, -2.0 * (1.0 + k) / (h * h));
    for (int i = 1; i < N; ++i) {
        const double phi = i * h;
        const double drift = k / (std::tan(phi) * 2.0 * h);
        const double lower = -1.0 / (h * h) + drift;
        const double upper = -1.0 / (h * h) - drift;
        trip.emplace_back(i, i - 1, lower);
        trip.emplace_back(i, i, 2.0 / (h * h) + q);
        if (i + 1 < N) {
            trip.emplace_back(i, i + 1, upper);
        } else {
            rhs(i) -= upper;  // y_N = 1
        }
    }
    Eigen::SparseMatrix<double> a(N, N);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SingularBVP("factorization of the mode problem failed");
    const Eigen::VectorXd y = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !y.allFinite()) throw SingularBVP("mode problem solve failed");
    // one-sided derivative corrected with y''(pi/2) = q (cot vanishes there)
    return (1.0 - y(N - 1)) / h + 0.5 * h * q;
}

/// Cell-centred 5-point scheme in (phi, theta) on the n = 2 half-sphere with boundary data cos(m theta).
inline double dtn_fd2d(const HalfCylinderProblem& prob) {
    const int np = prob.phi_grid;
    const int nt = prob.theta_grid;
    const int m = prob.spec.m;
    const double h = 0.5 * std::numbers::pi / np;
    const double ht = 2.0 * std::numbers::pi / nt;
    const double q = prob.xi * prob.xi + prob.potential();
    auto idx = [&](int i, int j) { return i * nt + ((j % nt) + nt) % nt; };

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(5) * np * nt);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np) * nt);
    for (int i = 0; i < np; ++i) {
        const double phi = (i + 0.5) * h;
        const double s = std::sin(phi);
        const double s_lo = std::sin(i * h);
        const double s_hi = std::sin((i + 1) * h);
        for (int j = 0; j < nt; ++j) {
            const int row = idx(i, j);
            // -(1/s) d/dphi (s dpsi/dphi) - (1/s^2) d^2psi/dtheta^2 + q psi
            double diag = q + 2.0 / (s * s * ht * ht);
            trip.emplace_back(row, idx(i, j - 1), -1.0 / (s * s * ht * ht));
            trip.emplace_back(row, idx(i, j + 1), -1.0 / (s * s * ht * ht));
            if (i > 0) {
                trip.emplace_back(row, idx(i - 1, j), -s_lo / (s * h * h));
                diag += s_lo / (s * h * h);
            }
            if (i + 1 < np) {
                trip.emplace_back(row, idx(i + 1, j), -s_hi / (s * h * h));
                diag += s_hi / (s * h * h);
            } else {
                // Dirichlet at the face phi = pi/2 via ghost psi_g = 2 g - psi
                const double g = std::cos(m * j * ht);
                diag += 2.0 * s_hi / (s * h * h);
                rhs(row) += 2.0 * s_hi * g / (s * h * h);
            }
            trip.emplace_back(row, row, diag);
        }
    }
    const Eigen::Index size = static_cast<Eigen::Index>(np) * nt;
    Eigen::SparseMatrix<double> a(size, size);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) throw SingularBVP("2-D factorization failed");
    const Eigen::VectorXd psi = lu.solve(rhs);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < nt; ++j) {
        const double g = std::cos(m * j * ht);
        const double flux = 2.0 * (g - psi(idx(np - 1, j))) / h;
        num += flux * g;
        den += g * g;
    }
    return num / den;
}

} // namespace detail

/// DtN value of the mode problem: the symbol Theta_m(xi) computed from the bulk.
/// The equator is totally geodesic, so no mean-curvature term is added.
inline double dtn_cylinder(const HalfCylinderProblem& prob) {
    prob.validate();
    const double d = prob.scheme == ExtensionScheme::CollocationODE ? detail::dtn_ode(prob) : detail::dtn_fd2d(prob);
    if (!std::isfinite(d)) throw SingularBVP("non-finite DtN value");
    return d;
}

/// Richardson-extrapolated DtN from phi_grid and 2 phi_grid (fourth order for smooth data).
inline double dtn_cylinder_extrapolated(HalfCylinderProblem prob) {
    const double coarse = dtn_cylinder(prob);
    prob.phi_grid *= 2;
    const double fine = dtn_cylinder(prob);
    return (4.0 * fine - coarse) / 3.0;
}

struct ValidationRow {
    int n = 0;
    int m = 0;
    double xi = 0.0;
    double dtn = 0.0;
    double theta = 0.0;
    double rel_err = 0.0;
    /// Error ratio err(N) / err(2N).
    double refinement_gain = 0.0;
};

inline ValidationRow validate_against_symbol(int n, int m, double xi, int phi_grid = 2048,
                                             ExtensionScheme scheme = ExtensionScheme::CollocationODE) {
    HalfCylinderProblem prob;
    prob.spec = ModeSpec(n, 0.5, m);
    prob.xi = xi;
    prob.phi_grid = phi_grid;
    prob.scheme = scheme;
    ValidationRow row;
    row.n = n;
    row.m = m;
    row.xi = xi;
    row.theta = symbol::theta(prob.spec, xi);
    row.dtn = dtn_cylinder(prob);
    row.rel_err = std::abs(row.dtn - row.theta) / row.theta;
    prob.phi_grid *= 2;
    const double fine_err = std::abs(dtn_cylinder(prob) - row.theta) / row.theta;
    row.refinement_gain = fine_err > 0.0 ? row.rel_err / fine_err : std::numeric_limits<double>::infinity();
    return row;
}

} // namespace extension

/// Flat unit ball, the scalar-flat CMC model summand.
struct BallModel {
    int n = 3;
    int k_max = 10;

    void validate() const {
        if (n < 2) throw DegenerateSpec("ball dimension n must be >= 2");
        if (k_max < 0) throw DegenerateSpec("k_max must be >= 0");
    }
};

namespace extension {

/// Harmonic extension r^k Y_k has normal derivative k; the unit sphere adds (n-1)/2 * H with H = 1.
inline double dtn_ball_eigenvalue(const BallModel& model, int k) {
    model.validate();
    if (k < 0 || k > model.k_max) throw DegenerateSpec("degree outside [0, k_max]");
    return k + 0.5 * (model.n - 1.0);
}

/// Q of the ball boundary.
inline double ball_curvature(const BallModel& model) { return 0.5 * (model.n - 1.0); }

/// Eigenvalue of the linearization P - (n+1)/(n-1) Q at degree k.
inline double ball_linearized_eigenvalue(const BallModel& model, int k) {
    const double kappa = (model.n + 1.0) / (model.n - 1.0) * ball_curvature(model);
    return dtn_ball_eigenvalue(model, k) - kappa;
}

inline std::vector<int> ball_kernel_degrees(const BallModel& model) {
    model.validate();
    std::vector<int> out;
    for (int k = 0; k <= model.k_max; ++k) {
        if (std::abs(ball_linearized_eigenvalue(model, k)) < 1e-12) out.push_back(k);
    }
    return out;
}

} // namespace extension
} // namespace neckforge
