#pragma once

// Fourier symbol of the conformal fractional Laplacian on the model cylinder
// R x S^{n-1}, projected on spherical-harmonic degree m:
//
//   Theta_m(xi) = 2^{2 gamma} |Gamma(A + i xi/2)|^2 / |Gamma(B + i xi/2)|^2
//   A = 1/2 + gamma/2 + (n/2 + m - 1)/2,   B = A - gamma.
//
// The analytic continuation replaces |Gamma(a + ib)|^2 by Gamma(a+ib)Gamma(a-ib).
// Growth/decay exponents use the convention v = e^{lambda s} <=> zeta = -i lambda.

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "neckforge/errors.hpp"
#include "neckforge/specfun.hpp"

namespace neckforge {

/// (n, gamma, m) plus the derived Gamma-argument offsets.
struct ModeSpec {
    int n = 3;
    double gamma = 0.5;
    int m = 0;

    ModeSpec() = default;
    ModeSpec(int n_, double gamma_, int m_) : n(n_), gamma(gamma_), m(m_) { validate(); }

    void validate() const {
        if (n < 2) throw DegenerateSpec("dimension n must be >= 2");
        if (!(gamma > 0.0 && gamma < 0.5 * n)) throw DegenerateSpec("gamma must lie in (0, n/2)");
        if (m < 0) throw DegenerateSpec("mode degree m must be >= 0");
    }

    double A() const { return 0.5 + 0.5 * gamma + 0.5 * (0.5 * n + m - 1.0); }
    double B() const { return 0.5 - 0.5 * gamma + 0.5 * (0.5 * n + m - 1.0); }
    /// Eigenvalue of -Laplacian on S^{n-1} for degree m.
    double mu() const { return static_cast<double>(m) * (m + n - 2); }
    /// Dimension of the degree-m spherical harmonics on S^{n-1}.
    long multiplicity() const {
        if (n == 2) return m == 0 ? 1 : 2;
        // binom(m+n-1, n-1) - binom(m+n-3, n-1)
        auto binom = [](long a, long b) -> long {
            if (b < 0 || a < b) return 0;
            long r = 1;
            for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
            return r;
        };
        return binom(m + n - 1, n - 1) - binom(m + n - 3, n - 1);
    }
};

/// Curvature constant of the model cylinder and the linearization shift.
struct Constants {
    double c = 0.0;
    double kappa = 0.0;
};

namespace symbol {

/// Theta_m(xi) for real xi. Always > 0.
inline double theta(const ModeSpec& spec, double xi) {
    const ComplexValue a(spec.A(), 0.5 * xi);
    const ComplexValue b(spec.B(), 0.5 * xi);
    if (xi == 0.0 && spec.B() <= 0.0 && std::abs(spec.B() - std::round(spec.B())) < specfun::pole_tolerance) {
        throw DegenerateSpec("B is a non-positive integer; Theta_m(0) undefined");
    }
    const double log_ratio = 2.0 * (specfun::log_gamma(a).real() - specfun::log_gamma(b).real());
    return std::exp(2.0 * spec.gamma * std::numbers::ln2 + log_ratio);
}

namespace detail {

inline bool near_pole(ComplexValue z) {
    if (z.real() > 0.5) return false;
    const double k = std::round(z.real());
    return k <= 0.0 && std::abs(z - ComplexValue(k, 0.0)) < specfun::pole_tolerance;
}

} // namespace detail

/// Analytic continuation of Theta_m to complex zeta.
inline ComplexValue theta_analytic(const ModeSpec& spec, ComplexValue zeta) {
    const ComplexValue half_i_zeta = ComplexValue(0.0, 0.5) * zeta;
    const ComplexValue a_plus = spec.A() + half_i_zeta;
    const ComplexValue a_minus = spec.A() - half_i_zeta;
    const ComplexValue b_plus = spec.B() + half_i_zeta;
    const ComplexValue b_minus = spec.B() - half_i_zeta;
    if (detail::near_pole(a_plus) || detail::near_pole(a_minus)) {
        std::ostringstream os;
        os << "Theta_" << spec.m << " has a pole at zeta = " << zeta;
        throw PoleError(os.str());
    }
    if (detail::near_pole(b_plus) || detail::near_pole(b_minus)) return ComplexValue(0.0, 0.0);
    const ComplexValue log_value = 2.0 * spec.gamma * std::numbers::ln2 + specfun::log_gamma(a_plus) +
                                   specfun::log_gamma(a_minus) - specfun::log_gamma(b_plus) -
                                   specfun::log_gamma(b_minus);
    ComplexValue value = std::exp(log_value);
    // Real on the real and imaginary axes; drop the round-off imaginary part.
    if (zeta.imag() == 0.0 || zeta.real() == 0.0) value = ComplexValue(value.real(), 0.0);
    return value;
}

/// d Theta_m / d zeta at a regular point (zero where the denominator has a pole).
inline ComplexValue theta_analytic_derivative(const ModeSpec& spec, ComplexValue zeta) {
    const ComplexValue value = theta_analytic(spec, zeta);
    const ComplexValue half_i = ComplexValue(0.0, 0.5);
    const ComplexValue half_i_zeta = half_i * zeta;
    if (value == ComplexValue(0.0, 0.0)) {
        // simple zero from 1/Gamma(B -/+ i zeta/2): derivative from residues of Gamma
        const ComplexValue step = 1e-6 * std::max(1.0, std::abs(zeta));
        return (theta_analytic(spec, zeta + step) - theta_analytic(spec, zeta - step)) / (2.0 * step);
    }
    const ComplexValue log_derivative =
        half_i * (specfun::digamma(spec.A() + half_i_zeta) - specfun::digamma(spec.A() - half_i_zeta) -
                  specfun::digamma(spec.B() + half_i_zeta) + specfun::digamma(spec.B() - half_i_zeta));
    return value * log_derivative;
}

/// c = Theta_0(0) and kappa = (n+1)/(n-1) c.
inline Constants constants(int n, double gamma = 0.5) {
    const ModeSpec spec(n, gamma, 0);
    Constants k;
    k.c = theta(spec, 0.0);
    k.kappa = (n + 1.0) / (n - 1.0) * k.c;
    return k;
}

/// c in closed form for gamma = 1/2: 2 Gamma((n+1)/4)^2 / Gamma((n-1)/4)^2.
inline double c_closed_form(int n) {
    const double a = std::tgamma((n + 1.0) / 4.0);
    const double b = std::tgamma((n - 1.0) / 4.0);
    return 2.0 * a * a / (b * b);
}

} // namespace symbol
} // namespace neckforge
