#pragma once

// Complex log-Gamma and digamma on the principal branch.
//
// Both use the Stirling series after shifting the argument to |z| >= 15 with
// the recurrence, and the reflection formula for Re z < 1/2. Arguments with
// negative imaginary part are evaluated at the conjugate and conjugated back,
// so conj-symmetry holds bit for bit.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "neckforge/errors.hpp"

namespace neckforge {

using ComplexValue = std::complex<double>;

namespace specfun {

inline constexpr double pole_tolerance = 1e-12;

namespace detail {

// B_{2k} / (2k (2k-1)), k = 1..10
inline constexpr std::array<double, 10> stirling_coeffs = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

// B_{2k} / (2k), k = 1..10
inline constexpr std::array<double, 10> digamma_coeffs = {
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
};

inline constexpr double shift_radius = 15.0;

inline void check_pole(ComplexValue z) {
    if (z.real() > 0.5) return;
    const double nearest = std::round(z.real());
    if (nearest <= 0.0 && std::abs(z - ComplexValue(nearest, 0.0)) < pole_tolerance) {
        std::ostringstream os;
        os << "Gamma pole at z = " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
        throw PoleError(os.str());
    }
}

// Re z >= 1/2, Im z >= 0.
inline ComplexValue log_gamma_right(ComplexValue z) {
    ComplexValue shift_sum(0.0, 0.0);
    while (std::abs(z) < shift_radius) {
        shift_sum += std::log(z);
        z += 1.0;
    }
    const ComplexValue inv = 1.0 / z;
    const ComplexValue inv2 = inv * inv;
    ComplexValue series(0.0, 0.0);
    ComplexValue power = inv;
    for (double coeff : stirling_coeffs) {
        series += coeff * power;
        power *= inv2;
    }
    constexpr double half_log_2pi = 0.91893853320467274178032973640562;
    return (z - 0.5) * std::log(z) - z + half_log_2pi + series - shift_sum;
}

inline ComplexValue digamma_right(ComplexValue z) {
    ComplexValue shift_sum(0.0, 0.0);
    while (std::abs(z) < shift_radius) {
        shift_sum += 1.0 / z;
        z += 1.0;
    }
    const ComplexValue inv2 = 1.0 / (z * z);
    ComplexValue series(0.0, 0.0);
    ComplexValue power = inv2;
    for (double coeff : digamma_coeffs) {
        series += coeff * power;
        power *= inv2;
    }
    return std::log(z) - 0.5 / z - series - shift_sum;
}

// log(sin(pi z)) for Im z >= 0, stable for large Im z.
inline ComplexValue log_sin_pi(ComplexValue z) {
    constexpr double pi = std::numbers::pi;
    if (z.imag() < 10.0) return std::log(std::sin(pi * z));
    // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i, dominated by e^{-i pi z}
    const ComplexValue i(0.0, 1.0);
    return -i * pi * z + std::log((1.0 - std::exp(2.0 * i * pi * z)) / (2.0 * i) * (-1.0));
}

} // namespace detail

/// Principal-branch log Gamma(z).
inline ComplexValue log_gamma(ComplexValue z) {
    detail::check_pole(z);
    const bool flip = z.imag() < 0.0;
    if (flip) z = std::conj(z);
    ComplexValue result;
    if (z.real() >= 0.5) {
        result = detail::log_gamma_right(z);
    } else {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        constexpr double log_pi = 1.1447298858494001741434273513531;
        const ComplexValue w = 1.0 - z;
        // conj(1 - z) has Im <= 0 here; evaluate on the upper side and conjugate back
        const ComplexValue lg_w = std::conj(detail::log_gamma_right(std::conj(w)));
        result = log_pi - detail::log_sin_pi(z) - lg_w;
        if (z.imag() == 0.0) {
            // real axis: log|Gamma| with i*pi carrying the sign
            const double x = z.real();
            const double sign = std::sin(std::numbers::pi * x) * std::tgamma(1.0 - x);
            result = ComplexValue(std::lgamma(x), sign < 0.0 ? std::numbers::pi : 0.0);
        }
    }
    return flip ? std::conj(result) : result;
}

/// Gamma(z) as exp(log_gamma(z)).
inline ComplexValue gamma(ComplexValue z) { return std::exp(log_gamma(z)); }

/// |Gamma(z)|^2 = exp(2 Re log Gamma(z)).
inline double abs_gamma_sq(ComplexValue z) { return std::exp(2.0 * log_gamma(z).real()); }

/// Digamma psi(z) = Gamma'(z) / Gamma(z).
inline ComplexValue digamma(ComplexValue z) {
    detail::check_pole(z);
    const bool flip = z.imag() < 0.0;
    if (flip) z = std::conj(z);
    ComplexValue result;
    if (z.real() >= 0.5) {
        result = detail::digamma_right(z);
    } else {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        constexpr double pi = std::numbers::pi;
        const ComplexValue w = 1.0 - z;
        const ComplexValue psi_w = std::conj(detail::digamma_right(std::conj(w)));
        result = psi_w - pi / std::tan(pi * z);
    }
    return flip ? std::conj(result) : result;
}

} // namespace specfun
} // namespace neckforge
