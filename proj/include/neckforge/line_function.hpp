#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "neckforge/errors.hpp"

namespace neckforge {

/// Real samples on the uniform grid s_k = s0 + k ds, k = 0..N-1.
struct LineFunction {
    double s0 = 0.0;
    double ds = 1.0;
    std::vector<double> values;
    int mode = 0;

    static constexpr std::size_t min_samples = 16;

    LineFunction() = default;
    LineFunction(double s0_, double ds_, std::vector<double> values_, int mode_ = 0)
        : s0(s0_), ds(ds_), values(std::move(values_)), mode(mode_) {
        validate();
    }

    /// Uniform grid of `count` points on [lo, hi) (periodic convention).
    static LineFunction on_interval(double lo, double hi, std::size_t count, int mode = 0) {
        return LineFunction(lo, (hi - lo) / static_cast<double>(count), std::vector<double>(count, 0.0), mode);
    }

    template <class F>
    static LineFunction sample(double lo, double hi, std::size_t count, F&& f, int mode = 0) {
        LineFunction out = on_interval(lo, hi, count, mode);
        for (std::size_t k = 0; k < count; ++k) out.values[k] = f(out.s(k));
        return out;
    }

    void validate() const {
        if (!(ds > 0.0)) throw std::invalid_argument("LineFunction: ds must be positive");
        if (values.size() < min_samples) throw std::invalid_argument("LineFunction: need at least 16 samples");
        for (double v : values) {
            if (!std::isfinite(v)) throw std::invalid_argument("LineFunction: non-finite sample");
        }
    }

    std::size_t size() const { return values.size(); }
    double s(std::size_t k) const { return s0 + ds * static_cast<double>(k); }
    double length() const { return ds * static_cast<double>(values.size()); }
    double centre() const { return s0 + 0.5 * ds * static_cast<double>(values.size() - 1); }

    LineFunction with_values(std::vector<double> v) const { return LineFunction(s0, ds, std::move(v), mode); }

    /// Index range of the interior half of the grid.
    std::pair<std::size_t, std::size_t> interior_half() const {
        const std::size_t n = values.size();
        return {n / 4, n - n / 4};
    }
};

inline double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double sup_norm_range(const LineFunction& f, std::size_t lo, std::size_t hi) {
    double m = 0.0;
    for (std::size_t k = lo; k < hi; ++k) m = std::max(m, std::abs(f.values[k]));
    return m;
}

inline double interior_sup(const LineFunction& f) {
    const auto [lo, hi] = f.interior_half();
    return sup_norm_range(f, lo, hi);
}

namespace fourier {

/// Angular frequency of DFT bin k on a grid of N points with step ds.
inline double frequency(std::size_t k, std::size_t count, double ds) {
    const double kk = k <= count / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(count);
    return 2.0 * std::numbers::pi * kk / (static_cast<double>(count) * ds);
}

/// Apply the multiplier `symbol(xi + i beta)` to f, after conjugating by e^{beta s}:
///   result = e^{-beta s} F^{-1}[ symbol(xi + i beta) F[e^{beta s} f] ].
/// beta = 0 is the ordinary periodic Fourier multiplier.
template <class Symbol>
LineFunction apply_multiplier(const LineFunction& f, Symbol&& symbol, double beta = 0.0) {
    const std::size_t n = f.size();
    const double sc = f.centre();
    std::vector<double> shifted(n);
    for (std::size_t k = 0; k < n; ++k) shifted[k] = std::exp(beta * (f.s(k) - sc)) * f.values[k];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, shifted);
    for (std::size_t k = 0; k < n; ++k) {
        spectrum[k] *= symbol(std::complex<double>(frequency(k, n, f.ds), beta));
    }
    std::vector<std::complex<double>> back;
    fft.inv(back, spectrum);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::exp(-beta * (f.s(k) - sc)) * back[k].real();
    return f.with_values(std::move(out));
}

/// Fraction of spectral energy in the top tenth of the resolved frequency band.
inline double top_band_energy_fraction(const LineFunction& f) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    std::vector<double> copy = f.values;
    fft.fwd(spectrum, copy);
    const std::size_t n = f.size();
    const double nyquist = std::numbers::pi / f.ds;
    double total = 0.0, top = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::norm(spectrum[k]);
        total += e;
        if (std::abs(frequency(k, n, f.ds)) >= 0.9 * nyquist) top += e;
    }
    return total > 0.0 ? top / total : 0.0;
}

} // namespace fourier
} // namespace neckforge
