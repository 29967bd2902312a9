#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "neckforge/errors.hpp"
#include "neckforge/extension.hpp"
#include "neckforge/line_function.hpp"
#include "neckforge/symbol.hpp"

namespace neckforge {

enum class WeightConvention { Centered, Literal };

/// Glued model: two unit-ball summands joined by a neck of length S = -log(eps).
struct NeckConfig {
    int n = 3;
    double epsilon = 1e-2;
    /// Chart radius; defaults to eps^{1/4}.
    std::optional<double> delta;
    double cutoff_width = 1.0;
    /// Curvature of the summands in chart units: 1 is the unit ball, 0 a flat half-space.
    double curvature_scale = 1.0;
    /// Target grid step in s.
    double ds = 0.02;
    /// Extra length beyond each cap centre.
    double pad = 30.0;
    WeightConvention weight_convention = WeightConvention::Centered;

    void validate() const {
        if (n < 2) throw ValidationError("n", "must be >= 2");
        if (!(epsilon > 0.0 && epsilon < 0.25)) throw ValidationError("epsilon", "must lie in (0, 0.25)");
        if (!(cutoff_width > 0.0)) throw ValidationError("cutoff_width", "must be positive");
        if (!(curvature_scale >= 0.0)) throw ValidationError("curvature_scale", "must be >= 0");
        if (!(ds > 0.0 && ds <= 0.1)) throw ValidationError("ds", "must lie in (0, 0.1]");
        if (!(pad >= 10.0)) throw ValidationError("pad", "must be >= 10");
        const double d = chart_radius();
        if (!(d > 0.0 && d <= 1.0)) throw ValidationError("delta", "must lie in (0, 1]");
        if (std::sqrt(epsilon) >= d) throw ConfigOverlap("sqrt(epsilon) >= delta: the charts overlap the neck");
    }

    double chart_radius() const { return delta.value_or(std::pow(epsilon, 0.25)); }
    double neck_length() const { return -std::log(epsilon); }
    /// a in the stereographic boundary factor (1 + a r^2)^{-2}.
    double ball_parameter() const {
        const double d = curvature_scale * chart_radius();
        return 0.25 * d * d;
    }
    /// Half-width of the evaluation window: neck plus one cutoff band and a unit margin.
    double window_half_width() const { return 0.5 * neck_length() + cutoff_width + 1.0; }
};

/// Weighted sup norm ||w^{-mu} v|| (k = 0) plus the weighted difference quotient (k = 1).
struct WeightedNormSpec {
    double mu = -0.5;
    int k = 0;

    void validate() const {
        if (k != 0 && k != 1) throw ValidationError("k", "must be 0 or 1");
        if (!std::isfinite(mu)) throw ValidationError("mu", "must be finite");
    }
};

namespace neck {

/// Smooth step: 0 for t <= 0, 1 for t >= 1, and S(t) + S(1 - t) = 1.
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

/// chi(r): 0 for r <= 1, 1 for r >= 2.
inline double chi(double r) { return smoothstep(r - 1.0); }

/// Neck cutoff on side 1: 1 for sbar <= -w, 0 for sbar >= w.
inline double chi_tilde(double sbar, double width) { return 1.0 - smoothstep(0.5 * (sbar + width) / width); }

inline double weight(const NeckConfig& cfg, double sbar) {
    const double half = 0.5 * cfg.neck_length();
    const double ref = cfg.weight_convention == WeightConvention::Centered ? half : 2.0 * half;
    // cosh(x)/cosh(X) without overflow
    const double ratio = std::exp(std::abs(sbar) - ref) * (1.0 + std::exp(-2.0 * std::abs(sbar))) /
                         (1.0 + std::exp(-2.0 * ref));
    if (ratio <= 1.0) return ratio;
    // smooth cap into [1, 2)
    return 1.0 + std::tanh(ratio - 1.0);
}

/// Metric factor F of summand i relative to the cylinder, as a function of its own s (r = e^{-s}):
/// (chi(r) r^2 + 1 - chi(r)) (1 + a r^2)^{-2}.
inline double summand_metric_factor(double s, double a) {
    if (s > 40.0) return 1.0;
    const double r = std::exp(-s);
    const double c = chi(r);
    // r^2 (1 + a r^2)^{-2} = 1 / (1/r + a r)^2 is evaluated stably for large r
    const double ball = 1.0 / ((1.0 / r + a * r) * (1.0 / r + a * r));
    const double cyl = 1.0 / ((1.0 + a * r * r) * (1.0 + a * r * r));
    return c * ball + (1.0 - c) * cyl;
}

struct GluedGeometry {
    NeckConfig config;
    /// sbar grid (neck centre at 0)
    LineFunction metric_factor;
    LineFunction side1;
    LineFunction side2;

    double exponent() const { return 0.25 * (config.n - 1.0); }
    /// u = F^{(n-1)/4}: g = u^{4/(n-1)} g_0 on the boundary.
    LineFunction conformal_factor(const LineFunction& f) const {
        std::vector<double> v(f.size());
        for (std::size_t k = 0; k < f.size(); ++k) v[k] = std::pow(f.values[k], exponent());
        return f.with_values(std::move(v));
    }
    LineFunction u() const { return conformal_factor(metric_factor); }
    LineFunction u1() const { return conformal_factor(side1); }
    LineFunction u2() const { return conformal_factor(side2); }
};

inline std::size_t grid_size(double length, double ds) {
    std::size_t n = 256;
    while (static_cast<double>(n) * ds < length) n *= 2;
    return n;
}

inline GluedGeometry build_geometry(const NeckConfig& cfg) {
    cfg.validate();
    const double half = 0.5 * cfg.neck_length();
    const double a = cfg.ball_parameter();
    // cap centre sits at s = log(sqrt(a)) on each summand; flat summands get a fixed reach
    const double cap = a > 0.0 ? std::max(0.0, -0.5 * std::log(a)) : 10.0;
    const double reach = half + cap + cfg.pad;
    const std::size_t count = grid_size(2.0 * reach, cfg.ds);
    GluedGeometry g;
    g.config = cfg;
    std::vector<double> f(count), f1(count), f2(count);
    const double step = 2.0 * reach / static_cast<double>(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double sbar = -reach + step * static_cast<double>(k);
        f1[k] = summand_metric_factor(sbar + half, a);
        f2[k] = summand_metric_factor(half - sbar, a);
        const double t = chi_tilde(sbar, cfg.cutoff_width);
        f[k] = t * f1[k] + (1.0 - t) * f2[k];
        if (!(f[k] > 0.0)) throw NonPositiveConformalFactor("glued metric factor is not positive");
    }
    g.metric_factor = LineFunction(-reach, step, std::move(f), 0);
    g.side1 = LineFunction(-reach, step, std::move(f1), 0);
    g.side2 = LineFunction(-reach, step, std::move(f2), 0);
    return g;
}

/// Boundary conformal factor u_eps of the glued model.
inline LineFunction build_glued_factor(const NeckConfig& cfg) { return build_geometry(cfg).u(); }

// ---------------------------------------------------------------- operator P on the line

/// Zonal symbol used for P: defaults to Theta_0.
using ZonalSymbol = std::function<double(double)>;

inline ZonalSymbol gamma_symbol(int n) {
    const ModeSpec spec(n, 0.5, 0);
    return [spec](double xi) { return symbol::theta(spec, xi); };
}

/// DtN values from the extension ODE, Richardson-extrapolated, with the phi grid scaled to xi.
inline ZonalSymbol extension_symbol(int n) {
    return [n](double xi) {
        HalfCylinderProblem prob;
        prob.spec = ModeSpec(n, 0.5, 0);
        prob.xi = xi;
        prob.phi_grid = std::max(1024, static_cast<int>(std::ceil(64.0 * std::abs(xi))));
        return extension::dtn_cylinder_extrapolated(prob);
    };
}

/// P(g) for g with (possibly different) constant limits at the two ends:
///   P g = c g + F^{-1}[ (Theta(xi) - c) / (i xi) * F[g'] ],
/// with g' split into an analytic tanh-step part and a spectrally differentiated decaying rest.
inline LineFunction apply_P(const LineFunction& g, const ZonalSymbol& theta) {
    const std::size_t count = g.size();
    const double c = theta(0.0);
    const double left = g.values.front();
    const double right = g.values.back();
    const double mid = g.centre();
    std::vector<double> rest(count), step_derivative(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = g.s(k) - mid;
        const double t = 0.5 * (1.0 + std::tanh(x));
        const double sech = 1.0 / std::cosh(x);
        rest[k] = g.values[k] - left - (right - left) * t;
        step_derivative[k] = 0.5 * (right - left) * sech * sech;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> rest_hat, step_hat;
    fft.fwd(rest_hat, rest);
    fft.fwd(step_hat, step_derivative);
    std::vector<double> symbol_values(count / 2 + 1);
    for (std::size_t k = 0; k <= count / 2; ++k) symbol_values[k] = theta(fourier::frequency(k, count, g.ds));
    for (std::size_t k = 0; k < count; ++k) {
        const double xi = fourier::frequency(k, count, g.ds);
        const std::size_t kk = k <= count / 2 ? k : count - k;
        const double th = symbol_values[kk];
        if (k == 0 || (count % 2 == 0 && k == count / 2)) {
            // (Theta - c)/(i xi) vanishes at 0; the Nyquist bin is dropped to keep the result real
            step_hat[k] = (k == 0) ? std::complex<double>(0.0, 0.0) : std::complex<double>(0.0, 0.0);
            rest_hat[k] = (k == 0) ? std::complex<double>(0.0, 0.0) : rest_hat[k] * (th - c);
            continue;
        }
        const std::complex<double> ixi(0.0, xi);
        // rest: (Theta - c) applied directly; step part: (Theta - c)/(i xi) times the derivative
        rest_hat[k] = rest_hat[k] * (th - c) + step_hat[k] * ((th - c) / ixi);
    }
    std::vector<std::complex<double>> back;
    fft.inv(back, rest_hat);
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = c * g.values[k] + back[k].real();
    return g.with_values(std::move(out));
}

/// Q = u^{-(n+1)/(n-1)} P(u) by conformal covariance.
inline LineFunction curvature(const LineFunction& u, int n, const ZonalSymbol& theta) {
    const double p = (n + 1.0) / (n - 1.0);
    const LineFunction pu = apply_P(u, theta);
    std::vector<double> q(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) q[k] = std::pow(u.values[k], -p) * pu.values[k];
    return u.with_values(std::move(q));
}

inline double weighted_norm(const WeightedNormSpec& spec, const NeckConfig& cfg, const LineFunction& v,
                            std::optional<double> window = std::nullopt) {
    spec.validate();
    double out = 0.0, lip = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double s = v.s(k);
        if (window && std::abs(s) > *window) continue;
        const double w = std::pow(weight(cfg, s), -spec.mu);
        out = std::max(out, w * std::abs(v.values[k]));
        if (spec.k == 1 && k + 1 < v.size()) {
            lip = std::max(lip, w * std::abs(v.values[k + 1] - v.values[k]) / v.ds);
        }
    }
    return out + lip;
}

struct CurvatureError {
    LineFunction u;
    LineFunction q;
    /// Q_eps - c.
    LineFunction q_minus_c;
    /// Q_eps minus the curvature of the unglued summand on the same side (side 1 for sbar < 0).
    LineFunction gluing_error;
    LineFunction weight;
    double window = 0.0;
    /// Weighted norm of the gluing error on the window.
    double E = 0.0;
    /// Weighted norm of Q_eps - c on the window, for reference.
    double E_literal = 0.0;
};

inline CurvatureError approximate_curvature_error(const NeckConfig& cfg, const WeightedNormSpec& norm,
                                                  const ZonalSymbol& theta = {}) {
    const GluedGeometry geo = build_geometry(cfg);
    const ZonalSymbol sym = theta ? theta : gamma_symbol(cfg.n);
    const double c = sym(0.0);
    CurvatureError out;
    out.u = geo.u();
    out.q = curvature(out.u, cfg.n, sym);
    const LineFunction q1 = curvature(geo.u1(), cfg.n, sym);
    const LineFunction q2 = curvature(geo.u2(), cfg.n, sym);
    std::vector<double> diff(out.u.size()), dc(out.u.size()), w(out.u.size());
    for (std::size_t k = 0; k < out.u.size(); ++k) {
        const double s = out.u.s(k);
        dc[k] = out.q.values[k] - c;
        diff[k] = out.q.values[k] - (s < 0.0 ? q1.values[k] : q2.values[k]);
        w[k] = weight(cfg, s);
    }
    out.q_minus_c = out.u.with_values(std::move(dc));
    out.gluing_error = out.u.with_values(std::move(diff));
    out.weight = out.u.with_values(std::move(w));
    out.window = cfg.window_half_width();
    out.E = weighted_norm(norm, cfg, out.gluing_error, out.window);
    out.E_literal = weighted_norm(norm, cfg, out.q_minus_c, out.window);
    return out;
}

struct SweepRow {
    double epsilon = 0.0;
    double delta = 0.0;
    double S = 0.0;
    double E = 0.0;
    double E_literal = 0.0;
};

inline std::vector<SweepRow> sweep(NeckConfig cfg, const std::vector<double>& epsilons, const WeightedNormSpec& norm) {
    std::vector<SweepRow> rows;
    const std::optional<double> fixed_delta = cfg.delta;
    for (double eps : epsilons) {
        cfg.epsilon = eps;
        cfg.delta = fixed_delta;
        const CurvatureError err = approximate_curvature_error(cfg, norm);
        rows.push_back({eps, cfg.chart_radius(), cfg.neck_length(), err.E, err.E_literal});
    }
    return rows;
}

/// Largest |Q_gamma - Q_extension| on the window: the covariance formula with the Gamma
/// symbol against the same formula with DtN values from the bulk extension problem.
inline double covariance_self_test(const NeckConfig& cfg) {
    const GluedGeometry geo = build_geometry(cfg);
    const LineFunction u = geo.u();
    const LineFunction qa = curvature(u, cfg.n, gamma_symbol(cfg.n));
    const LineFunction qb = curvature(u, cfg.n, extension_symbol(cfg.n));
    const double window = cfg.window_half_width();
    double worst = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (std::abs(u.s(k)) <= window) worst = std::max(worst, std::abs(qa.values[k] - qb.values[k]));
    }
    return worst;
}

} // namespace neck
} // namespace neckforge
