#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neckforge/errors.hpp"
#include "neckforge/indicial.hpp"
#include "neckforge/line_function.hpp"
#include "neckforge/symbol.hpp"

namespace neckforge {

/// Exponential rates of a right-hand side: O(e^{-delta s}) at +inf, O(e^{delta0 s}) at -inf.
struct DecayProfile {
    double delta = 1.0;
    double delta0 = 1.0;
};

struct Diagnostics {
    std::vector<std::string> warnings;
    void warn(std::string w) { warnings.push_back(std::move(w)); }
};

namespace modegreen {

inline constexpr double alias_energy_threshold = 0.01;

/// Theta_m(xi) - kappa continued to complex xi.
inline ComplexValue shifted_symbol(const ModeSpec& spec, double kappa, ComplexValue xi) {
    if (xi.imag() == 0.0) return symbol::theta(spec, xi.real()) - kappa;
    return symbol::theta_analytic(spec, xi) - kappa;
}

/// L_0^{(m)} v = P^{(m)} v - kappa v as a discrete Fourier multiplier.
/// With beta != 0 the multiplier is applied after conjugation by e^{beta s}, which is how
/// exponentially growing or decaying inputs are made periodic.
inline LineFunction apply_L0(const ModeSpec& spec, const LineFunction& v, double kappa, double beta = 0.0,
                             Diagnostics* diag = nullptr) {
    if (diag) {
        const double frac = fourier::top_band_energy_fraction(v);
        if (frac > alias_energy_threshold) {
            std::ostringstream os;
            os << "AliasWarning: top frequency decade carries " << frac * 100.0 << "% of the energy";
            diag->warn(os.str());
        }
    }
    return fourier::apply_multiplier(
        v, [&](ComplexValue xi) { return shifted_symbol(spec, kappa, xi); }, beta);
}

inline double mode0_sine_coefficient(const ModeSpec& spec, double kappa) {
    if (spec.m != 0) throw DegenerateSpec("the sine kernel exists only for m = 0");
    const IndicialRoot r = indicial::first_root(spec, kappa);
    return 2.0 / std::abs(symbol::theta_analytic_derivative(spec, ComplexValue(r.tau, 0.0)));
}

/// Roots needed to resolve every gap below `rate`.
inline RootCatalog catalog_covering(const ModeSpec& spec, double kappa, double rate, int j_min = 6) {
    const int j_max = std::max(j_min, static_cast<int>(std::ceil(std::max(rate, 0.0) / 2.0)) + 1);
    return indicial::find_roots_robust(spec, indicial::default_box(spec, j_max), 1e-11, kappa);
}

/// Signed exponential rates e^{r s} of the homogeneous solutions: {±sigma_j}.
inline std::vector<double> signed_rates(const RootCatalog& cat) {
    std::vector<double> out;
    for (const auto& r : cat.roots) {
        out.push_back(r.sigma);
        if (r.sigma != 0.0) out.push_back(-r.sigma);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              out.end());
    return out;
}

/// Contour shift beta for a decay profile, inside
/// (max(-delta0, largest indicial rate below delta), delta).
/// The conjugation e^{beta s} amplifies round-off by e^{|beta| L/2}, so beta is taken as close
/// to zero as a margin of min(w/10, 1/4) from both ends of the interval allows.
inline double choose_beta(const RootCatalog& cat, const DecayProfile& profile) {
    const double gap_tol = 1e-8;
    if (!std::isfinite(profile.delta) || !std::isfinite(profile.delta0)) throw ResonanceError("non-finite decay rates");
    if (profile.delta + profile.delta0 < 0.0) {
        throw ResonanceError("delta + delta0 < 0: no strip of analyticity for the right-hand side");
    }
    const auto rates = signed_rates(cat);
    double below = -std::numeric_limits<double>::infinity();
    for (double r : rates) {
        if (std::abs(r - profile.delta) < gap_tol) {
            std::ostringstream os;
            os << "declared rate delta = " << profile.delta << " coincides with an indicial root";
            throw ResonanceError(os.str());
        }
        if (r < profile.delta) below = std::max(below, r);
    }
    const double lo = std::max(-profile.delta0, below);
    if (!(lo < profile.delta - gap_tol)) {
        std::ostringstream os;
        os << "no admissible contour in (" << lo << ", " << profile.delta << ")";
        throw ResonanceError(os.str());
    }
    const double margin = std::min(0.1 * (profile.delta - lo), 0.25);
    return std::clamp(0.0, lo + margin, profile.delta - margin);
}

/// Block-maximum fit of the exponential decay rate of |f| over the outer quarter of one side.
/// Returns nullopt when the tail is already at round-off level.
inline std::optional<double> tail_rate(const LineFunction& f, bool right_side) {
    const std::size_t n = f.size();
    const double peak = sup_norm(f.values);
    if (peak == 0.0) return std::nullopt;
    const std::size_t quarter = n / 4;
    const std::size_t start = right_side ? n - quarter : 0;
    constexpr int blocks = 8;
    const std::size_t blen = std::max<std::size_t>(1, quarter / blocks);
    std::vector<double> xs, ys;
    for (int b = 0; b < blocks; ++b) {
        const std::size_t lo = start + b * blen;
        const std::size_t hi = std::min(lo + blen, n);
        double bm = 0.0;
        for (std::size_t k = lo; k < hi; ++k) bm = std::max(bm, std::abs(f.values[k]));
        if (bm > 1e-12 * peak) {
            xs.push_back(f.s((lo + hi) / 2));
            ys.push_back(std::log(bm));
        }
    }
    if (xs.size() < 4) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= xs.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    return right_side ? -slope : slope;
}

struct GreenOptions {
    std::optional<double> beta;
    std::optional<RootCatalog> catalog;
    bool check_tail = true;
};

struct GreenResult {
    LineFunction v;
    double beta = 0.0;
    Diagnostics diagnostics;
};

/// Particular solution of L_0^{(m)} v = h with the decay dictated by `profile`.
///
/// The m = 0 real zeros +-tau_0 are handled by the contour choice beta > 0, which reproduces
/// the causal sine kernel d_0 sin(tau_0 s) on s < 0.
inline GreenResult green_solve_detailed(const ModeSpec& spec, const LineFunction& h, const DecayProfile& profile,
                                        const GreenOptions& opts = {}) {
    const double kappa = symbol::constants(spec.n, spec.gamma).kappa;
    GreenResult out;
    if (sup_norm(h.values) == 0.0) {
        out.v = h.with_values(std::vector<double>(h.size(), 0.0));
        return out;
    }
    if (opts.check_tail) {
        if (auto r = tail_rate(h, true); r && *r < 0.9 * profile.delta - 1e-3) {
            std::ostringstream os;
            os << "right tail decays at rate " << *r << ", declared " << profile.delta;
            throw TailMismatch(os.str());
        }
        if (auto r = tail_rate(h, false); r && *r < 0.9 * profile.delta0 - 1e-3) {
            std::ostringstream os;
            os << "left tail decays at rate " << *r << ", declared " << profile.delta0;
            throw TailMismatch(os.str());
        }
    }
    const RootCatalog cat = opts.catalog ? *opts.catalog : catalog_covering(spec, kappa, profile.delta);
    out.beta = opts.beta ? *opts.beta : choose_beta(cat, profile);
    double min_abs = std::numeric_limits<double>::infinity();
    out.v = fourier::apply_multiplier(
        h,
        [&](ComplexValue xi) {
            const ComplexValue d = shifted_symbol(spec, kappa, xi);
            min_abs = std::min(min_abs, std::abs(d));
            return 1.0 / d;
        },
        out.beta);
    if (!(min_abs > 1e-12)) throw ResonanceError("shifted symbol vanishes on the grid contour");
    // e^{beta s} h must be negligible at the grid ends for the periodic transform.
    const double sc = h.centre();
    const double ends = std::max(std::abs(std::exp(out.beta * (h.s(0) - sc)) * h.values.front()),
                                 std::abs(std::exp(out.beta * (h.s(h.size() - 1) - sc)) * h.values.back()));
    double peak = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) peak = std::max(peak, std::abs(std::exp(out.beta * (h.s(k) - sc)) * h.values[k]));
    if (ends > 1e-10 * peak) out.diagnostics.warn("shifted right-hand side is not negligible at the grid ends");
    return out;
}

inline LineFunction green_solve(const ModeSpec& spec, const LineFunction& h, const DecayProfile& profile,
                                const GreenOptions& opts = {}) {
    return green_solve_detailed(spec, h, profile, opts).v;
}

/// Kernel of the shifted-contour inverse: response to a unit mass at s = 0.
inline LineFunction synthesize_kernel(const ModeSpec& spec, double half_width, std::size_t count, double beta) {
    const double kappa = symbol::constants(spec.n, spec.gamma).kappa;
    LineFunction delta = LineFunction::on_interval(-half_width, half_width, count, spec.m);
    delta.values[count / 2] = 1.0 / delta.ds;
    return fourier::apply_multiplier(
        delta, [&](ComplexValue xi) { return 1.0 / shifted_symbol(spec, kappa, xi); }, beta);
}

/// Residue series of the kernel along Im xi = beta, using roots j >= first_j of the catalog.
/// Each root contributes its images +-tau +- i sigma on the side of the contour fixed by sign(s).
inline double residue_kernel(const ModeSpec& spec, const RootCatalog& cat, double beta, double s, int first_j = 0) {
    if (s == 0.0) return std::numeric_limits<double>::quiet_NaN();
    ComplexValue total(0.0, 0.0);
    for (const auto& r : cat.roots) {
        if (r.j < first_j) continue;
        std::vector<ComplexValue> images = {{r.tau, -r.sigma}, {-r.tau, -r.sigma}, {r.tau, r.sigma}, {-r.tau, r.sigma}};
        std::sort(images.begin(), images.end(),
                  [](ComplexValue a, ComplexValue b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
        images.erase(std::unique(images.begin(), images.end()), images.end());
        for (ComplexValue z : images) {
            const bool above = z.imag() > beta;
            if ((s > 0.0) != above) continue;
            const ComplexValue d = symbol::theta_analytic_derivative(spec, z);
            const ComplexValue term = std::exp(ComplexValue(0.0, 1.0) * z * s) / d;
            total += (s > 0.0 ? ComplexValue(0.0, 1.0) : ComplexValue(0.0, -1.0)) * term;
        }
    }
    return total.real();
}

/// Magnitude of the first omitted term of the residue series at |s|.
inline double residue_truncation_estimate(const ModeSpec& spec, double kappa, int j_next, double s) {
    const RootCatalog cat = indicial::find_roots_robust(spec, indicial::default_box(spec, j_next), 1e-10, kappa);
    for (const auto& r : cat.roots) {
        if (r.j == j_next) return 2.0 * std::exp(-r.sigma * std::abs(s)) / std::abs(r.dtheta);
    }
    return 0.0;
}

// ---------------------------------------------------------------- homogeneous solutions

struct BasisElement {
    LineFunction samples;
    double sigma = 0.0;
    double tau = 0.0;
    /// -1 decaying e^{-sigma s}, +1 growing e^{+sigma s}, 0 purely oscillatory.
    int sign = 0;
    bool sine = false;

    double value(double s) const {
        const double osc = sine ? std::sin(tau * s) : std::cos(tau * s);
        return std::exp(sign * sigma * s) * osc;
    }
    /// Log of the envelope e^{sign sigma s} (avoids overflow in scaled fits).
    double log_envelope(double s) const { return sign * sigma * s; }
    /// Conjugation shift that makes the element periodic on its own grid.
    double periodizing_beta() const { return -sign * sigma; }
    std::string label() const {
        std::ostringstream os;
        if (sign != 0) os << "exp(" << (sign > 0 ? "+" : "-") << sigma << " s)";
        if (tau != 0.0) os << (sign != 0 ? "*" : "") << (sine ? "sin(" : "cos(") << tau << " s)";
        if (sign == 0 && tau == 0.0) os << "1";
        return os.str();
    }
};

/// Symbolic basis (no samples) of the homogeneous solutions with roots j <= j_max.
inline std::vector<BasisElement> basis_functions(const RootCatalog& cat, int j_max) {
    std::vector<BasisElement> out;
    for (const auto& r : cat.roots) {
        if (r.j > j_max) continue;
        std::vector<int> signs = r.sigma == 0.0 ? std::vector<int>{0} : std::vector<int>{-1, +1};
        for (int sg : signs) {
            BasisElement e;
            e.sigma = r.sigma;
            e.tau = r.tau;
            e.sign = sg;
            out.push_back(e);
            if (r.tau != 0.0) {
                e.sine = true;
                out.push_back(e);
            }
        }
    }
    // sin first for the oscillatory mode-0 pair
    std::stable_sort(out.begin(), out.end(), [](const BasisElement& a, const BasisElement& b) {
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.sine > b.sine;
    });
    return out;
}

/// Sampled homogeneous basis. Each element gets its own grid of about `window` length,
/// resonant to its frequency so the periodic multiplier sees it exactly.
inline std::vector<BasisElement> homogeneous_basis(const ModeSpec& spec, const RootCatalog& cat, int j_max,
                                                   double window = 60.0, std::size_t count = 4096) {
    int max_j = -1;
    for (const auto& r : cat.roots) max_j = std::max(max_j, r.j);
    if (max_j < j_max) throw NonConvergence("catalog does not cover j_max");
    auto out = basis_functions(cat, j_max);
    for (auto& e : out) {
        double length = window;
        if (e.tau > 0.0) {
            const double period = 2.0 * std::numbers::pi / e.tau;
            length = std::max(1.0, std::round(window / period)) * period;
        }
        e.samples = LineFunction::sample(-0.5 * length, 0.5 * length, count, [&](double s) { return e.value(s); },
                                         spec.m);
    }
    return out;
}

/// Relative residual of L_0 on the interior half of a sampled basis element.
inline double annihilation_residual(const ModeSpec& spec, const BasisElement& e) {
    const double kappa = symbol::constants(spec.n, spec.gamma).kappa;
    const LineFunction r = apply_L0(spec, e.samples, kappa, e.periodizing_beta());
    return interior_sup(r) / interior_sup(e.samples);
}

/// Least-squares coefficients of v against the basis, with column scaling.
inline std::vector<double> fit_homogeneous(const LineFunction& v, const std::vector<BasisElement>& basis) {
    const Eigen::Index rows = static_cast<Eigen::Index>(v.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) b(i) = v.values[i];
    std::vector<double> scale(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = basis[j].value(v.s(i));
        scale[j] = a.col(j).norm();
        if (scale[j] > 0.0) a.col(j) /= scale[j];
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    std::vector<double> out(cols);
    for (Eigen::Index j = 0; j < cols; ++j) out[j] = scale[j] > 0.0 ? x(j) / scale[j] : 0.0;
    return out;
}

// ---------------------------------------------------------------- growth classification

enum class Verdict { Trivial, NonAdmissible, AdmissibleNontrivial };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Trivial: return "trivial";
        case Verdict::NonAdmissible: return "non-admissible";
        case Verdict::AdmissibleNontrivial: return "admissible-nontrivial";
    }
    return "?";
}

/// Shape of the growth bound |v(s)| <= C w(s).
enum class BoundShape { Symmetric, Right, Left };

inline double log_weight(BoundShape shape, double mu, double s) {
    switch (shape) {
        case BoundShape::Symmetric: return mu * std::abs(s);
        case BoundShape::Right: return mu * s;
        case BoundShape::Left: return -mu * s;
    }
    return 0.0;
}

struct GrowthReport {
    Verdict verdict = Verdict::Trivial;
    double sup = 0.0;
    double core_constant = 0.0;
    double worst_ratio = 0.0;
};

inline void check_mu(const ModeSpec& spec, double mu, const RootCatalog* cat) {
    const double lo = -(spec.n - 1) / 2.0;
    if (!(mu > lo && mu < 0.0)) {
        std::ostringstream os;
        os << "mu = " << mu << " outside (" << lo << ", 0)";
        throw ValidationError("mu", os.str());
    }
    if (cat && spec.m >= 1) {
        for (const auto& r : cat->roots) {
            if (r.j == 0 && std::abs(mu + r.sigma) < 1e-9) throw ValidationError("mu", "mu equals -sigma_0^(m)");
        }
    }
}

/// Window must span four e-folding lengths of the slowest |mu| - sigma gap.
inline void check_window(double half_window, double mu, const std::vector<double>& sigmas) {
    double gap = std::abs(mu);
    for (double s : sigmas) gap = std::min(gap, std::abs(std::abs(mu) - s));
    if (gap <= 0.0 || half_window < 4.0 / gap) {
        std::ostringstream os;
        os << "half window " << half_window << " < 4 / " << gap;
        throw WindowTooShort(os.str());
    }
}

/// Trivial if sup|v| <= tol; otherwise admissible iff |v| e^{-mu-weight} stays within 10x of
/// its value on the core |s| <= 1.
inline GrowthReport classify_growth(const LineFunction& v, double mu, double tol = 1e-8,
                                    BoundShape shape = BoundShape::Symmetric,
                                    const std::vector<double>& sigmas = {}) {
    GrowthReport rep;
    rep.sup = sup_norm(v.values);
    if (rep.sup <= tol) {
        rep.verdict = Verdict::Trivial;
        return rep;
    }
    check_window(std::max(0.0, std::min(v.s(v.size() - 1), -v.s(0))), mu, sigmas);
    double core = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double s = v.s(k);
        const double ratio = std::abs(v.values[k]) * std::exp(-log_weight(shape, mu, s));
        if (std::abs(s) <= 1.0) core = std::max(core, ratio);
        worst = std::max(worst, ratio);
    }
    rep.core_constant = core;
    rep.worst_ratio = worst;
    rep.verdict = worst <= 10.0 * std::max(core, tol) ? Verdict::AdmissibleNontrivial : Verdict::NonAdmissible;
    return rep;
}

struct LiouvilleBound {
    double max_coefficient = 0.0;
    double sigma_min = 0.0;
    std::size_t basis_size = 0;
};

/// Largest coefficient any homogeneous combination can carry while obeying |v| <= e^{mu ...}
/// on [-half_window, half_window]. Columns are normalized with b(0) = 1.
inline LiouvilleBound liouville_coefficient_bound(const ModeSpec& spec, const RootCatalog& cat, int j_max, double mu,
                                                  BoundShape shape, double half_window, std::size_t samples = 4001) {
    check_mu(spec, mu, &cat);
    check_window(half_window, mu, cat.sigmas());
    const auto basis = basis_functions(cat, j_max);
    const Eigen::Index rows = static_cast<Eigen::Index>(samples);
    const Eigen::Index cols = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd a(rows, cols);
    std::vector<double> log_norm(cols);
    const double ds = 2.0 * half_window / static_cast<double>(samples - 1);
    for (Eigen::Index j = 0; j < cols; ++j) {
        // weighted column e^{log_env - log_weight} * osc, scaled by its maximum exponent
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double s = -half_window + ds * i;
            top = std::max(top, basis[j].log_envelope(s) - log_weight(shape, mu, s));
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double s = -half_window + ds * i;
            const double osc = basis[j].sine ? std::sin(basis[j].tau * s) : std::cos(basis[j].tau * s);
            a(i, j) = std::exp(basis[j].log_envelope(s) - log_weight(shape, mu, s) - top) * osc;
        }
        const double nrm = a.col(j).norm();
        a.col(j) /= nrm;
        log_norm[j] = top + std::log(nrm);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    LiouvilleBound out;
    out.basis_size = basis.size();
    out.sigma_min = svd.singularValues()(cols - 1);
    if (!(out.sigma_min > 0.0)) {
        out.max_coefficient = std::numeric_limits<double>::infinity();
        return out;
    }
    // |c_j| <= sqrt(rows) / (sigma_min * D_j) when sup|W v| <= 1; the sine column has b(0) = 0
    // so it is normalized at its first extremum instead, which has unit magnitude as well.
    double worst = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double log_bound = 0.5 * std::log(static_cast<double>(rows)) - std::log(out.sigma_min) - log_norm[j];
        worst = std::max(worst, std::exp(log_bound));
    }
    out.max_coefficient = worst;
    return out;
}

} // namespace modegreen
} // namespace neckforge
