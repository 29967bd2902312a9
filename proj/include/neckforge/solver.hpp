#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "neckforge/errors.hpp"
#include "neckforge/extension.hpp"
#include "neckforge/gmres.hpp"
#include "neckforge/indicial.hpp"
#include "neckforge/neck.hpp"
#include "neckforge/quadrature.hpp"
#include "neckforge/symbol.hpp"

namespace neckforge {

/// Per-mode coefficient table: rows are harmonic degrees, columns are s samples.
using ModeTable = Eigen::MatrixXd;

inline constexpr double resonance_gap = 1e-3;

/// Axisymmetric functions on the periodic cylinder [-L/2, L/2) x S^{n-1}.
class CylinderBackground {
public:
    CylinderBackground(int n, double L, int m_max, int n_s)
        : n_(n), L_(L), m_max_(m_max), n_s_(n_s), basis_(0.5 * (n - 3.0), m_max) {
        if (n < 2) throw ValidationError("n", "must be >= 2");
        if (!(L > 0.0)) throw ValidationError("L", "must be positive");
        if (m_max < 0) throw ValidationError("mmax", "must be >= 0");
        if (n_s < 16 || n_s % 2 != 0) throw ValidationError("ns", "must be even and >= 16");
        const Constants k = symbol::constants(n);
        c_ = k.c;
        kappa_ = k.kappa;
        symbol_.resize(m_max + 1, n_s);
        for (int m = 0; m <= m_max; ++m) {
            const ModeSpec spec(n, 0.5, m);
            for (int j = 0; j < n_s; ++j) symbol_(m, j) = symbol::theta(spec, frequency(j));
        }
    }

    /// Default period 2 pi / tau_0 * (1 + 1/sqrt 2).
    static double default_period(int n) {
        const IndicialRoot r = indicial::first_root(ModeSpec(n, 0.5, 0));
        return 2.0 * std::numbers::pi / r.tau * (1.0 + 1.0 / std::numbers::sqrt2);
    }

    int n() const { return n_; }
    double period() const { return L_; }
    int rows() const { return m_max_ + 1; }
    int cols() const { return n_s_; }
    double c() const { return c_; }
    double kappa() const { return kappa_; }
    const quadrature::JacobiBasis& basis() const { return basis_; }

    double frequency(int j) const {
        const int k = j <= n_s_ / 2 ? j : j - n_s_;
        return 2.0 * std::numbers::pi * k / L_;
    }
    double s(int j) const { return -0.5 * L_ + L_ * j / n_s_; }
    double symbol(int m, int j) const { return symbol_(m, j); }

    Eigen::MatrixXd to_grid(const ModeTable& coef) const { return basis_.synthesize(coef); }
    ModeTable from_grid(const Eigen::MatrixXd& grid) const { return basis_.project(grid); }

    template <class F>
    ModeTable multiply(const ModeTable& coef, F&& fn) const {
        Eigen::FFT<double> fft;
        ModeTable out(coef.rows(), coef.cols());
        std::vector<double> row(n_s_);
        std::vector<std::complex<double>> spec;
        std::vector<double> back;
        for (int m = 0; m < rows(); ++m) {
            for (int j = 0; j < n_s_; ++j) row[j] = coef(m, j);
            fft.fwd(spec, row);
            for (int j = 0; j < n_s_; ++j) spec[j] *= fn(m, j);
            fft.inv(back, spec);
            for (int j = 0; j < n_s_; ++j) out(m, j) = back[j];
        }
        return out;
    }

    /// Centred neck weight with the period as neck length: cosh(s)/cosh(L/2).
    double weight(int j) const { return std::cosh(s(j)) / std::cosh(0.5 * L_); }

    ModeTable constant(double value) const {
        ModeTable t = ModeTable::Zero(rows(), cols());
        t.row(0).setConstant(value / basis_.evaluate(0.0)(0));
        return t;
    }

    /// Harmonic of degree m times cos(2 pi k s / L), normalized to unit sup on the grid.
    ModeTable mode(int m, int k, double amplitude) const {
        ModeTable t = ModeTable::Zero(rows(), cols());
        for (int j = 0; j < n_s_; ++j) t(m, j) = std::cos(2.0 * std::numbers::pi * k * s(j) / L_);
        const double peak = to_grid(t).cwiseAbs().maxCoeff();
        return t * (amplitude / peak);
    }

private:
    int n_;
    double L_;
    int m_max_;
    int n_s_;
    quadrature::JacobiBasis basis_;
    double c_ = 0.0;
    double kappa_ = 0.0;
    Eigen::MatrixXd symbol_;
};

/// Axisymmetric functions on the round boundary S^n of the flat unit ball.
class BallBackground {
public:
    BallBackground(int n, int k_max) : model_{n, k_max}, basis_(0.5 * (n - 2.0), k_max) { model_.validate(); }

    int n() const { return model_.n; }
    int rows() const { return model_.k_max + 1; }
    int cols() const { return 1; }
    double c() const { return extension::ball_curvature(model_); }
    double kappa() const { return (model_.n + 1.0) / (model_.n - 1.0) * c(); }
    double symbol(int k, int) const { return extension::dtn_ball_eigenvalue(model_, k); }
    const BallModel& model() const { return model_; }

    Eigen::MatrixXd to_grid(const ModeTable& coef) const { return basis_.synthesize(coef); }
    ModeTable from_grid(const Eigen::MatrixXd& grid) const { return basis_.project(grid); }

    template <class F>
    ModeTable multiply(const ModeTable& coef, F&& fn) const {
        ModeTable out = coef;
        for (int k = 0; k < rows(); ++k) out(k, 0) *= fn(k, 0);
        return out;
    }
    double weight(int) const { return 1.0; }

    ModeTable constant(double value) const {
        ModeTable t = ModeTable::Zero(rows(), 1);
        t(0, 0) = value / basis_.evaluate(0.0)(0);
        return t;
    }
    ModeTable mode(int k, int, double amplitude) const {
        ModeTable t = ModeTable::Zero(rows(), 1);
        t(k, 0) = 1.0;
        const double peak = to_grid(t).cwiseAbs().maxCoeff();
        return t * (amplitude / peak);
    }

private:
    BallModel model_;
    quadrature::JacobiBasis basis_;
};

namespace solver {

template <class B>
double exponent(const B& bg) {
    return (bg.n() + 1.0) / (bg.n() - 1.0);
}

template <class B>
ModeTable apply_P(const B& bg, const ModeTable& f) {
    return bg.multiply(f, [&](int m, int j) { return bg.symbol(m, j); });
}

/// Weighted sup norm of the grid values, sup w^{-mu} |g|.
template <class B>
double grid_norm(const B& bg, const ModeTable& v, double mu = 0.0) {
    const Eigen::MatrixXd g = bg.to_grid(v);
    double out = 0.0;
    for (int j = 0; j < g.cols(); ++j) {
        const double w = mu == 0.0 ? 1.0 : std::pow(bg.weight(j), -mu);
        out = std::max(out, w * g.col(j).cwiseAbs().maxCoeff());
    }
    return out;
}

template <class B>
Eigen::MatrixXd positive_grid(const B& bg, const ModeTable& f) {
    Eigen::MatrixXd g = bg.to_grid(f);
    if (!(g.minCoeff() > 0.0)) {
        std::ostringstream os;
        os << "f has minimum " << g.minCoeff() << " on the collocation grid";
        throw NonPositiveConformalFactor(os.str());
    }
    return g;
}

/// Q(f) = f^{-(n+1)/(n-1)} P f on the grid, before projection.
template <class B>
Eigen::MatrixXd apply_Q_grid(const B& bg, const ModeTable& f) {
    const Eigen::MatrixXd g = positive_grid(bg, f);
    const Eigen::MatrixXd pf = bg.to_grid(apply_P(bg, f));
    return g.array().pow(-exponent(bg)) * pf.array();
}

template <class B>
ModeTable apply_Q(const B& bg, const ModeTable& f) {
    return bg.from_grid(apply_Q_grid(bg, f));
}

/// L v = (Theta - kappa) v mode by mode.
template <class B>
ModeTable apply_linearized(const B& bg, const ModeTable& v) {
    return bg.multiply(v, [&](int m, int j) { return bg.symbol(m, j) - bg.kappa(); });
}

template <class B>
double min_symbol_gap(const B& bg) {
    double gap = std::numeric_limits<double>::infinity();
    for (int m = 0; m < bg.rows(); ++m) {
        for (int j = 0; j < bg.cols(); ++j) gap = std::min(gap, std::abs(bg.symbol(m, j) - bg.kappa()));
    }
    return gap;
}

template <class B>
void check_resonance(const B& bg) {
    const double gap = min_symbol_gap(bg);
    if (gap <= resonance_gap) {
        std::ostringstream os;
        os << "linearized symbol comes within " << gap << " of zero";
        throw ResonanceError(os.str());
    }
}

template <class B>
ModeTable solve_linearized(const B& bg, const ModeTable& h) {
    check_resonance(bg);
    return bg.multiply(h, [&](int m, int j) { return 1.0 / (bg.symbol(m, j) - bg.kappa()); });
}

/// DQ(f) w = f^{-p} P w - p f^{-p-1} (P f) w, projected.
template <class B>
ModeTable apply_jacobian(const B& bg, const ModeTable& f, const ModeTable& w) {
    const double p = exponent(bg);
    const Eigen::MatrixXd g = positive_grid(bg, f);
    const Eigen::MatrixXd pf = bg.to_grid(apply_P(bg, f));
    const Eigen::MatrixXd pw = bg.to_grid(apply_P(bg, w));
    const Eigen::MatrixXd wg = bg.to_grid(w);
    const Eigen::MatrixXd out =
        g.array().pow(-p) * pw.array() - p * g.array().pow(-p - 1.0) * pf.array() * wg.array();
    return bg.from_grid(out);
}

enum class Method { FixedPoint, Newton };

inline std::string to_string(Method m) { return m == Method::Newton ? "newton" : "fixed-point"; }

struct NewtonOptions {
    Method method = Method::FixedPoint;
    double tol = 1e-10;
    int max_iter = 60;
    double mu = 0.0;
    double gmres_tol = 1e-12;
};

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_history;
    std::vector<int> linear_iterations;
    bool converged = false;
    Method method = Method::FixedPoint;
    ModeTable final_f;
    std::string message;

    /// Consecutive ratios r_{k+1}/r_k.
    std::vector<double> linear_rates() const {
        std::vector<double> out;
        for (std::size_t k = 1; k < residual_history.size(); ++k) out.push_back(residual_history[k] / residual_history[k - 1]);
        return out;
    }
    /// Consecutive ratios r_{k+1}/r_k^2.
    std::vector<double> quadratic_constants() const {
        std::vector<double> out;
        for (std::size_t k = 1; k < residual_history.size(); ++k) {
            out.push_back(residual_history[k] / (residual_history[k - 1] * residual_history[k - 1]));
        }
        return out;
    }
};

template <class B>
ModeTable residual(const B& bg, const ModeTable& f) {
    return apply_Q(bg, f) - bg.constant(bg.c());
}

/// Solve Q(f) = c from f0: fixed point f <- f - G R(f), or Newton with GMRES preconditioned by G.
template <class B>
NewtonReport newton_solve(const B& bg, const ModeTable& f0, const NewtonOptions& opts = {}) {
    check_resonance(bg);
    NewtonReport rep;
    rep.method = opts.method;
    ModeTable f = f0;
    ModeTable r = residual(bg, f);
    rep.residual_history.push_back(grid_norm(bg, r, opts.mu));
    int growth = 0;
    const Eigen::Index rows = f.rows(), cols = f.cols();
    auto flat = [&](const ModeTable& t) { return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(t.data(), t.size())); };
    auto unflat = [&](const Eigen::VectorXd& v) { return ModeTable(Eigen::Map<const ModeTable>(v.data(), rows, cols)); };
    while (rep.residual_history.back() > opts.tol) {
        if (rep.iterations >= opts.max_iter) {
            rep.message = "iteration limit reached";
            rep.final_f = f;
            return rep;
        }
        if (opts.method == Method::FixedPoint) {
            f -= solve_linearized(bg, r);
        } else {
            const auto res = linalg::gmres(
                [&](const Eigen::VectorXd& x) { return flat(apply_jacobian(bg, f, unflat(x))); },
                [&](const Eigen::VectorXd& x) { return flat(solve_linearized(bg, unflat(x))); }, flat(-r),
                opts.gmres_tol, 60, 300);
            rep.linear_iterations.push_back(res.iterations);
            f += unflat(res.x);
        }
        ++rep.iterations;
        r = residual(bg, f);
        const double norm = grid_norm(bg, r, opts.mu);
        if (!std::isfinite(norm)) throw Diverged("residual is not finite");
        growth = norm > rep.residual_history.back() ? growth + 1 : 0;
        rep.residual_history.push_back(norm);
        if (growth >= 3) {
            std::ostringstream os;
            os << "residual grew for 3 consecutive steps (last " << norm << ")";
            throw Diverged(os.str());
        }
    }
    rep.converged = true;
    rep.final_f = f;
    rep.message = "converged";
    return rep;
}

/// Dense matrix of L in the flattened coefficient basis.
template <class B>
Eigen::MatrixXd assemble_linearized(const B& bg) {
    const Eigen::Index size = static_cast<Eigen::Index>(bg.rows()) * bg.cols();
    Eigen::MatrixXd a(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        ModeTable e = ModeTable::Zero(bg.rows(), bg.cols());
        e.data()[i] = 1.0;
        const ModeTable col = apply_linearized(bg, e);
        a.col(i) = Eigen::Map<const Eigen::VectorXd>(col.data(), size);
    }
    return a;
}

// ---------------------------------------------------------------- uniform invertibility

struct InvertibilityRow {
    double epsilon = 0.0;
    double sigma_min = 0.0;
    std::size_t window_points = 0;
};

struct InvertibilityReport {
    std::vector<InvertibilityRow> rows;
    double slope = 0.0;
    double min_sigma = 0.0;
    double max_sigma = 0.0;
    /// min over real xi of |Theta_0(xi + i mu) - kappa|: the long-neck floor.
    double essential_gap = 0.0;
};

/// Lower edge of the conjugated mode-0 symbol on the line.
inline double essential_gap(int n, double mu) {
    const ModeSpec spec(n, 0.5, 0);
    const double kappa = symbol::constants(n).kappa;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 20000; ++k) {
        const double xi = 0.0025 * k;
        best = std::min(best, std::abs(symbol::theta_analytic(spec, ComplexValue(xi, mu)) - kappa));
    }
    return best;
}

/// Circulant kernel of the multiplier `theta` on an N-point grid of step ds.
inline std::vector<double> circulant_kernel(const neck::ZonalSymbol& theta, std::size_t count, double ds) {
    std::vector<std::complex<double>> spec(count);
    for (std::size_t k = 0; k < count; ++k) spec[k] = theta(fourier::frequency(k, count, ds));
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> back;
    fft.inv(back, spec);
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = back[k].real();
    return out;
}

/// Injectivity modulus of L_eps between weighted norms on mode 0:
///   min over w supported in |sbar| <= domain_half of ||W L_eps w|| / ||W w||,
/// with L_eps w = u^{-p} P(u w) - p Q_eps w and W = diag(weight^{-mu}).
/// The range is sampled on |sbar| <= range_half > domain_half, so the matrix is tall and its
/// smallest singular value is the injectivity constant; a square truncation would instead pick
/// up the cokernel of the oscillatory mode-0 pair.
inline InvertibilityRow neck_smallest_singular_value(const NeckConfig& cfg, double mu, double domain_half,
                                                     double range_half) {
    const neck::GluedGeometry geo = neck::build_geometry(cfg);
    const LineFunction u = geo.u();
    const neck::ZonalSymbol sym = neck::gamma_symbol(cfg.n);
    const LineFunction q = neck::curvature(u, cfg.n, sym);
    const double p = (cfg.n + 1.0) / (cfg.n - 1.0);
    const std::vector<double> kernel = circulant_kernel(sym, u.size(), u.ds);
    std::vector<std::size_t> cols_idx, rows_idx;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (std::abs(u.s(k)) <= domain_half) cols_idx.push_back(k);
        if (std::abs(u.s(k)) <= range_half) rows_idx.push_back(k);
    }
    const Eigen::Index nr = static_cast<Eigen::Index>(rows_idx.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(cols_idx.size());
    Eigen::MatrixXd a(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
        const std::size_t gi = rows_idx[i];
        const double wi = std::pow(neck::weight(cfg, u.s(gi)), -mu);
        for (Eigen::Index j = 0; j < nc; ++j) {
            const std::size_t gj = cols_idx[j];
            const double wj = std::pow(neck::weight(cfg, u.s(gj)), -mu);
            const std::size_t lag = (gi + u.size() - gj) % u.size();
            double entry = std::pow(u.values[gi], -p) * kernel[lag] * u.values[gj];
            if (gi == gj) entry -= p * q.values[gi];
            a(i, j) = wi * entry / wj;
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    InvertibilityRow row;
    row.epsilon = cfg.epsilon;
    row.sigma_min = svd.singularValues()(nc - 1);
    row.window_points = cols_idx.size();
    return row;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

/// Domain: the neck proper plus `band` on each side; range: `range_margin` further out.
inline InvertibilityReport uniform_invertibility_study(NeckConfig cfg, const std::vector<double>& eps_list, double mu,
                                                       double band = 0.0, double range_margin = 4.0) {
    const double lo = -(cfg.n - 1) / 2.0;
    if (!(mu > lo && mu < 0.0)) throw ValidationError("mu", "must lie in (-(n-1)/2, 0)");
    InvertibilityReport rep;
    std::vector<double> xs, ys;
    const std::optional<double> fixed_delta = cfg.delta;
    for (double eps : eps_list) {
        cfg.epsilon = eps;
        cfg.delta = fixed_delta;
        const InvertibilityRow row = neck_smallest_singular_value(cfg, mu, 0.5 * cfg.neck_length() + band,
                                                                     0.5 * cfg.neck_length() + band + range_margin);
        rep.rows.push_back(row);
        xs.push_back(eps);
        ys.push_back(row.sigma_min);
    }
    rep.slope = loglog_slope(xs, ys);
    rep.min_sigma = *std::min_element(ys.begin(), ys.end());
    rep.max_sigma = *std::max_element(ys.begin(), ys.end());
    rep.essential_gap = essential_gap(cfg.n, mu);
    return rep;
}

} // namespace solver
} // namespace neckforge
