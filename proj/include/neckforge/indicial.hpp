#pragma once

// Indicial roots of L_0^{(m)} = P^{(m)} - kappa on the line.
//
// A homogeneous solution e^{lambda s} exists iff F(lambda) = Theta_m(-i lambda) - kappa = 0.
// F is even and real on both axes, so roots come as +-sigma +- i tau and the
// catalog stores the representative with sigma, tau >= 0. Roots are located by
// argument-principle subdivision of the box reflected across the axes it
// touches, then polished with Newton.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "neckforge/errors.hpp"
#include "neckforge/symbol.hpp"

namespace neckforge {

/// Axis-aligned rectangle in the (sigma, tau) plane.
struct Box {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double tau_min = 0.0;
    double tau_max = 0.0;

    double width() const { return sigma_max - sigma_min; }
    double height() const { return tau_max - tau_min; }
    bool contains(ComplexValue lambda, double slack = 0.0) const {
        return lambda.real() >= sigma_min - slack && lambda.real() <= sigma_max + slack &&
               lambda.imag() >= tau_min - slack && lambda.imag() <= tau_max + slack;
    }
};

struct IndicialRoot {
    int m = 0;
    int j = 0;
    double sigma = 0.0;
    double tau = 0.0;
    /// d Theta_m / d zeta at zeta = -i (sigma + i tau).
    ComplexValue dtheta{0.0, 0.0};

    ComplexValue lambda() const { return {sigma, tau}; }
};

struct RootCatalog {
    ModeSpec spec;
    double kappa = 0.0;
    std::vector<IndicialRoot> roots;
    Box search_box;
    /// Zero count of F over the reflected box, from the winding number plus the known poles.
    int certified_count = 0;
    /// Roots found over the reflected box (all symmetric images).
    int found_count = 0;
    /// Sub-boxes that kept a winding number > 1 down to the minimum size.
    int multiplicity_flags = 0;

    std::vector<double> sigmas() const {
        std::vector<double> out;
        for (const auto& r : roots) out.push_back(r.sigma);
        return out;
    }
};

namespace indicial {

/// F(lambda) = Theta_m(-i lambda) - kappa.
inline ComplexValue characteristic(const ModeSpec& spec, double kappa, ComplexValue lambda) {
    return symbol::theta_analytic(spec, ComplexValue(0.0, -1.0) * lambda) - kappa;
}

inline ComplexValue characteristic_derivative(const ModeSpec& spec, ComplexValue lambda) {
    return ComplexValue(0.0, -1.0) * symbol::theta_analytic_derivative(spec, ComplexValue(0.0, -1.0) * lambda);
}

/// Real lambda where F has poles: +-(2A + 2k).
inline std::vector<double> pole_locations(const ModeSpec& spec, double max_abs) {
    std::vector<double> poles;
    for (int k = 0;; ++k) {
        const double p = 2.0 * spec.A() + 2.0 * k;
        if (p > max_abs) break;
        poles.push_back(p);
        poles.push_back(-p);
    }
    return poles;
}

namespace detail {

inline constexpr double max_segment = 0.05;
inline constexpr double max_phase_step = std::numbers::pi / 4.0;
inline constexpr int max_depth = 40;

struct ContourContext {
    const ModeSpec& spec;
    double kappa;
    double near_zero;  // |F| below this on the contour means it runs through a root

    ComplexValue eval(ComplexValue lambda) const {
        ComplexValue value;
        try {
            value = characteristic(spec, kappa, lambda);
        } catch (const PoleError&) {
            std::ostringstream os;
            os << "contour passes through a pole at lambda = " << lambda;
            throw ContourThroughRoot(os.str());
        }
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
            std::ostringstream os;
            os << "contour passes through a pole at lambda = " << lambda;
            throw ContourThroughRoot(os.str());
        }
        if (std::abs(value) < near_zero) {
            std::ostringstream os;
            os << "contour passes through a root near lambda = " << lambda;
            throw ContourThroughRoot(os.str());
        }
        return value;
    }

    double segment_phase(ComplexValue a, ComplexValue fa, ComplexValue b, ComplexValue fb, int depth) const {
        const double dphi = std::arg(fb / fa);
        if (std::abs(dphi) <= max_phase_step || depth >= max_depth) {
            if (depth >= max_depth) {
                std::ostringstream os;
                os << "phase unresolved near lambda = " << a;
                throw ContourThroughRoot(os.str());
            }
            return dphi;
        }
        const ComplexValue mid = 0.5 * (a + b);
        const ComplexValue fm = eval(mid);
        return segment_phase(a, fa, mid, fm, depth + 1) + segment_phase(mid, fm, b, fb, depth + 1);
    }

    double edge_phase(ComplexValue a, ComplexValue b) const {
        const int pieces = std::max(4, static_cast<int>(std::ceil(std::abs(b - a) / max_segment)));
        double total = 0.0;
        ComplexValue prev = a;
        ComplexValue fprev = eval(a);
        for (int k = 1; k <= pieces; ++k) {
            const ComplexValue next = a + (b - a) * (static_cast<double>(k) / pieces);
            const ComplexValue fnext = eval(next);
            total += segment_phase(prev, fprev, next, fnext, 0);
            prev = next;
            fprev = fnext;
        }
        return total;
    }
};

} // namespace detail

/// Winding number of F around the boundary of `box` (counter-clockwise).
inline int winding_number(const ModeSpec& spec, double kappa, const Box& box, double near_zero = 1e-9) {
    const detail::ContourContext ctx{spec, kappa, near_zero};
    const ComplexValue c0(box.sigma_min, box.tau_min), c1(box.sigma_max, box.tau_min);
    const ComplexValue c2(box.sigma_max, box.tau_max), c3(box.sigma_min, box.tau_max);
    const double total = ctx.edge_phase(c0, c1) + ctx.edge_phase(c1, c2) + ctx.edge_phase(c2, c3) +
                         ctx.edge_phase(c3, c0);
    const double turns = total / (2.0 * std::numbers::pi);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 1e-3) {
        std::ostringstream os;
        os << "non-integer winding " << turns;
        throw ContourThroughRoot(os.str());
    }
    return static_cast<int>(rounded);
}

/// Poles of F strictly inside `box`; throws if one sits on the boundary.
inline int poles_inside(const ModeSpec& spec, const Box& box) {
    if (box.tau_min > 0.0 || box.tau_max < 0.0) return 0;
    const double reach = std::max(std::abs(box.sigma_min), std::abs(box.sigma_max)) + 1.0;
    int count = 0;
    for (double p : pole_locations(spec, reach)) {
        const bool on_vertical = std::abs(p - box.sigma_min) < 1e-9 || std::abs(p - box.sigma_max) < 1e-9;
        const bool on_horizontal = (std::abs(box.tau_min) < 1e-12 || std::abs(box.tau_max) < 1e-12) &&
                                   p >= box.sigma_min && p <= box.sigma_max;
        if (on_vertical || on_horizontal) {
            std::ostringstream os;
            os << "box boundary passes through the pole lambda = " << p;
            throw ContourThroughRoot(os.str());
        }
        if (p > box.sigma_min && p < box.sigma_max) ++count;
    }
    return count;
}

/// Number of zeros of F inside `box`.
inline int zero_count(const ModeSpec& spec, double kappa, const Box& box) {
    return winding_number(spec, kappa, box) + poles_inside(spec, box);
}

/// Newton iteration on F; returns nullopt if it stalls or leaves `region`.
inline std::optional<ComplexValue> newton_polish(const ModeSpec& spec, double kappa, ComplexValue start, double tol,
                                                 const Box* region = nullptr, int max_iter = 50) {
    ComplexValue lambda = start;
    for (int it = 0; it < max_iter; ++it) {
        ComplexValue f, df;
        try {
            f = characteristic(spec, kappa, lambda);
            df = characteristic_derivative(spec, lambda);
        } catch (const PoleError&) {
            return std::nullopt;
        }
        if (!std::isfinite(std::abs(f)) || !std::isfinite(std::abs(df)) || std::abs(df) == 0.0) return std::nullopt;
        const ComplexValue step = f / df;
        lambda -= step;
        if (region && !region->contains(lambda, 1e-9)) return std::nullopt;
        if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(lambda))) {
            const double residual = std::abs(characteristic(spec, kappa, lambda));
            if (residual <= tol) return lambda;
            return std::nullopt;
        }
    }
    const double residual = std::abs(characteristic(spec, kappa, lambda));
    if (residual <= tol) return lambda;
    return std::nullopt;
}

namespace detail {

struct Subdivider {
    const ModeSpec& spec;
    double kappa;
    double tol;
    std::vector<ComplexValue> found;
    int multiplicity_flags = 0;

    static constexpr double newton_size = 0.25;
    static constexpr double min_size = 1e-7;

    // Split fractions tried in turn when a cut runs through a root or pole.
    static constexpr double split_fractions[] = {0.4871, 0.5317, 0.4409, 0.5683, 0.3911};

    void process(const Box& box, int count, int depth = 0) {
        if (count <= 0) return;
        const double size = std::max(box.width(), box.height());
        if (count == 1 && size <= newton_size) {
            const ComplexValue centre(0.5 * (box.sigma_min + box.sigma_max), 0.5 * (box.tau_min + box.tau_max));
            if (auto root = newton_polish(spec, kappa, centre, tol, &box)) {
                found.push_back(*root);
                return;
            }
        }
        if (size <= min_size || depth > 200) {
            if (count > 1) ++multiplicity_flags;
            const ComplexValue centre(0.5 * (box.sigma_min + box.sigma_max), 0.5 * (box.tau_min + box.tau_max));
            auto root = newton_polish(spec, kappa, centre, tol);
            if (!root) throw NonConvergence("Newton stalled inside a certified sub-box");
            for (int k = 0; k < count; ++k) found.push_back(*root);
            return;
        }
        for (double fraction : split_fractions) {
            Box first = box, second = box;
            if (box.width() >= box.height()) {
                const double cut = box.sigma_min + fraction * box.width();
                first.sigma_max = cut;
                second.sigma_min = cut;
            } else {
                const double cut = box.tau_min + fraction * box.height();
                first.tau_max = cut;
                second.tau_min = cut;
            }
            int n1 = 0, n2 = 0;
            try {
                n1 = zero_count(spec, kappa, first);
                n2 = zero_count(spec, kappa, second);
            } catch (const ContourThroughRoot&) {
                continue;
            }
            if (n1 + n2 != count) continue;
            process(first, n1, depth + 1);
            process(second, n2, depth + 1);
            return;
        }
        throw ContourThroughRoot("could not find a clean cut while subdividing");
    }
};

inline double snap_zero(double x, double scale) { return std::abs(x) < 1e-9 * std::max(1.0, scale) ? 0.0 : x; }

} // namespace detail

/// Every indicial root in `box` (sigma, tau >= 0 quarter plane).
///
/// The box is reflected across any axis it touches so that roots on the axes are
/// interior points of the contour. Throws ContourThroughRoot if the outer
/// contour is singular; the caller should perturb the box.
inline RootCatalog find_roots(const ModeSpec& spec, const Box& box, double tol,
                              std::optional<double> kappa_override = std::nullopt) {
    if (!(tol > 1e-12 && tol < 1e-4)) throw NonConvergence("tolerance must lie in (1e-12, 1e-4)");
    if (box.sigma_min < 0.0 || box.tau_min < 0.0 || box.width() <= 0.0 || box.height() <= 0.0) {
        throw DegenerateSpec("search box must be a non-empty rectangle in the quarter plane");
    }
    const double kappa = kappa_override.value_or(symbol::constants(spec.n, spec.gamma).kappa);

    Box outer = box;
    if (box.sigma_min == 0.0) outer.sigma_min = -box.sigma_max;
    if (box.tau_min == 0.0) outer.tau_min = -box.tau_max;

    const int total = zero_count(spec, kappa, outer);
    detail::Subdivider sub{spec, kappa, tol, {}, 0};
    sub.process(outer, total);

    RootCatalog catalog;
    catalog.spec = spec;
    catalog.kappa = kappa;
    catalog.search_box = box;
    catalog.certified_count = total;
    catalog.found_count = static_cast<int>(sub.found.size());
    catalog.multiplicity_flags = sub.multiplicity_flags;

    for (ComplexValue lambda : sub.found) {
        const double scale = std::abs(lambda);
        const double sigma = detail::snap_zero(lambda.real(), scale);
        const double tau = detail::snap_zero(lambda.imag(), scale);
        if (sigma < 0.0 || tau < 0.0) continue;
        if (sigma < box.sigma_min || sigma > box.sigma_max || tau < box.tau_min || tau > box.tau_max) continue;
        IndicialRoot root;
        root.m = spec.m;
        root.sigma = sigma;
        root.tau = tau;
        root.dtheta = symbol::theta_analytic_derivative(spec, ComplexValue(tau, -sigma));
        catalog.roots.push_back(root);
    }
    std::sort(catalog.roots.begin(), catalog.roots.end(), [](const IndicialRoot& a, const IndicialRoot& b) {
        return a.sigma != b.sigma ? a.sigma < b.sigma : a.tau < b.tau;
    });
    // collapse duplicates (a root on an axis is reached from both halves)
    std::vector<IndicialRoot> unique;
    for (const auto& r : catalog.roots) {
        if (!unique.empty() && std::abs(unique.back().lambda() - r.lambda()) < 1e3 * tol) continue;
        unique.push_back(r);
    }
    for (std::size_t k = 0; k < unique.size(); ++k) unique[k].j = static_cast<int>(k);
    catalog.roots = std::move(unique);
    return catalog;
}

namespace detail {

template <class F>
double bracket_root(F f, double lo, double hi) {
    std::uintmax_t iterations = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iterations);
    return 0.5 * (a + b);
}

} // namespace detail

/// The first indicial root: purely oscillatory for m = 0, real for m >= 1.
inline IndicialRoot first_root(const ModeSpec& spec, std::optional<double> kappa_override = std::nullopt) {
    const double kappa = kappa_override.value_or(symbol::constants(spec.n, spec.gamma).kappa);
    IndicialRoot root;
    root.m = spec.m;
    root.j = 0;
    if (spec.m == 0) {
        // Theta_0 increases on the real axis from c < kappa.
        auto g = [&](double xi) { return symbol::theta(spec, xi) - kappa; };
        if (g(0.0) >= 0.0) throw NonConvergence("Theta_0(0) >= kappa: no oscillatory root");
        double hi = 1.0;
        while (g(hi) < 0.0) {
            hi *= 2.0;
            if (hi > 1e6) throw NonConvergence("no sign change of Theta_0 - kappa on the real axis");
        }
        root.sigma = 0.0;
        root.tau = detail::bracket_root(g, 0.0, hi);
    } else {
        // Theta_m(-i sigma) is real on (0, 2B) and vanishes at 2B.
        auto g = [&](double sigma) { return characteristic(spec, kappa, ComplexValue(sigma, 0.0)).real(); };
        const double end = 2.0 * spec.B();
        constexpr int samples = 400;
        double prev_x = 0.0, prev_g = g(0.0);
        bool bracketed = false;
        double lo = 0.0, hi = 0.0;
        for (int k = 1; k < samples; ++k) {
            const double x = end * k / samples;
            const double gx = g(x);
            if (prev_g == 0.0) {
                lo = hi = prev_x;
                bracketed = true;
                break;
            }
            if ((prev_g > 0.0) != (gx > 0.0)) {
                lo = prev_x;
                hi = x;
                bracketed = true;
                break;
            }
            prev_x = x;
            prev_g = gx;
        }
        if (!bracketed) throw NonConvergence("no real indicial root in (0, 2B)");
        root.sigma = lo == hi ? lo : detail::bracket_root(g, lo, hi);
        root.tau = 0.0;
    }
    root.dtheta = symbol::theta_analytic_derivative(spec, ComplexValue(root.tau, -root.sigma));
    return root;
}

/// Default search box for the first `j_max + 1` roots of a mode.
///
/// The right edge sits strictly between the poles of F so the outer contour is regular.
inline Box default_box(const ModeSpec& spec, int j_max, double tau_max = 20.0) {
    Box box;
    box.sigma_min = 0.0;
    box.tau_min = 0.0;
    box.sigma_max = 2.0 * spec.A() + 2.0 * std::max(j_max, 0) + 1.0137;
    box.tau_max = tau_max;
    return box;
}

/// Catalog on `box`, nudging the outer edges if the contour is singular.
inline RootCatalog find_roots_robust(const ModeSpec& spec, Box box, double tol,
                                     std::optional<double> kappa_override = std::nullopt) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        try {
            return find_roots(spec, box, tol, kappa_override);
        } catch (const ContourThroughRoot&) {
            box.sigma_max += 0.0731;
            box.tau_max += 0.0577;
        }
    }
    return find_roots(spec, box, tol, kappa_override);
}

struct ClauseResult {
    bool pass = true;
    std::string detail;
};

/// Pass/fail per clause of the structural lemma on indicial roots.
struct LemmaReport {
    int n = 0;
    int m_max = 0;
    int j_max = 0;
    ClauseResult a, b, c, d;
    std::vector<RootCatalog> catalogs;
    std::vector<IndicialRoot> first_roots;

    bool all_pass() const { return a.pass && b.pass && c.pass && d.pass; }

    std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "lemma n=" << n << " m_max=" << m_max << " j_max=" << j_max << "\n";
        auto line = [&](const char* name, const ClauseResult& r) {
            os << "clause " << name << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail << "\n";
        };
        line("a", a);
        line("b", b);
        line("c", c);
        line("d", d);
        os << "overall: " << (all_pass() ? "PASS" : "FAIL") << "\n";
        return os.str();
    }
};

inline LemmaReport check_lemma(int n, int m_max, int j_max, double tol = 1e-10) {
    if (m_max < 0 || m_max > 10) throw DegenerateSpec("m_max must lie in [0, 10]");
    if (j_max < 0 || j_max > 4) throw DegenerateSpec("j_max must lie in [0, 4]");
    LemmaReport report;
    report.n = n;
    report.m_max = m_max;
    report.j_max = j_max;
    const double half = 0.5 * (n - 1);

    for (int m = 0; m <= m_max; ++m) {
        const ModeSpec spec(n, 0.5, m);
        report.first_roots.push_back(first_root(spec));
        if (j_max >= 1) report.catalogs.push_back(find_roots_robust(spec, default_box(spec, j_max), tol));
    }

    std::ostringstream da, db, dc, dd;
    da.precision(12);
    db.precision(12);
    dc.precision(12);
    dd.precision(12);

    // (a) mode 0: first root purely oscillatory
    const auto& r0 = report.first_roots[0];
    report.a.pass = r0.sigma == 0.0 && r0.tau > 0.0;
    da << "sigma_0^(0)=" << r0.sigma << " tau_0^(0)=" << r0.tau;
    if (j_max >= 1) {
        const auto& cat0 = report.catalogs[0];
        const bool agrees = !cat0.roots.empty() && cat0.roots[0].sigma == 0.0 &&
                            std::abs(cat0.roots[0].tau - r0.tau) < 1e-8;
        report.a.pass = report.a.pass && agrees;
        da << (agrees ? " (matches contour search)" : " (contour search disagrees)");
    }
    report.a.detail = da.str();

    // (b) real first roots for m >= 1, sigma_0^(1) = 1
    for (int m = 1; m <= m_max; ++m) {
        if (report.first_roots[m].tau != 0.0) report.b.pass = false;
        if (j_max >= 1) {
            const auto& cat = report.catalogs[m];
            if (cat.roots.empty() || cat.roots[0].tau != 0.0 ||
                std::abs(cat.roots[0].sigma - report.first_roots[m].sigma) > 1e-8) {
                report.b.pass = false;
            }
        }
    }
    if (m_max >= 1) {
        const double s1 = report.first_roots[1].sigma;
        if (std::abs(s1 - 1.0) > 1e-8) report.b.pass = false;
        db << "sigma_0^(1)=" << s1 << " |err|=" << std::abs(s1 - 1.0);
    } else {
        db << "no modes m >= 1 requested";
    }
    report.b.detail = db.str();

    // (c) sigma_0^(m) strictly increasing
    dc << "sigma_0^(m), m=1.." << m_max << ":";
    for (int m = 1; m <= m_max; ++m) {
        dc << " " << report.first_roots[m].sigma;
        if (m >= 2 && !(report.first_roots[m].sigma > report.first_roots[m - 1].sigma)) report.c.pass = false;
    }
    report.c.detail = dc.str();

    // (d) sigma_j^(m) > (n-1)/2 for j >= 1
    double min_sigma = std::numeric_limits<double>::infinity();
    for (const auto& cat : report.catalogs) {
        if (static_cast<int>(cat.roots.size()) < j_max + 1) {
            report.d.pass = false;
            dd << "[m=" << cat.spec.m << ": only " << cat.roots.size() << " roots found] ";
            continue;
        }
        if (cat.found_count != cat.certified_count) report.d.pass = false;
        for (int j = 1; j <= j_max; ++j) {
            min_sigma = std::min(min_sigma, cat.roots[j].sigma);
            if (!(cat.roots[j].sigma > half)) report.d.pass = false;
        }
    }
    dd << "min sigma_j (j>=1) = " << min_sigma << " vs (n-1)/2 = " << half;
    report.d.detail = dd.str();
    return report;
}

} // namespace indicial
} // namespace neckforge
