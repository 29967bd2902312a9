#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace neckforge::linalg {

struct GmresResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Restarted GMRES for A x = b with right preconditioner M: solves A M y = b, x = M y.
inline GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_a,
                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_m,
                         const Eigen::VectorXd& b, double tol = 1e-13, int restart = 40, int max_iter = 200) {
    GmresResult out;
    const Eigen::Index n = b.size();
    out.x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    Eigen::VectorXd r = b;
    while (out.iterations < max_iter) {
        const double beta = r.norm();
        out.relative_residual = beta / bnorm;
        if (out.relative_residual <= tol) {
            out.converged = true;
            return out;
        }
        std::vector<Eigen::VectorXd> v{r / beta};
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(restart + 1, restart);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(restart + 1);
        std::vector<double> cs(restart), sn(restart);
        g(0) = beta;
        int k = 0;
        for (; k < restart && out.iterations < max_iter; ++k, ++out.iterations) {
            Eigen::VectorXd w = apply_a(apply_m(v[k]));
            for (int i = 0; i <= k; ++i) {
                h(i, k) = w.dot(v[i]);
                w -= h(i, k) * v[i];
            }
            const double next_norm = w.norm();
            h(k + 1, k) = next_norm;
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double rho = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = h(k, k) / rho;
            sn[k] = h(k + 1, k) / rho;
            h(k, k) = rho;
            h(k + 1, k) = 0.0;
            g(k + 1) = -sn[k] * g(k);
            g(k) = cs[k] * g(k);
            const bool lucky = next_norm == 0.0;
            if (!lucky) v.push_back(w / next_norm);
            if (std::abs(g(k + 1)) / bnorm <= tol || lucky) {
                ++k;
                ++out.iterations;
                break;
            }
        }
        const Eigen::VectorXd y =
            h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        Eigen::VectorXd update = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) update += y(i) * v[i];
        out.x += apply_m(update);
        r = b - apply_a(out.x);
    }
    out.relative_residual = r.norm() / bnorm;
    out.converged = out.relative_residual <= tol;
    return out;
}

} // namespace neckforge::linalg
