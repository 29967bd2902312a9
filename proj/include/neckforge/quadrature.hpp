#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace neckforge::quadrature {

/// Orthonormal symmetric Jacobi polynomials for the weight (1 - x^2)^alpha on [-1, 1].
/// For the zonal harmonics of S^{d}, alpha = (d - 2) / 2.
class JacobiBasis {
public:
    JacobiBasis(double alpha, int degree) : alpha_(alpha), degree_(degree) {
        if (!(alpha > -1.0)) throw std::invalid_argument("Jacobi alpha must exceed -1");
        if (degree < 0) throw std::invalid_argument("Jacobi degree must be >= 0");
        b_.assign(static_cast<std::size_t>(degree) + 2, 0.0);
        for (int m = 1; m <= degree + 1; ++m) b_[m] = recurrence(m);
        mu0_ = std::exp((2.0 * alpha + 1.0) * std::log(2.0) + 2.0 * std::lgamma(alpha + 1.0) - std::lgamma(2.0 * alpha + 2.0));
        build_nodes();
    }

    int degree() const { return degree_; }
    double alpha() const { return alpha_; }
    const Eigen::VectorXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    /// values(i, m) = p_m(x_i)
    const Eigen::MatrixXd& synthesis() const { return synth_; }

    /// p_0..p_degree at x.
    Eigen::VectorXd evaluate(double x) const {
        Eigen::VectorXd p(degree_ + 1);
        p(0) = 1.0 / std::sqrt(mu0_);
        if (degree_ >= 1) p(1) = x * p(0) / b_[1];
        for (int m = 1; m < degree_; ++m) p(m + 1) = (x * p(m) - b_[m] * p(m - 1)) / b_[m + 1];
        return p;
    }

    /// grid values (rows = nodes) -> coefficients (rows = degrees), exact below degree 2N.
    Eigen::MatrixXd project(const Eigen::MatrixXd& grid) const {
        return synth_.transpose() * (weights_.asDiagonal() * grid);
    }
    Eigen::MatrixXd synthesize(const Eigen::MatrixXd& coef) const { return synth_ * coef; }

private:
    double recurrence(int m) const {
        const double a = alpha_;
        const double s = 2.0 * m + 2.0 * a;
        if (m == 1) {
            // the general formula is 0/0 when 2 alpha = -1
            return std::sqrt(4.0 * (1.0 + a) * (1.0 + a) / ((2.0 + 2.0 * a) * (2.0 + 2.0 * a) * (3.0 + 2.0 * a)));
        }
        const double num = 4.0 * m * (m + a) * (m + a) * (m + 2.0 * a);
        const double den = s * s * (s + 1.0) * (s - 1.0);
        return std::sqrt(num / den);
    }

    void build_nodes() {
        const int count = degree_ + 1;
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(count, count);
        for (int m = 1; m < count; ++m) j(m, m - 1) = j(m - 1, m) = b_[m];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
        nodes_ = es.eigenvalues();
        weights_.resize(count);
        for (int i = 0; i < count; ++i) weights_(i) = mu0_ * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        synth_.resize(count, count);
        for (int i = 0; i < count; ++i) synth_.row(i) = evaluate(nodes_(i)).transpose();
    }

    double alpha_;
    int degree_;
    double mu0_ = 0.0;
    std::vector<double> b_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd synth_;
};

} // namespace neckforge::quadrature
