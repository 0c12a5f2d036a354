#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "triadic/common.hpp"
#include "triadic/estimator.hpp"
#include "triadic/model.hpp"

namespace triadic {

// Fisher information / CRLB report for one design point.
struct CrlbReport {
    Matrix J;                    // Fisher information of the observations
    Matrix I;                    // J^{-1} - theta theta^T (constrained bound)
    std::vector<double> i_diag;  // per-coordinate variance lower bounds
    std::vector<double> rooted;  // sqrt of the diagonal
    std::vector<int> col_label;
    double condition = 0.0;      // condition number of J
    double n_used = 0.0;
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    return out;
}

inline Matrix from_eigen(const Eigen::MatrixXd& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
    return out;
}

// Symmetric inverse through an eigendecomposition; reports the condition
// number and refuses designs past 1e12 instead of silently inverting them.
inline Eigen::MatrixXd invert_symmetric(const Eigen::MatrixXd& J, double& condition) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    double lo = ev.minCoeff();
    double hi = ev.maxCoeff();
    condition = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(lo > 0.0) || condition > 1e12)
        throw NumericalError("Fisher information numerically singular (condition number " +
                             std::to_string(condition) + ")");
    Eigen::VectorXd inv = ev.cwiseInverse();
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// J_cr = n * sum_j B(j,c) B(j,r) / P_j with P_j = sum_c B(j,c) theta_c.
// Rows with P_j = 0 are legal only if their numerators vanish too.
inline Eigen::MatrixXd fisher_from_kernel(const Matrix& B, const std::vector<double>& theta,
                                          double n) {
    const std::size_t R = B.rows();
    const std::size_t C = B.cols();
    if (theta.size() != C) throw ValidationError("fisher: theta/model dimension mismatch");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(C),
                                              static_cast<Eigen::Index>(C));
    for (std::size_t j = 0; j < R; ++j) {
        double pj = 0.0;
        for (std::size_t c = 0; c < C; ++c) pj += B(j, c) * theta[c];
        if (pj <= 0.0) {
            for (std::size_t c = 0; c < C; ++c)
                if (B(j, c) > 0.0)
                    throw SingularModelError(
                        "observation row " + std::to_string(j) +
                        " has zero probability but a reachable model entry");
            continue;
        }
        for (std::size_t c = 0; c < C; ++c) {
            double bjc = B(j, c);
            if (bjc == 0.0) continue;
            for (std::size_t r = c; r < C; ++r) {
                double v = n * bjc * B(j, r) / pj;
                J(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) += v;
                if (r != c) J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += v;
            }
        }
    }
    return J;
}

}  // namespace detail

// Fisher information of the observations when the population size n is
// known; square over the model's columns.
inline Matrix fisher_known(const std::vector<double>& theta, const SamplingModel& model, double n) {
    return detail::from_eigen(detail::fisher_from_kernel(model.b, theta, n));
}

// Constrained inverse information: I = J^{-1} - theta theta^T / n. The
// diagonal lower-bounds the per-coordinate mean squared error of any
// unbiased estimator under the simplex constraint. J carries the factor n,
// so the constraint correction must scale with 1/n as well; the identity
// model then recovers the multinomial bound theta_i (1 - theta_i) / n.
inline Matrix constrained_crlb(const Matrix& J, const std::vector<double>& theta, double n,
                               double* condition_out = nullptr) {
    if (J.rows() != J.cols() || J.rows() != theta.size())
        throw ValidationError("constrained_crlb: dimension mismatch");
    if (!(n > 0.0)) throw ValidationError("constrained_crlb: n must be positive");
    double condition = 0.0;
    Eigen::MatrixXd inv = detail::invert_symmetric(detail::to_eigen(J), condition);
    if (condition_out) *condition_out = condition;
    Matrix I = detail::from_eigen(inv);
    for (std::size_t r = 0; r < I.rows(); ++r)
        for (std::size_t c = 0; c < I.cols(); ++c) I(r, c) -= theta[r] * theta[c] / n;
    return I;
}

// Fisher information for phi in the unknown-size regime: the conditional
// kernel a_jc replaces b_ji and n_plus replaces n.
inline Matrix fisher_unknown(const std::vector<double>& phi, const ConditionalModel& cm,
                             double n_plus) {
    return detail::from_eigen(detail::fisher_from_kernel(cm.a, phi, n_plus));
}

// Jacobian of the rescaling map theta_plus(phi) (entry (i,r) is
// d theta_plus_i / d phi_r): with w = 1/(1-q) and S = sum w phi,
//   H_ir = (delta_ir w_i S - w_i phi_i w_r) / S^2.
inline Matrix jacobian_H(const std::vector<double>& phi, const std::vector<double>& q) {
    if (phi.size() != q.size()) throw ValidationError("jacobian_H: dimension mismatch");
    const std::size_t W = phi.size();
    std::vector<double> w(W);
    for (std::size_t c = 0; c < W; ++c) {
        if (1.0 - q[c] < 1e-12) throw SingularModelError("jacobian_H: detection probability vanishes");
        w[c] = 1.0 / (1.0 - q[c]);
    }
    double S = 0.0;
    for (std::size_t c = 0; c < W; ++c) S += w[c] * phi[c];
    Matrix H(W, W);
    for (std::size_t i = 0; i < W; ++i)
        for (std::size_t r = 0; r < W; ++r) {
            double v = -w[i] * phi[i] * w[r];
            if (i == r) v += w[i] * S;
            H(i, r) = v / (S * S);
        }
    return H;
}

inline Matrix jacobian_H(const std::vector<double>& phi, double alpha, const ModelSpec& spec) {
    return jacobian_H(phi, q_vector(build_model(spec, alpha)));
}

// CRLB for theta_plus via the sandwich J(theta_plus)^{-1} =
// H J(phi)^{-1} H^T. The rescaling map is homogeneous of degree zero, so
// H phi = 0 and the sandwich already carries the simplex constraint: no
// further correction term applies (at q = 0 it reduces exactly to the
// constrained bound for phi).
inline CrlbReport crlb_theta_plus(const std::vector<double>& phi, double alpha,
                                  const ModelSpec& spec, double n_plus) {
    auto model = build_model(spec, alpha);
    auto cm = a_matrix(model);
    CrlbReport rep;
    rep.col_label = cm.col_label;
    rep.n_used = n_plus;

    Eigen::MatrixXd Jphi = detail::fisher_from_kernel(cm.a, phi, n_plus);
    Eigen::MatrixXd Jphi_inv = detail::invert_symmetric(Jphi, rep.condition);
    Eigen::MatrixXd H = detail::to_eigen(jacobian_H(phi, cm.q));
    Eigen::MatrixXd cov = H * Jphi_inv * H.transpose();

    rep.J = detail::from_eigen(Jphi);
    rep.I = detail::from_eigen(cov);
    rep.i_diag.resize(phi.size());
    rep.rooted.resize(phi.size());
    for (std::size_t c = 0; c < phi.size(); ++c) {
        rep.i_diag[c] = rep.I(c, c);
        rep.rooted[c] = std::sqrt(std::max(0.0, rep.i_diag[c]));
    }
    return rep;
}

// Convenience report for the known-size case.
inline CrlbReport crlb_known(const std::vector<double>& theta, const SamplingModel& model,
                             double n) {
    CrlbReport rep;
    rep.col_label = model.col_label;
    rep.n_used = n;
    rep.J = fisher_known(theta, model, n);
    rep.I = constrained_crlb(rep.J, theta, n, &rep.condition);
    rep.i_diag.resize(theta.size());
    rep.rooted.resize(theta.size());
    for (std::size_t c = 0; c < theta.size(); ++c) {
        rep.i_diag[c] = rep.I(c, c);
        rep.rooted[c] = std::sqrt(std::max(0.0, rep.i_diag[c]));
    }
    return rep;
}

}  // namespace triadic
