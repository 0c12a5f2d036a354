#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "triadic/common.hpp"
#include "triadic/model.hpp"
#include "triadic/sampling.hpp"

namespace triadic {

enum class EmInit : std::uint8_t { Uniform, FromObservations };

struct EmOptions {
    int max_iters = 500;
    double loglik_tol = 1e-8;
    std::optional<double> alpha_fixed;  // skip alpha updates when set
    double alpha0 = 0.1;
    double alpha_step = 0.1;
    double alpha_max = 10.0;
    EmInit init = EmInit::Uniform;

    void validate() const {
        if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
        if (!(loglik_tol > 0.0)) throw ValidationError("loglik_tol must be > 0");
        if (!(alpha_max > 0.0)) throw ValidationError("alpha_max must be > 0");
    }
};

struct DistributionEstimate {
    std::vector<double> theta;   // over model columns (see col_label)
    std::vector<int> col_label;  // raw cardinality i, or bin index k
    double alpha_hat = 0.0;
    std::optional<double> n_plus_hat;
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;

    std::int64_t n_plus_rounded() const {
        return n_plus_hat ? static_cast<std::int64_t>(std::llround(*n_plus_hat)) : 0;
    }
};

// Log-likelihood of observed counts under mixing weights theta:
//   sum_j counts_j * log( sum_c B(j,c) theta_c ),
// skipping zero-count terms. A zero-probability row with positive count
// yields -inf.
inline double loglikelihood(const std::vector<double>& counts, const Matrix& B,
                            const std::vector<double>& theta) {
    if (counts.size() != B.rows() || theta.size() != B.cols())
        throw ValidationError("loglikelihood: dimension mismatch");
    double ll = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0.0) continue;
        double pj = 0.0;
        for (std::size_t c = 0; c < theta.size(); ++c) pj += B(j, c) * theta[c];
        if (pj <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += counts[j] * std::log(pj);
    }
    return ll;
}

inline double loglikelihood(const TriangleStatistics& stats, const SamplingModel& model,
                            const std::vector<double>& theta) {
    std::vector<double> counts(stats.counts.begin(), stats.counts.end());
    return loglikelihood(counts, model.b, theta);
}

namespace detail {

// Generic EM over a column-stochastic kernel. `rebuild` refreshes
// (B, dB/dalpha) at a candidate alpha; it is invoked only when fitting
// alpha. The M-step for theta is exact; the alpha step is one projected
// gradient-ascent step with backtracking, so the observed-data
// log-likelihood never decreases (generalized EM).
struct EmKernel {
    Matrix B;
    Matrix dB;
    std::function<std::pair<Matrix, Matrix>(double)> rebuild;
};

inline DistributionEstimate run_em(const std::vector<double>& counts, EmKernel kernel,
                                   std::vector<int> col_label, bool fit_alpha, double alpha0,
                                   const EmOptions& opts) {
    opts.validate();
    const std::size_t R = kernel.B.rows();
    const std::size_t C = kernel.B.cols();
    if (counts.size() != R) throw ValidationError("em: counts/model dimension mismatch");
    double total = vec_sum(counts);
    if (!(total > 0.0)) throw ValidationError("em: no observations");

    DistributionEstimate est;
    est.col_label = std::move(col_label);
    est.alpha_hat = alpha0;

    // init
    std::vector<double>& theta = est.theta;
    theta.assign(C, 1.0 / static_cast<double>(C));
    if (opts.init == EmInit::FromObservations) {
        // Blend the empirical row mass into the matching column with a
        // uniform floor; a heuristic start, not part of the contract.
        std::vector<double> emp(C, 0.0);
        for (std::size_t j = 0; j < R; ++j) {
            std::size_t best = 0;
            for (std::size_t c = 0; c < C; ++c)
                if (kernel.B(j, c) > kernel.B(j, best)) best = c;
            emp[best] += counts[j];
        }
        normalize(emp);
        for (std::size_t c = 0; c < C; ++c) theta[c] = 0.9 * emp[c] + 0.1 / static_cast<double>(C);
    }

    std::vector<double> ez_col(C, 0.0);   // column sums of E[z]
    Matrix ez(R, C);                      // full responsibility table (for alpha step)

    double ll = loglikelihood(counts, kernel.B, theta);
    if (!std::isfinite(ll)) throw NumericalError("em: zero-probability observation at init");
    est.loglik_trace.push_back(ll);

    for (int it = 0; it < opts.max_iters; ++it) {
        // E-step: E[z_jc] = counts_j * B(j,c) theta_c / P_j
        std::fill(ez_col.begin(), ez_col.end(), 0.0);
        for (std::size_t j = 0; j < R; ++j) {
            if (counts[j] == 0.0) {
                for (std::size_t c = 0; c < C; ++c) ez(j, c) = 0.0;
                continue;
            }
            double pj = 0.0;
            for (std::size_t c = 0; c < C; ++c) pj += kernel.B(j, c) * theta[c];
            if (pj <= 0.0) throw NumericalError("em: zero-probability observation");
            for (std::size_t c = 0; c < C; ++c) {
                double z = counts[j] * kernel.B(j, c) * theta[c] / pj;
                ez(j, c) = z;
                ez_col[c] += z;
            }
        }

        // M-step for theta: normalized column sums.
        for (std::size_t c = 0; c < C; ++c) theta[c] = ez_col[c] / total;

        // M-step for alpha: one ascent step on Q(alpha), backtracking until
        // Q does not decrease.
        if (fit_alpha) {
            auto q_of = [&](const Matrix& B) {
                double q = 0.0;
                for (std::size_t j = 0; j < R; ++j)
                    for (std::size_t c = 0; c < C; ++c) {
                        double z = ez(j, c);
                        if (z <= 0.0) continue;
                        double b = B(j, c);
                        if (b <= 0.0) return -std::numeric_limits<double>::infinity();
                        q += z * std::log(b);
                    }
                return q;
            };
            double q_cur = q_of(kernel.B);
            double grad = 0.0;
            for (std::size_t j = 0; j < R; ++j)
                for (std::size_t c = 0; c < C; ++c) {
                    double z = ez(j, c);
                    if (z <= 0.0) continue;
                    double b = kernel.B(j, c);
                    if (b > 0.0) grad += z * kernel.dB(j, c) / b;
                }
            double step = opts.alpha_step;
            while (step > 1e-12) {
                double cand = est.alpha_hat + step * grad;
                cand = std::min(std::max(cand, 0.0), opts.alpha_max);
                if (cand == est.alpha_hat) break;
                auto [Bc, dBc] = kernel.rebuild(cand);
                double q_cand = 0.0;
                {
                    double qq = 0.0;
                    bool bad = false;
                    for (std::size_t j = 0; j < R && !bad; ++j)
                        for (std::size_t c = 0; c < C; ++c) {
                            double z = ez(j, c);
                            if (z <= 0.0) continue;
                            double b = Bc(j, c);
                            if (b <= 0.0) { bad = true; break; }
                            qq += z * std::log(b);
                        }
                    q_cand = bad ? -std::numeric_limits<double>::infinity() : qq;
                }
                if (q_cand >= q_cur) {
                    est.alpha_hat = cand;
                    kernel.B = std::move(Bc);
                    kernel.dB = std::move(dBc);
                    break;
                }
                step *= 0.5;
            }
        }

        double ll_new = loglikelihood(counts, kernel.B, theta);
        est.loglik_trace.push_back(ll_new);
        est.iterations = it + 1;
        if (std::abs(ll_new - ll) < opts.loglik_tol) {
            est.converged = true;
            break;
        }
        ll = ll_new;
    }
    return est;
}

}  // namespace detail

// MLE of theta (and alpha) when the node population n is known; requires
// calibrated statistics so g_0 accounts for evaporated nodes.
inline DistributionEstimate em_known_n(const TriangleStatistics& stats, const ModelSpec& spec,
                                       const EmOptions& opts = {}) {
    if (!stats.n_known)
        throw ValidationError("em_known_n requires calibrated statistics (known n)");
    if (static_cast<int>(stats.counts.size()) != spec.W + 1)
        throw ValidationError("em_known_n: statistics/model W mismatch");

    bool fit_alpha = spec.kind == ModelKind::BetaBinomial && !opts.alpha_fixed;
    double alpha0 = opts.alpha_fixed ? *opts.alpha_fixed
                                     : (spec.kind == ModelKind::BetaBinomial ? opts.alpha0 : 0.0);

    auto model = build_model(spec, alpha0);
    detail::EmKernel kernel{model.b, model.db_dalpha, [spec](double a) {
                                auto m = build_model(spec, a);
                                return std::make_pair(m.b, m.db_dalpha);
                            }};
    std::vector<double> counts(stats.counts.begin(), stats.counts.end());
    return detail::run_em(counts, std::move(kernel), model.col_label, fit_alpha, alpha0, opts);
}

// MLE of (phi, alpha) from the positive observations only; phi is the
// triadic cardinality distribution of *observed* nodes.
inline DistributionEstimate em_unknown_n(const TriangleStatistics& stats, const ModelSpec& spec,
                                         const EmOptions& opts = {}) {
    if (static_cast<int>(stats.counts.size()) != spec.W + 1)
        throw ValidationError("em_unknown_n: statistics/model W mismatch");
    std::vector<double> counts(stats.counts.begin() + 1, stats.counts.end());
    if (!(vec_sum(counts) > 0.0))
        throw ValidationError("em_unknown_n: no node was observed with a sampled triangle");

    bool fit_alpha = spec.kind == ModelKind::BetaBinomial && !opts.alpha_fixed;
    double alpha0 = opts.alpha_fixed ? *opts.alpha_fixed
                                     : (spec.kind == ModelKind::BetaBinomial ? opts.alpha0 : 0.0);

    auto cond = a_matrix(build_model(spec, alpha0));
    detail::EmKernel kernel{cond.a, cond.da_dalpha, [spec](double a) {
                                auto cm = a_matrix(build_model(spec, a));
                                return std::make_pair(cm.a, cm.da_dalpha);
                            }};
    return detail::run_em(counts, std::move(kernel), cond.col_label, fit_alpha, alpha0, opts);
}

// Binned variants: identical machinery over log-binned columns.
inline DistributionEstimate em_binned(const TriangleStatistics& stats, const ModelSpec& raw_spec,
                                      bool known_n, const EmOptions& opts = {}) {
    ModelSpec s = raw_spec;
    s.binned = true;
    return known_n ? em_known_n(stats, s, opts) : em_unknown_n(stats, s, opts);
}

// Forward map: the observed-node distribution phi induced by theta_plus,
//   phi_c = theta_plus_c (1 - q_c) / sum_c' theta_plus_c' (1 - q_c').
inline std::vector<double> forward_phi(const std::vector<double>& theta_plus,
                                       const std::vector<double>& q) {
    if (theta_plus.size() != q.size()) throw ValidationError("forward_phi: dimension mismatch");
    std::vector<double> phi(theta_plus.size());
    for (std::size_t c = 0; c < phi.size(); ++c) phi[c] = theta_plus[c] * (1.0 - q[c]);
    normalize(phi);
    return phi;
}

// Inverse of the forward map: theta_plus_c proportional to phi_c / (1 - q_c).
inline std::vector<double> rescale_to_theta_plus(const std::vector<double>& phi,
                                                 const std::vector<double>& q) {
    if (phi.size() != q.size()) throw ValidationError("rescale: dimension mismatch");
    std::vector<double> theta(phi.size());
    for (std::size_t c = 0; c < phi.size(); ++c) {
        if (1.0 - q[c] < 1e-12)
            throw SingularModelError("rescale: detection probability vanishes");
        theta[c] = phi[c] / (1.0 - q[c]);
    }
    normalize(theta);
    return theta;
}

inline std::vector<double> rescale_to_theta_plus(const std::vector<double>& phi, double alpha_hat,
                                                 const ModelSpec& spec) {
    return rescale_to_theta_plus(phi, q_vector(build_model(spec, alpha_hat)));
}

// Scale-up estimator for the number of nodes with at least one triangle:
//   n_plus = (sum_{j>=1} g_j) / (1 - sum_c q_c theta_plus_c).
inline double estimate_n_plus(const TriangleStatistics& stats,
                              const std::vector<double>& theta_plus,
                              const std::vector<double>& q) {
    if (theta_plus.size() != q.size()) throw ValidationError("estimate_n_plus: dimension mismatch");
    double observed = 0.0;
    for (std::size_t j = 1; j < stats.counts.size(); ++j)
        observed += static_cast<double>(stats.counts[j]);
    double miss = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) miss += q[c] * theta_plus[c];
    if (miss >= 1.0 - 1e-12)
        throw SingularModelError("estimate_n_plus: miss probability is 1");
    return observed / (1.0 - miss);
}

inline double estimate_n_plus(const TriangleStatistics& stats,
                              const std::vector<double>& theta_plus, double alpha_hat,
                              const ModelSpec& spec) {
    return estimate_n_plus(stats, theta_plus, q_vector(build_model(spec, alpha_hat)));
}

// Runs the full unknown-size chain: EM for (phi, alpha), rescale to
// theta_plus, then the n_plus scale-up.
inline DistributionEstimate estimate_unknown_size(const TriangleStatistics& stats,
                                                  const ModelSpec& spec,
                                                  const EmOptions& opts = {}) {
    auto est = em_unknown_n(stats, spec, opts);
    ModelSpec s = spec;
    auto q = q_vector(build_model(s, est.alpha_hat));
    est.theta = rescale_to_theta_plus(est.theta, q);
    est.n_plus_hat = estimate_n_plus(stats, est.theta, q);
    return est;
}

// Convex combination of two estimates on the same support.
inline std::vector<double> mixture(const std::vector<double>& theta_a,
                                   const std::vector<double>& theta_b, double c) {
    if (theta_a.size() != theta_b.size()) throw ValidationError("mixture: dimension mismatch");
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("mixture weight must lie in [0,1]");
    std::vector<double> out(theta_a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * theta_a[i] + (1.0 - c) * theta_b[i];
    return out;
}

// Variance-minimizing weight c* = var_b / (var_a + var_b); 0.5 by
// convention when both variances vanish.
inline double optimal_mixture_weight(double var_a, double var_b) {
    if (var_a < 0.0 || var_b < 0.0) throw ValidationError("variances must be >= 0");
    if (var_a == 0.0 && var_b == 0.0) return 0.5;
    return var_b / (var_a + var_b);
}

}  // namespace triadic
