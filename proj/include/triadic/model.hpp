#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "triadic/common.hpp"

namespace triadic {

enum class ModelKind : std::uint8_t { BetaBinomial, SgsExact };

// Parameters of a sampling model; alpha is supplied separately so the
// estimator can refit it without copying the spec around.
struct ModelSpec {
    ModelKind kind = ModelKind::BetaBinomial;
    double p_tri = 1.0;  // triangle sampling probability (BetaBinomial)
    double p_n = 1.0;    // node sampling probability (SgsExact)
    int W = 1;           // cardinality cap
    bool binned = false;

    void validate() const {
        if (W < 1) throw ValidationError("model W must be >= 1");
        if (kind == ModelKind::BetaBinomial && !(p_tri > 0.0 && p_tri <= 1.0))
            throw ValidationError("p_tri must lie in (0,1]");
        if (kind == ModelKind::SgsExact && !(p_n > 0.0 && p_n <= 1.0))
            throw ValidationError("p_n must lie in (0,1]");
    }
};

// BetaBin(j | i, p, alpha) = C(i,j) * prod_{s<j}(s*alpha + p)
//                                   * prod_{s<i-j}(s*alpha + 1-p)
//                                   / prod_{s<i}(s*alpha + 1),
// with empty products equal to 1. alpha = 0 reduces to Binomial(i, p).
// Evaluated in log space beyond i = 30 to avoid overflow of the products.
inline double betabin_pmf(int j, int i, double p_tri, double alpha) {
    if (j < 0 || i < 0 || j > i) throw ValidationError("betabin_pmf requires 0 <= j <= i");
    if (i == 0) return 1.0;

    if (i <= 30) {
        double num = 1.0;
        for (int s = 0; s < j; ++s) num *= s * alpha + p_tri;
        for (int s = 0; s < i - j; ++s) num *= s * alpha + 1.0 - p_tri;
        double den = 1.0;
        for (int s = 0; s < i; ++s) den *= s * alpha + 1.0;
        double binom = 1.0;
        for (int s = 0; s < j; ++s) binom *= static_cast<double>(i - s) / static_cast<double>(s + 1);
        return binom * num / den;
    }

    double lg = std::lgamma(i + 1.0) - std::lgamma(j + 1.0) - std::lgamma(i - j + 1.0);
    for (int s = 0; s < j; ++s) {
        double f = s * alpha + p_tri;
        if (f <= 0.0) return 0.0;
        lg += std::log(f);
    }
    for (int s = 0; s < i - j; ++s) {
        double f = s * alpha + 1.0 - p_tri;
        if (f <= 0.0) return 0.0;
        lg += std::log(f);
    }
    for (int s = 0; s < i; ++s) lg -= std::log(s * alpha + 1.0);
    return std::exp(lg);
}

// d/dalpha log BetaBin(j | i, p, alpha); the binomial coefficient is
// alpha-free, so only the three products contribute.
inline double betabin_logpmf_dalpha(int j, int i, double p_tri, double alpha) {
    if (j < 0 || i < 0 || j > i) throw ValidationError("betabin_logpmf_dalpha requires 0 <= j <= i");
    double d = 0.0;
    for (int s = 1; s < j; ++s) d += s / (s * alpha + p_tri);
    for (int s = 1; s < i - j; ++s) d += s / (s * alpha + 1.0 - p_tri);
    for (int s = 1; s < i; ++s) d -= s / (s * alpha + 1.0);
    return d;
}

// SGS observes either everything about a sampled node or nothing.
inline double sgs_bji(int j, int i, double p_n) {
    if (j < 0 || i < 0 || j > i) throw ValidationError("sgs_bji requires 0 <= j <= i");
    if (j == 0 && i == 0) return 1.0;
    if (j == 0 && i > 0) return 1.0 - p_n;
    if (j == i) return p_n;
    return 0.0;
}

// Column-stochastic observation model P(Y=j | X in column). Rows run over
// observed counts j = 0..W. Columns are either raw cardinalities i = 0..W
// or log bins k = -1..K (bin -1 is {0}, bin k >= 0 covers [2^k, 2^{k+1})
// truncated at W).
struct SamplingModel {
    ModelSpec spec;
    double alpha = 0.0;
    Matrix b;                    // (W+1) x columns
    std::vector<int> col_label;  // raw: i; binned: k

    int W() const { return spec.W; }
    std::size_t cols() const { return b.cols(); }

    // Derivative of every entry with respect to alpha (zero matrix for SGS).
    Matrix db_dalpha;
    bool has_alpha() const { return spec.kind == ModelKind::BetaBinomial; }
};

inline int bin_count(int W) {
    return static_cast<int>(std::floor(std::log2(static_cast<double>(W))));
}

// Raw column i of the model and its alpha derivative.
namespace detail {

inline void fill_raw_column(const ModelSpec& spec, double alpha, int i, std::vector<double>& col,
                            std::vector<double>& dcol) {
    const int W = spec.W;
    col.assign(static_cast<std::size_t>(W) + 1, 0.0);
    dcol.assign(static_cast<std::size_t>(W) + 1, 0.0);
    if (spec.kind == ModelKind::SgsExact) {
        for (int j = 0; j <= i; ++j) col[static_cast<std::size_t>(j)] = sgs_bji(j, i, spec.p_n);
        return;
    }
    for (int j = 0; j <= i; ++j) {
        double v = betabin_pmf(j, i, spec.p_tri, alpha);
        col[static_cast<std::size_t>(j)] = v;
        if (v > 0.0)
            dcol[static_cast<std::size_t>(j)] = v * betabin_logpmf_dalpha(j, i, spec.p_tri, alpha);
    }
}

}  // namespace detail

// Materializes the full model matrix. For binned specs, entries are the
// uniform-within-bin average of the raw columns; a truncated top bin divides
// by the number of cardinalities it actually contains so columns stay
// stochastic.
inline SamplingModel build_model(const ModelSpec& spec, double alpha = 0.0) {
    spec.validate();
    if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
    const int W = spec.W;
    SamplingModel m;
    m.spec = spec;
    m.alpha = alpha;

    std::vector<double> col, dcol;
    if (!spec.binned) {
        m.b = Matrix(static_cast<std::size_t>(W) + 1, static_cast<std::size_t>(W) + 1);
        m.db_dalpha = Matrix(m.b.rows(), m.b.cols());
        m.col_label.resize(static_cast<std::size_t>(W) + 1);
        for (int i = 0; i <= W; ++i) {
            m.col_label[static_cast<std::size_t>(i)] = i;
            detail::fill_raw_column(spec, alpha, i, col, dcol);
            for (int j = 0; j <= W; ++j) {
                m.b(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = col[static_cast<std::size_t>(j)];
                m.db_dalpha(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = dcol[static_cast<std::size_t>(j)];
            }
        }
        return m;
    }

    const int K = bin_count(W);
    const std::size_t ncols = static_cast<std::size_t>(K) + 2;  // bins -1..K
    m.b = Matrix(static_cast<std::size_t>(W) + 1, ncols);
    m.db_dalpha = Matrix(m.b.rows(), m.b.cols());
    m.col_label.resize(ncols);
    // bin -1 = {0}: observes zero with certainty
    m.col_label[0] = -1;
    m.b(0, 0) = 1.0;
    for (int k = 0; k <= K; ++k) {
        m.col_label[static_cast<std::size_t>(k) + 1] = k;
        int lo = 1 << k;
        int hi = std::min((1 << (k + 1)) - 1, W);
        int width = hi - lo + 1;
        for (int i = lo; i <= hi; ++i) {
            detail::fill_raw_column(spec, alpha, i, col, dcol);
            for (int j = 0; j <= W; ++j) {
                m.b(static_cast<std::size_t>(j), static_cast<std::size_t>(k) + 1) +=
                    col[static_cast<std::size_t>(j)] / width;
                m.db_dalpha(static_cast<std::size_t>(j), static_cast<std::size_t>(k) + 1) +=
                    dcol[static_cast<std::size_t>(j)] / width;
            }
        }
    }
    return m;
}

// Miss probabilities q_c = P(Y=0 | X in column c) over the positive columns
// (raw i >= 1, or bins k >= 0).
inline std::vector<double> q_vector(const SamplingModel& m) {
    std::vector<double> q;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (m.col_label[c] < (m.spec.binned ? 0 : 1)) continue;
        q.push_back(m.b(0, c));
    }
    return q;
}

// Conditional model a_jc = b_jc / (1 - q_c) over j >= 1 and positive
// columns; the observation model given that the node was seen at all.
struct ConditionalModel {
    Matrix a;                    // rows j = 1..W (index j-1), positive columns
    Matrix da_dalpha;
    std::vector<int> col_label;
    std::vector<double> q;       // per positive column
    int W = 0;
};

inline ConditionalModel a_matrix(const SamplingModel& m) {
    const int W = m.W();
    ConditionalModel cm;
    cm.W = W;
    std::size_t first = m.spec.binned ? 1 : 1;  // skip bin -1 / raw i=0
    std::size_t ncols = m.cols() - first;
    cm.a = Matrix(static_cast<std::size_t>(W), ncols);
    cm.da_dalpha = Matrix(static_cast<std::size_t>(W), ncols);
    cm.col_label.assign(m.col_label.begin() + static_cast<std::ptrdiff_t>(first), m.col_label.end());
    cm.q.resize(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        double q = m.b(0, c + first);
        double dq = m.db_dalpha(0, c + first);
        if (1.0 - q < 1e-12)
            throw SingularModelError("zero detection probability: q = 1 for column label " +
                                     std::to_string(cm.col_label[c]));
        cm.q[c] = q;
        for (int j = 1; j <= W; ++j) {
            double b = m.b(static_cast<std::size_t>(j), c + first);
            double db = m.db_dalpha(static_cast<std::size_t>(j), c + first);
            cm.a(static_cast<std::size_t>(j) - 1, c) = b / (1.0 - q);
            // d/dalpha [b/(1-q)] = [db (1-q) + b dq] / (1-q)^2
            cm.da_dalpha(static_cast<std::size_t>(j) - 1, c) =
                (db * (1.0 - q) + b * dq) / ((1.0 - q) * (1.0 - q));
        }
    }
    return cm;
}

// Rebins a raw spec: helper for callers holding a raw ModelSpec.
inline SamplingModel bin_model(const ModelSpec& raw_spec, double alpha = 0.0) {
    ModelSpec s = raw_spec;
    s.binned = true;
    return build_model(s, alpha);
}

// Aggregates a raw distribution (theta_0..theta_W) into log-binned masses
// (bin -1, bins 0..K); used when comparing binned estimates to a raw truth.
inline std::vector<double> bin_aggregate(const std::vector<double>& theta_raw) {
    if (theta_raw.empty()) throw ValidationError("empty distribution");
    int W = static_cast<int>(theta_raw.size()) - 1;
    if (W < 1) return theta_raw;
    int K = bin_count(W);
    std::vector<double> out(static_cast<std::size_t>(K) + 2, 0.0);
    out[0] = theta_raw[0];
    for (int i = 1; i <= W; ++i) {
        int k = static_cast<int>(std::floor(std::log2(static_cast<double>(i))));
        out[static_cast<std::size_t>(k) + 1] += theta_raw[static_cast<std::size_t>(i)];
    }
    return out;
}

}  // namespace triadic
