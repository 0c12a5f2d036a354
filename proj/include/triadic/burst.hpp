#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "triadic/common.hpp"
#include "triadic/random.hpp"
#include "triadic/stream.hpp"

namespace triadic {

// Floors every component at eps and renormalizes. Smoothing keeps KL finite
// across windows whose estimated supports differ.
inline std::vector<double> smooth_distribution(std::vector<double> v, double eps) {
    for (double& x : v) x = std::max(x, eps);
    normalize(v);
    return v;
}

// Dormant-period reference distribution.
struct BaselineDistribution {
    std::vector<double> theta_base;
    std::vector<std::int64_t> source_windows;
    double smoothing_eps = 1e-9;
};

// Componentwise mean of the per-window estimates, then smoothed.
inline BaselineDistribution baseline(const std::vector<std::vector<double>>& estimates,
                                     double eps = 1e-9,
                                     std::vector<std::int64_t> source_windows = {}) {
    if (estimates.empty()) throw ValidationError("baseline needs at least one estimate");
    std::size_t len = estimates.front().size();
    std::vector<double> mean(len, 0.0);
    for (const auto& e : estimates) {
        if (e.size() != len) throw ValidationError("baseline: estimates differ in length");
        for (std::size_t i = 0; i < len; ++i) mean[i] += e[i];
    }
    for (double& x : mean) x /= static_cast<double>(estimates.size());
    BaselineDistribution b;
    b.theta_base = smooth_distribution(std::move(mean), eps);
    b.smoothing_eps = eps;
    b.source_windows = std::move(source_windows);
    return b;
}

// D_KL(base || estimate), natural log; the estimate is smoothed with the
// baseline's eps first.
inline double kl_divergence(const BaselineDistribution& base, const std::vector<double>& estimate) {
    if (estimate.size() != base.theta_base.size())
        throw ValidationError("kl_divergence: dimension mismatch");
    auto est = smooth_distribution(estimate, base.smoothing_eps);
    double kl = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        double p = base.theta_base[i];
        if (p > 0.0) kl += p * std::log(p / est[i]);
    }
    return std::max(0.0, kl);
}

struct BurstPoint {
    std::int64_t window_index = 0;
    double kl = 0.0;
    std::optional<double> n_plus_hat;
    bool flagged = false;
};

using BurstSeries = std::vector<BurstPoint>;

// Decision rule over a KL series: a fixed threshold, or trailing
// mean + k * stdev. The paper reports raw KL series; the rule is ours and
// deliberately pluggable.
struct FlagPolicy {
    enum class Kind : std::uint8_t { Fixed, Rolling } kind = Kind::Fixed;
    double tau = 0.05;   // Fixed
    int window = 7;      // Rolling: trailing length
    double k_sigma = 3.0;

    // "fixed:0.05" or "rolling:7:3"
    static FlagPolicy parse(const std::string& text) {
        FlagPolicy p;
        if (text.rfind("fixed:", 0) == 0) {
            p.kind = Kind::Fixed;
            p.tau = std::stod(text.substr(6));
            return p;
        }
        if (text.rfind("rolling:", 0) == 0) {
            auto rest = text.substr(8);
            auto colon = rest.find(':');
            if (colon == std::string::npos) throw ValidationError("policy: expected rolling:<w>:<k>");
            p.kind = Kind::Rolling;
            p.window = std::stoi(rest.substr(0, colon));
            p.k_sigma = std::stod(rest.substr(colon + 1));
            if (p.window < 1) throw ValidationError("policy: rolling window must be >= 1");
            return p;
        }
        throw ValidationError("unknown flag policy '" + text + "'");
    }
};

inline BurstSeries flag_bursts(BurstSeries series, const FlagPolicy& policy) {
    if (policy.kind == FlagPolicy::Kind::Fixed) {
        for (auto& pt : series) pt.flagged = pt.kl > policy.tau;
        return series;
    }
    // a rolling window longer than the whole series degenerates to the
    // fixed threshold
    if (static_cast<std::size_t>(policy.window) >= series.size()) {
        for (auto& pt : series) pt.flagged = pt.kl > policy.tau;
        return series;
    }
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (t == 0) {
            series[t].flagged = false;
            continue;
        }
        std::size_t lo = t > static_cast<std::size_t>(policy.window)
                             ? t - static_cast<std::size_t>(policy.window)
                             : 0;
        double mean = 0.0;
        std::size_t m = t - lo;
        for (std::size_t s = lo; s < t; ++s) mean += series[s].kl;
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t s = lo; s < t; ++s) var += (series[s].kl - mean) * (series[s].kl - mean);
        var /= static_cast<double>(m);
        series[t].flagged = series[t].kl > mean + policy.k_sigma * std::sqrt(var);
    }
    return series;
}

enum class SpamStrategy : std::uint8_t { Random, RandomFriend };

struct SpamPlan {
    SpamStrategy strategy = SpamStrategy::Random;
    std::int64_t count = 0;  // number of spam activities to add
    UserId spammer{};
    std::uint64_t seed = 0;
};

// Appends spam user-user activities to a window. Random picks distinct
// uniform targets; RandomFriend repeatedly picks a user plus a random
// friend of that user and spams both. Timestamps are uniform in the window.
inline ActivityWindow inject_spam(ActivityWindow window, const SpamPlan& plan,
                                  const SocialGraph& social) {
    if (plan.count < 0) throw ValidationError("spam count must be >= 0");
    if (plan.count == 0) return window;
    std::uint32_t n_users = static_cast<std::uint32_t>(social.num_users());
    if (n_users == 0) throw ValidationError("inject_spam needs a nonempty social graph");

    Rng rng = make_rng(plan.seed, 0xa5);
    std::uniform_int_distribution<std::uint32_t> pick_user(0, n_users - 1);
    std::uniform_int_distribution<Timestamp> pick_t(window.start,
                                                    window.end > window.start ? window.end - 1
                                                                              : window.start);

    auto add = [&](UserId target) {
        if (target == plan.spammer) return false;
        window.activities.push_back(SocialActivity::user_user(plan.spammer, target, pick_t(rng)));
        return true;
    };

    if (plan.strategy == SpamStrategy::Random) {
        std::unordered_set<std::uint32_t> used;
        std::int64_t sent = 0;
        int dry = 0;
        while (sent < plan.count && dry < 1000) {
            UserId t{pick_user(rng)};
            if (t == plan.spammer || used.count(t.v)) {
                ++dry;
                continue;
            }
            // distinct targets until the population runs out
            if (used.size() + 1 >= n_users) used.clear();
            used.insert(t.v);
            if (add(t)) {
                ++sent;
                dry = 0;
            }
        }
    } else {
        std::int64_t sent = 0;
        int dry = 0;
        while (sent < plan.count && dry < 1000) {
            UserId w{pick_user(rng)};
            const auto& friends = social.und_neighbors(w);
            if (w == plan.spammer || friends.empty()) {
                ++dry;  // friendless user: redraw, bounded
                continue;
            }
            std::uniform_int_distribution<std::size_t> pick_f(0, friends.size() - 1);
            UserId x = friends[pick_f(rng)];
            if (x == plan.spammer) {
                ++dry;
                continue;
            }
            if (add(w)) ++sent;
            if (sent < plan.count && add(x)) ++sent;
            dry = 0;
        }
    }
    std::stable_sort(window.activities.begin(), window.activities.end(),
                     [](const SocialActivity& a, const SocialActivity& b) { return a.t < b.t; });
    return window;
}

// Per-coordinate normalized rooted mean squared error:
// sqrt(E[(est_i - truth_i)^2]) / truth_i. Coordinates with zero truth are
// reported as NaN.
inline std::vector<double> nrmse(const std::vector<std::vector<double>>& estimates,
                                 const std::vector<double>& truth) {
    if (estimates.empty()) throw ValidationError("nrmse needs at least one trial");
    std::vector<double> out(truth.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!(truth[i] > 0.0)) continue;
        double mse = 0.0;
        for (const auto& est : estimates) {
            if (est.size() != truth.size()) throw ValidationError("nrmse: estimate length mismatch");
            double d = est[i] - truth[i];
            mse += d * d;
        }
        mse /= static_cast<double>(estimates.size());
        out[i] = std::sqrt(mse) / truth[i];
    }
    return out;
}

}  // namespace triadic
