#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "triadic/common.hpp"
#include "triadic/oracle.hpp"
#include "triadic/random.hpp"
#include "triadic/stream.hpp"

namespace triadic {

// Coin namespaces: every sampling decision is mix64(seed, TAG, keys...),
// so a decision is a pure function of (seed, identity) and runs replay.
namespace coin_tag {
constexpr std::uint64_t kItsEdge = 0x11;
constexpr std::uint64_t kVerify = 0x22;
constexpr std::uint64_t kColorUser = 0x33;
constexpr std::uint64_t kColorContent = 0x44;
constexpr std::uint64_t kSgsUser = 0x55;
constexpr std::uint64_t kSgsContent = 0x66;
constexpr std::uint64_t kBloom = 0x77;
}  // namespace coin_tag

struct ItsConfig {
    double p = 1.0;
    double p_prime = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(p > 0.0 && p <= 1.0)) throw ValidationError("ITS p must lie in (0,1]");
        if (!(p_prime > 0.0 && p_prime <= 1.0)) throw ValidationError("ITS p' must lie in (0,1]");
    }
};

struct ItsColorConfig {
    int N = 1;  // color count; edge sampling probability is 1/N
    std::uint64_t seed = 0;

    void validate() const {
        if (N < 1) throw ValidationError("ITS-color N must be >= 1");
    }
};

struct SgsConfig {
    double p_n = 1.0;
    std::uint64_t seed = 0;
    std::size_t expected_contents = 1 << 20;  // Bloom filter sizing
    double bloom_fpr = 0.01;

    void validate() const {
        if (!(p_n > 0.0 && p_n <= 1.0)) throw ValidationError("SGS p_n must lie in (0,1]");
    }
};

// Standard double-hashing Bloom filter; used by SGS to remember which
// content nodes have been seen so far.
class BloomFilter {
public:
    BloomFilter(std::size_t expected, double fpr, std::uint64_t seed)
        : seed_(seed) {
        expected = std::max<std::size_t>(expected, 16);
        fpr = std::min(std::max(fpr, 1e-6), 0.5);
        double m = -static_cast<double>(expected) * std::log(fpr) / (std::log(2.0) * std::log(2.0));
        nbits_ = std::max<std::size_t>(64, static_cast<std::size_t>(m));
        k_ = std::max(1, static_cast<int>(std::lround(m / expected * std::log(2.0))));
        bits_.assign((nbits_ + 63) / 64, 0);
    }

    void insert(std::uint64_t key) {
        auto [h1, h2] = hashes(key);
        for (int i = 0; i < k_; ++i) {
            std::uint64_t pos = (h1 + static_cast<std::uint64_t>(i) * h2) % nbits_;
            bits_[pos >> 6] |= 1ULL << (pos & 63);
        }
    }

    bool maybe_contains(std::uint64_t key) const {
        auto [h1, h2] = hashes(key);
        for (int i = 0; i < k_; ++i) {
            std::uint64_t pos = (h1 + static_cast<std::uint64_t>(i) * h2) % nbits_;
            if (!(bits_[pos >> 6] & (1ULL << (pos & 63)))) return false;
        }
        return true;
    }

private:
    std::pair<std::uint64_t, std::uint64_t> hashes(std::uint64_t key) const {
        std::uint64_t h1 = mix64(seed_, coin_tag::kBloom, key);
        std::uint64_t h2 = mix64(h1, key) | 1;
        return {h1, h2};
    }

    std::uint64_t seed_;
    std::size_t nbits_;
    int k_;
    std::vector<std::uint64_t> bits_;
};

// SGS sampling state: the node sample is drawn up front over the social
// graph; the per-user induced subgraphs are evaluated lazily through
// sgs_keeps_edge (same semantics, no materialization cost).
struct SgsState {
    SgsConfig cfg;
    const SocialGraph* social = nullptr;
    std::vector<bool> sampled_users;
    BloomFilter seen_contents{16, 0.01, 0};
    std::unordered_set<std::uint32_t> sampled_contents;
    std::int64_t dropped_off_social = 0;  // UU interactions not on any social edge

    bool user_sampled(UserId u) const { return u.v < sampled_users.size() && sampled_users[u.v]; }
};

inline SgsState sgs_init(const SocialGraph& social, const SgsConfig& cfg) {
    cfg.validate();
    SgsState st;
    st.cfg = cfg;
    st.social = &social;
    st.sampled_users.assign(social.num_users(), false);
    DecisionHash coin{cfg.seed};
    for (std::uint32_t u = 0; u < social.num_users(); ++u)
        st.sampled_users[u] = coin.bernoulli(cfg.p_n, coin_tag::kSgsUser, u);
    st.seen_contents = BloomFilter(cfg.expected_contents, cfg.bloom_fpr, cfg.seed);
    return st;
}

// Induced subgraph of {u} + neighbors(u) in the social graph; exposed for
// inspection and tests, the offer path uses sgs_keeps_edge directly.
inline std::vector<std::pair<UserId, UserId>> sgs_user_subgraph(const SgsState& st, UserId u) {
    std::vector<std::pair<UserId, UserId>> edges;
    const auto& nbrs = st.social->und_neighbors(u);
    std::vector<UserId> closed(nbrs);
    closed.push_back(u);
    std::sort(closed.begin(), closed.end());
    for (UserId a : closed)
        for (UserId b : st.social->und_neighbors(a))
            if (a < b && std::binary_search(closed.begin(), closed.end(), b))
                edges.emplace_back(a, b);
    return edges;
}

// (u,v) lies in some sampled user's induced subgraph iff it is a social
// edge and u, v, or a common social neighbor is sampled.
inline bool sgs_keeps_edge(const SgsState& st, UserId u, UserId v) {
    if (!st.social->adjacent(u, v)) return false;
    if (st.user_sampled(u) || st.user_sampled(v)) return true;
    const auto& nu = st.social->und_neighbors(u);
    const auto& nv = st.social->und_neighbors(v);
    std::size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
        if (nu[i] == nv[j]) {
            if (st.user_sampled(nu[i])) return true;
            ++i;
            ++j;
        } else if (nu[i] < nv[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return false;
}

enum class SamplerMethod : std::uint8_t { ITS, ITSColor, SGS };

// Kept edges of one window under one sampler. The SGS accumulator borrows
// its state (user sample and content filter live across offers).
struct SampledGraph {
    SamplerMethod method = SamplerMethod::ITS;
    std::vector<MultiEdgeUU> uu_edges;
    std::vector<MultiEdgeUC> uc_edges;
    std::uint64_t offers = 0;  // stream position; ITS coins key on it
    ItsConfig its{};
    ItsColorConfig color{};
    SgsState* sgs = nullptr;
};

inline SampledGraph make_its_accumulator(const ItsConfig& cfg) {
    cfg.validate();
    SampledGraph sg;
    sg.method = SamplerMethod::ITS;
    sg.its = cfg;
    return sg;
}

inline SampledGraph make_itscolor_accumulator(const ItsColorConfig& cfg) {
    cfg.validate();
    SampledGraph sg;
    sg.method = SamplerMethod::ITSColor;
    sg.color = cfg;
    return sg;
}

inline SampledGraph make_sgs_accumulator(SgsState& state) {
    SampledGraph sg;
    sg.method = SamplerMethod::SGS;
    sg.sgs = &state;
    return sg;
}

// ITS: each stream element kept independently with probability p. Repeats
// of the same interaction are distinct elements, so the coin keys on the
// offer position.
inline void its_offer(const ItsConfig& cfg, const SocialActivity& a, SampledGraph& acc) {
    std::uint64_t pos = acc.offers++;
    DecisionHash coin{cfg.seed};
    if (!coin.bernoulli(cfg.p, coin_tag::kItsEdge, pos)) return;
    if (a.kind == ActivityKind::UserUser)
        acc.uu_edges.push_back({a.source, a.target_user, a.t});
    else
        acc.uc_edges.push_back({a.source, a.target_content, a.t});
}

enum class EdgeCheck : std::uint8_t { NotChecked, CheckedAbsent, CheckedPresent };

// With probability p' queries the social graph for the influence-triangle
// base edge (later follows earlier; either direction on a tie). The coin is
// a pure function of (seed, content, pair), so each pair is decided at most
// once per content no matter how often it is asked.
inline EdgeCheck its_verify_social_edge(const ItsConfig& cfg, ContentId c, UserId later,
                                        UserId earlier, bool tie, const SocialGraph& social) {
    std::uint32_t lo = std::min(later.v, earlier.v);
    std::uint32_t hi = std::max(later.v, earlier.v);
    DecisionHash coin{cfg.seed};
    if (!coin.bernoulli(cfg.p_prime, coin_tag::kVerify, c.v, (static_cast<std::uint64_t>(lo) << 32) | hi))
        return EdgeCheck::NotChecked;
    return social.influence_base(later, earlier, tie) ? EdgeCheck::CheckedPresent
                                                      : EdgeCheck::CheckedAbsent;
}

inline std::uint32_t itscolor_color(const ItsColorConfig& cfg, UserId u) {
    return static_cast<std::uint32_t>(mix64(cfg.seed, coin_tag::kColorUser, u.v) %
                                      static_cast<std::uint64_t>(cfg.N));
}

inline std::uint32_t itscolor_color(const ItsColorConfig& cfg, ContentId c) {
    return static_cast<std::uint32_t>(mix64(cfg.seed, coin_tag::kColorContent, c.v) %
                                      static_cast<std::uint64_t>(cfg.N));
}

// ITS-color: keep an activity iff its endpoints hash to the same of N
// colors. Deterministic per endpoint pair; triangles survive with p^2.
inline void itscolor_offer(const ItsColorConfig& cfg, const SocialActivity& a, SampledGraph& acc) {
    ++acc.offers;
    if (a.kind == ActivityKind::UserUser) {
        if (itscolor_color(cfg, a.source) == itscolor_color(cfg, a.target_user))
            acc.uu_edges.push_back({a.source, a.target_user, a.t});
    } else {
        if (itscolor_color(cfg, a.source) == itscolor_color(cfg, a.target_content))
            acc.uc_edges.push_back({a.source, a.target_content, a.t});
    }
}

// SGS, user-user side: keep an interaction iff it runs along a social edge
// inside some sampled user's subgraph. Interactions off the social graph
// are dropped and counted.
inline void sgs_offer_uu(SgsState& st, const SocialActivity& a, SampledGraph& acc) {
    ++acc.offers;
    if (a.kind != ActivityKind::UserUser) throw ValidationError("sgs_offer_uu expects a UU activity");
    if (!st.social->adjacent(a.source, a.target_user)) {
        ++st.dropped_off_social;
        return;
    }
    if (sgs_keeps_edge(st, a.source, a.target_user))
        acc.uu_edges.push_back({a.source, a.target_user, a.t});
}

// SGS, user-content side: a content is marked as a sample with probability
// p_n on first sight (the Bloom filter answers "new or not"); all
// activities of sampled contents are kept. A false positive makes a new
// content look seen, which can only drop it.
inline void sgs_offer_uc(SgsState& st, const SocialActivity& a, SampledGraph& acc) {
    ++acc.offers;
    if (a.kind != ActivityKind::UserContent) throw ValidationError("sgs_offer_uc expects a UC activity");
    std::uint32_t c = a.target_content.v;
    if (st.sampled_contents.count(c)) {
        acc.uc_edges.push_back({a.source, a.target_content, a.t});
        return;
    }
    if (!st.seen_contents.maybe_contains(c)) {
        st.seen_contents.insert(c);
        DecisionHash coin{st.cfg.seed};
        if (coin.bernoulli(st.cfg.p_n, coin_tag::kSgsContent, c)) {
            st.sampled_contents.insert(c);
            acc.uc_edges.push_back({a.source, a.target_content, a.t});
        }
    }
}

// Routes an activity to the accumulator's sampler.
inline void offer(const SocialActivity& a, SampledGraph& acc) {
    switch (acc.method) {
        case SamplerMethod::ITS:
            its_offer(acc.its, a, acc);
            break;
        case SamplerMethod::ITSColor:
            itscolor_offer(acc.color, a, acc);
            break;
        case SamplerMethod::SGS:
            if (a.kind == ActivityKind::UserUser)
                sgs_offer_uu(*acc.sgs, a, acc);
            else
                sgs_offer_uc(*acc.sgs, a, acc);
            break;
    }
}

// Observation vector g (UU) or f (UC): node counts by number of sampled
// triangles, capped at W (overflow clamps into the top cell).
struct TriangleStatistics {
    std::vector<std::int64_t> counts;  // size W+1
    int W = 0;
    MultigraphMode mode = MultigraphMode::UU;
    std::optional<std::int64_t> n_known;
    std::int64_t clamped = 0;

    std::int64_t observed_positive() const {
        std::int64_t s = 0;
        for (std::size_t j = 1; j < counts.size(); ++j) s += counts[j];
        return s;
    }
};

namespace detail {

inline void histogram_count(TriangleStatistics& stats, std::int64_t c) {
    if (c > stats.W) {
        c = stats.W;
        ++stats.clamped;
    }
    ++stats.counts[static_cast<std::size_t>(c)];
}

}  // namespace detail

// Reduces a sampled window to the observation vector. For ITS-family UC
// mode only pairs whose social-edge check returned present count; for SGS
// only sampled users/contents contribute entries.
inline TriangleStatistics collect_statistics(const SampledGraph& sg, const SocialGraph* social,
                                             int W, MultigraphMode mode) {
    if (W < 1) throw ValidationError("W cap must be >= 1");
    TriangleStatistics stats;
    stats.W = W;
    stats.mode = mode;
    stats.counts.assign(static_cast<std::size_t>(W) + 1, 0);

    if (mode == MultigraphMode::UU) {
        detail::SimpleGraph simple(sg.uu_edges);
        auto counts = simple.triangle_counts();
        if (sg.method == SamplerMethod::SGS) {
            // every sampled user is an observation, present in the kept
            // graph or not
            std::vector<std::int64_t> dense;
            dense.assign(sg.sgs->sampled_users.size(), 0);
            for (const auto& [id, c] : counts)
                if (id < dense.size()) dense[id] = c;
            for (std::uint32_t u = 0; u < sg.sgs->sampled_users.size(); ++u)
                if (sg.sgs->sampled_users[u]) detail::histogram_count(stats, dense[u]);
        } else {
            for (const auto& [id, c] : counts) detail::histogram_count(stats, c);
        }
        return stats;
    }

    // UC mode
    if (!social) throw ValidationError("collect_statistics UC mode requires the social graph");
    auto per_content = detail::earliest_interactions(sg.uc_edges);
    std::vector<std::uint32_t> contents;
    contents.reserve(per_content.size());
    for (const auto& [cid, _] : per_content) contents.push_back(cid);
    std::sort(contents.begin(), contents.end());

    for (std::uint32_t cid : contents) {
        const auto& users = per_content[cid];
        std::int64_t cnt = 0;
        if (sg.method == SamplerMethod::ITS) {
            std::vector<std::pair<std::uint32_t, Timestamp>> us(users.begin(), users.end());
            std::sort(us.begin(), us.end());
            for (std::size_t i = 0; i < us.size(); ++i)
                for (std::size_t j = i + 1; j < us.size(); ++j) {
                    UserId a{us[i].first}, b{us[j].first};
                    Timestamp ta = us[i].second, tb = us[j].second;
                    UserId later = ta >= tb ? a : b;
                    UserId earlier = ta >= tb ? b : a;
                    if (its_verify_social_edge(sg.its, ContentId{cid}, later, earlier, ta == tb,
                                               *social) == EdgeCheck::CheckedPresent)
                        ++cnt;
                }
        } else {
            // ITS-color and SGS check every pair (p' = 1)
            cnt = detail::influence_pairs(users, *social);
        }
        detail::histogram_count(stats, cnt);
    }
    return stats;
}

// Folds evaporated nodes into g_0 once the population size is known:
// g_0 := n - sum_{j>=1} g_j.
inline TriangleStatistics calibrate_g0(TriangleStatistics stats, std::int64_t n) {
    std::int64_t positive = stats.observed_positive();
    if (n < positive)
        throw ValidationError("population n = " + std::to_string(n) +
                              " is smaller than the " + std::to_string(positive) +
                              " nodes observed with triangles");
    stats.counts[0] = n - positive;
    stats.n_known = n;
    return stats;
}

// The social-edge checks that came back present, for sampled-graph dumps.
// Pure replay of the collect-time coins.
inline std::vector<std::pair<UserId, UserId>> verified_social_edges(const SampledGraph& sg,
                                                                    const SocialGraph& social) {
    std::vector<std::pair<UserId, UserId>> out;
    auto per_content = detail::earliest_interactions(sg.uc_edges);
    std::vector<std::uint32_t> contents;
    for (const auto& [cid, _] : per_content) contents.push_back(cid);
    std::sort(contents.begin(), contents.end());
    for (std::uint32_t cid : contents) {
        std::vector<std::pair<std::uint32_t, Timestamp>> us(per_content[cid].begin(),
                                                            per_content[cid].end());
        std::sort(us.begin(), us.end());
        for (std::size_t i = 0; i < us.size(); ++i)
            for (std::size_t j = i + 1; j < us.size(); ++j) {
                UserId a{us[i].first}, b{us[j].first};
                Timestamp ta = us[i].second, tb = us[j].second;
                UserId later = ta >= tb ? a : b;
                UserId earlier = ta >= tb ? b : a;
                bool present;
                if (sg.method == SamplerMethod::ITS) {
                    present = its_verify_social_edge(sg.its, ContentId{cid}, later, earlier,
                                                     ta == tb, social) == EdgeCheck::CheckedPresent;
                } else {
                    present = social.influence_base(later, earlier, ta == tb);
                }
                if (present) out.emplace_back(later, earlier);
            }
    }
    std::sort(out.begin(), out.end(), [](auto& x, auto& y) {
        return std::tie(x.first.v, x.second.v) < std::tie(y.first.v, y.second.v);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](auto& x, auto& y) { return x.first == y.first && x.second == y.second; }),
              out.end());
    return out;
}

}  // namespace triadic
