#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "triadic/common.hpp"
#include "triadic/stream.hpp"

namespace triadic {

// Exact triadic cardinality distribution for one window.
struct GroundTruth {
    std::vector<double> theta;  // theta[0..W]
    std::vector<std::pair<std::uint32_t, std::int64_t>> cardinalities;  // sorted by node id
    std::int64_t n = 0;         // denominator
    int W = 0;                  // max observed cardinality

    std::int64_t cardinality_of(std::uint32_t id) const {
        auto it = std::lower_bound(cardinalities.begin(), cardinalities.end(), id,
                                   [](const auto& p, std::uint32_t x) { return p.first < x; });
        return (it != cardinalities.end() && it->first == id) ? it->second : 0;
    }
};

namespace detail {

// Deduplicated undirected graph over dense user ids, built from a UU
// multigraph. Parallel edges collapse: a triangle is a node triple.
class SimpleGraph {
public:
    explicit SimpleGraph(const std::vector<MultiEdgeUU>& multi_edges) {
        std::vector<std::uint64_t> keys;
        keys.reserve(multi_edges.size());
        std::uint32_t max_id = 0;
        for (const auto& e : multi_edges) {
            if (e.a == e.b) continue;
            max_id = std::max({max_id, e.a.v, e.b.v});
            keys.push_back(key(e.a.v, e.b.v));
        }
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

        adj_.assign(multi_edges.empty() ? 0 : max_id + 1, {});
        present_.assign(adj_.size(), false);
        for (std::uint64_t k : keys) {
            auto a = static_cast<std::uint32_t>(k >> 32);
            auto b = static_cast<std::uint32_t>(k & 0xffffffffULL);
            adj_[a].push_back(b);
            adj_[b].push_back(a);
            present_[a] = present_[b] = true;
        }
        for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
        edges_ = keys.size();
    }

    bool has_edge(std::uint32_t a, std::uint32_t b) const {
        if (a >= adj_.size()) return false;
        return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
    }

    std::size_t num_edges() const { return edges_; }

    std::vector<std::uint32_t> nodes() const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t v = 0; v < present_.size(); ++v)
            if (present_[v]) out.push_back(v);
        return out;
    }

    // Per-node triangle counts; each triangle {u,v,w} is located once at its
    // lowest-rank edge, rank = (degree, id).
    std::vector<std::pair<std::uint32_t, std::int64_t>> triangle_counts() const {
        std::vector<std::int64_t> count(adj_.size(), 0);
        auto rank_less = [this](std::uint32_t x, std::uint32_t y) {
            std::size_t dx = adj_[x].size(), dy = adj_[y].size();
            return dx != dy ? dx < dy : x < y;
        };

        for (std::uint32_t u = 0; u < adj_.size(); ++u) {
            const auto& nu = adj_[u];
            for (std::uint32_t v : nu) {
                if (!rank_less(u, v)) continue;
                const auto& nv = adj_[v];
                const auto& small = nu.size() < nv.size() ? nu : nv;
                const auto& large = nu.size() < nv.size() ? nv : nu;
                for (std::uint32_t w : small) {
                    if (!rank_less(v, w)) continue;
                    if (std::binary_search(large.begin(), large.end(), w)) {
                        ++count[u];
                        ++count[v];
                        ++count[w];
                    }
                }
            }
        }

        std::vector<std::pair<std::uint32_t, std::int64_t>> out;
        for (std::uint32_t v = 0; v < adj_.size(); ++v)
            if (present_[v]) out.emplace_back(v, count[v]);
        return out;
    }

    std::int64_t total_triangles() const {
        std::int64_t s = 0;
        for (const auto& [id, c] : triangle_counts()) s += c;
        return s / 3;
    }

private:
    static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    std::vector<std::vector<std::uint32_t>> adj_;
    std::vector<bool> present_;
    std::size_t edges_ = 0;
};

// content id -> (user -> earliest interaction time in the window)
inline std::unordered_map<std::uint32_t, std::unordered_map<std::uint32_t, Timestamp>>
earliest_interactions(const std::vector<MultiEdgeUC>& uc_edges) {
    std::unordered_map<std::uint32_t, std::unordered_map<std::uint32_t, Timestamp>> per_content;
    for (const auto& e : uc_edges) {
        auto& m = per_content[e.c.v];
        auto it = m.find(e.u.v);
        if (it == m.end() || e.t < it->second) m[e.u.v] = e.t;
    }
    return per_content;
}

// Counts influence triangles for one content given its users' earliest
// interaction times: unordered user pairs where the later interactor
// follows the earlier one (either direction on a tie).
inline std::int64_t influence_pairs(const std::unordered_map<std::uint32_t, Timestamp>& users,
                                    const SocialGraph& social) {
    if (users.size() < 2) return 0;
    std::vector<std::pair<std::uint32_t, Timestamp>> us(users.begin(), users.end());
    std::sort(us.begin(), us.end());
    std::int64_t n = 0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        for (std::size_t j = i + 1; j < us.size(); ++j) {
            UserId a{us[i].first}, b{us[j].first};
            Timestamp ta = us[i].second, tb = us[j].second;
            UserId later = ta >= tb ? a : b;
            UserId earlier = ta >= tb ? b : a;
            if (social.influence_base(later, earlier, ta == tb)) ++n;
        }
    }
    return n;
}

}  // namespace detail

// Number of interaction triangles containing user u (distinct node triples
// pairwise connected by at least one interaction edge).
inline std::int64_t interaction_cardinality(const InteractionMultigraph& g, UserId u) {
    if (g.mode != MultigraphMode::UU) throw ValidationError("interaction_cardinality needs UU mode");
    detail::SimpleGraph sg(g.uu_edges);
    for (const auto& [id, c] : sg.triangle_counts())
        if (id == u.v) return c;
    return 0;
}

// Number of influence triangles of content c: pairs of users interacting
// with c in the window where the later (by earliest interaction time)
// follows the earlier.
inline std::int64_t influence_cardinality(const InteractionMultigraph& g, const SocialGraph& social,
                                          ContentId c) {
    if (g.mode != MultigraphMode::UC) throw ValidationError("influence_cardinality needs UC mode");
    auto per_content = detail::earliest_interactions(g.uc_edges);
    auto it = per_content.find(c.v);
    if (it == per_content.end()) return 0;
    return detail::influence_pairs(it->second, social);
}

// All cardinalities plus the normalized histogram. The denominator is
// n_override when given (nodes that never appear in the window still count
// at cardinality zero), else the number of nodes seen.
inline GroundTruth exact_distribution(const InteractionMultigraph& g,
                                      const SocialGraph* social = nullptr,
                                      std::optional<std::int64_t> n_override = std::nullopt) {
    GroundTruth gt;
    if (g.mode == MultigraphMode::UU) {
        detail::SimpleGraph sg(g.uu_edges);
        gt.cardinalities = sg.triangle_counts();
    } else {
        if (!social) throw ValidationError("UC mode requires a social graph");
        for (const auto& [cid, users] : detail::earliest_interactions(g.uc_edges))
            gt.cardinalities.emplace_back(cid, detail::influence_pairs(users, *social));
        std::sort(gt.cardinalities.begin(), gt.cardinalities.end());
    }

    std::int64_t seen = static_cast<std::int64_t>(gt.cardinalities.size());
    std::int64_t positive = 0;
    std::int64_t maxc = 0;
    for (const auto& [id, c] : gt.cardinalities) {
        if (c > 0) ++positive;
        maxc = std::max(maxc, c);
    }
    gt.n = n_override.value_or(seen);
    if (gt.n < positive)
        throw ValidationError("denominator smaller than the number of nodes with triangles");
    gt.W = static_cast<int>(maxc);

    if (gt.n == 0) {
        gt.theta = {1.0};
        gt.W = 0;
        return gt;
    }
    gt.theta.assign(static_cast<std::size_t>(gt.W) + 1, 0.0);
    for (const auto& [id, c] : gt.cardinalities)
        if (c > 0) gt.theta[static_cast<std::size_t>(c)] += 1.0;
    gt.theta[0] = static_cast<double>(gt.n - positive);
    for (double& x : gt.theta) x /= static_cast<double>(gt.n);
    return gt;
}

struct WindowVolume {
    std::int64_t window_index = 0;
    std::int64_t activities = 0;
    std::int64_t triangles = 0;
};

// Per-window (UU activity count, distinct triangle count); reproduces the
// volume/triangle correlation study.
inline std::vector<WindowVolume> triangle_count_series(const std::vector<ActivityWindow>& windows) {
    std::vector<WindowVolume> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        auto g = build_multigraph(w, MultigraphMode::UU);
        detail::SimpleGraph sg(g.uu_edges);
        out.push_back({w.index, static_cast<std::int64_t>(g.uu_edges.size()), sg.total_triangles()});
    }
    return out;
}

// Pearson correlation between two equal-length series.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("pearson needs two equal series");
    double mx = vec_sum(x) / static_cast<double>(x.size());
    double my = vec_sum(y) / static_cast<double>(y.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace triadic
