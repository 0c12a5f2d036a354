#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "triadic/common.hpp"

namespace triadic {

enum class ActivityKind : std::uint8_t { UserUser, UserContent };

// One timestamped interaction event, the stream element. Exactly one of
// target_user / target_content is meaningful, selected by kind.
struct SocialActivity {
    ActivityKind kind = ActivityKind::UserUser;
    UserId source{};
    UserId target_user{};
    ContentId target_content{};
    Timestamp t = 0;

    static SocialActivity user_user(UserId u, UserId v, Timestamp t) {
        if (u == v) throw ValidationError("self-loop user-user activity");
        SocialActivity a;
        a.kind = ActivityKind::UserUser;
        a.source = u;
        a.target_user = v;
        a.t = t;
        return a;
    }

    static SocialActivity user_content(UserId u, ContentId c, Timestamp t) {
        SocialActivity a;
        a.kind = ActivityKind::UserContent;
        a.source = u;
        a.target_content = c;
        a.t = t;
        return a;
    }
};

// Follow/friend graph. Directed mode stores follower -> followee; undirected
// mode stores each edge in both adjacency lists. Lists are kept sorted so
// membership is a binary search.
class SocialGraph {
public:
    explicit SocialGraph(bool directed = true) : directed_(directed) {}

    bool directed() const { return directed_; }
    std::size_t num_users() const { return adj_.size(); }

    void ensure_user(UserId u) {
        if (u.v >= adj_.size()) {
            adj_.resize(u.v + 1);
            und_adj_.resize(u.v + 1);
        }
    }

    void add_edge(UserId a, UserId b) {
        if (a == b) throw ValidationError("self-loop social edge");
        ensure_user(a);
        ensure_user(b);
        insert_sorted(adj_[a.v], b);
        if (!directed_) insert_sorted(adj_[b.v], a);
        insert_sorted(und_adj_[a.v], b);
        insert_sorted(und_adj_[b.v], a);
    }

    // Directed: does a follow b?  Undirected: are a and b adjacent?
    bool has_follow(UserId a, UserId b) const {
        if (a.v >= adj_.size()) return false;
        const auto& n = adj_[a.v];
        return std::binary_search(n.begin(), n.end(), b);
    }

    // Relation in either direction.
    bool adjacent(UserId a, UserId b) const {
        if (a.v >= und_adj_.size()) return false;
        const auto& n = und_adj_[a.v];
        return std::binary_search(n.begin(), n.end(), b);
    }

    // Followees in directed mode, friends in undirected mode.
    const std::vector<UserId>& neighbors(UserId u) const {
        static const std::vector<UserId> kEmpty;
        return u.v < adj_.size() ? adj_[u.v] : kEmpty;
    }

    // Neighbors ignoring direction; the subgraph-sampling notion of "the
    // user's neighbors".
    const std::vector<UserId>& und_neighbors(UserId u) const {
        static const std::vector<UserId> kEmpty;
        return u.v < und_adj_.size() ? und_adj_[u.v] : kEmpty;
    }

    // Influence-triangle base check: the later interactor must follow the
    // earlier one; ties count if either direction exists.
    bool influence_base(UserId later, UserId earlier, bool tie) const {
        if (!directed_) return adjacent(later, earlier);
        if (tie) return has_follow(later, earlier) || has_follow(earlier, later);
        return has_follow(later, earlier);
    }

private:
    static void insert_sorted(std::vector<UserId>& v, UserId x) {
        auto it = std::lower_bound(v.begin(), v.end(), x);
        if (it == v.end() || *it != x) v.insert(it, x);
    }

    bool directed_;
    std::vector<std::vector<UserId>> adj_;
    std::vector<std::vector<UserId>> und_adj_;
};

struct ActivityWindow {
    std::int64_t index = 0;
    Timestamp start = 0;
    Timestamp end = 0;
    std::vector<SocialActivity> activities;
};

enum class MultigraphMode : std::uint8_t { UU, UC };

struct MultiEdgeUU {
    UserId a, b;
    Timestamp t;
};

struct MultiEdgeUC {
    UserId u;
    ContentId c;
    Timestamp t;
};

// The window's interactions as a multigraph; multiplicity is preserved
// (edges are a multiset), nodes are whatever endpoints the window touched.
struct InteractionMultigraph {
    MultigraphMode mode = MultigraphMode::UU;
    std::vector<MultiEdgeUU> uu_edges;
    std::vector<MultiEdgeUC> uc_edges;

    std::size_t edge_count() const {
        return mode == MultigraphMode::UU ? uu_edges.size() : uc_edges.size();
    }
};

// Holds both interners so user and content tokens never collide, plus the
// social graph and the decoded stream.
struct Dataset {
    IdPool users;
    IdPool contents;
    SocialGraph social{true};
    std::vector<SocialActivity> stream;

    UserId user(std::string_view token) { return UserId{users.intern(token)}; }
    ContentId content(std::string_view token) { return ContentId{contents.intern(token)}; }
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline Timestamp parse_timestamp(std::string_view tok, std::size_t line_no) {
    Timestamp t = 0;
    if (tok.empty()) throw ParseError("empty timestamp", line_no);
    for (char ch : tok) {
        if (ch < '0' || ch > '9') throw ParseError("bad timestamp '" + std::string(tok) + "'", line_no);
        t = t * 10 + static_cast<Timestamp>(ch - '0');
    }
    return t;
}

}  // namespace detail

// Stream record: `<uu|uc> <source> <target> <timestamp>`. Lines starting
// with '#' and blank lines are skipped by the file loader, not here.
inline SocialActivity parse_activity(std::string_view line, Dataset& ds, std::size_t line_no = 0) {
    auto tok = detail::split_ws(line);
    if (tok.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(tok.size()), line_no);
    Timestamp t = detail::parse_timestamp(tok[3], line_no);
    if (tok[0] == "uu") {
        UserId u = ds.user(tok[1]);
        UserId v = ds.user(tok[2]);
        if (u == v) throw ParseError("self-loop user-user activity '" + std::string(tok[1]) + "'", line_no);
        return SocialActivity::user_user(u, v, t);
    }
    if (tok[0] == "uc") {
        return SocialActivity::user_content(ds.user(tok[1]), ds.content(tok[2]), t);
    }
    throw ParseError("unknown activity kind '" + std::string(tok[0]) + "'", line_no);
}

inline void load_stream(std::istream& in, Dataset& ds) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        ds.stream.push_back(parse_activity(line, ds, line_no));
    }
}

inline void load_stream_file(const std::string& path, Dataset& ds) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open stream file: " + path);
    load_stream(in, ds);
}

// Social graph file: `<user> <user>` per line (follower followee when
// directed); a `# undirected` header line switches to symmetric storage.
inline void load_social(std::istream& in, Dataset& ds) {
    std::string line;
    std::size_t line_no = 0;
    bool directed = true;
    std::vector<std::pair<UserId, UserId>> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("undirected") != std::string::npos) directed = false;
            continue;
        }
        auto tok = detail::split_ws(line);
        if (tok.size() != 2) throw ParseError("expected 2 fields in social graph line", line_no);
        UserId a = ds.user(tok[0]);
        UserId b = ds.user(tok[1]);
        if (a == b) throw ParseError("self-loop social edge", line_no);
        edges.emplace_back(a, b);
    }
    ds.social = SocialGraph(directed);
    for (auto [a, b] : edges) ds.social.add_edge(a, b);
}

inline void load_social_file(const std::string& path, Dataset& ds) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open social graph file: " + path);
    load_social(in, ds);
}

enum class ReorderPolicy : std::uint8_t { Reject, Buffer };

struct WindowOptions {
    Timestamp window_length = 1;
    ReorderPolicy reorder = ReorderPolicy::Reject;
    std::size_t reorder_horizon = 1024;  // Buffer mode only
};

// Partitions a chronological stream into half-open windows
// [k*L, (k+1)*L). Every activity lands in window floor(t/L); empty windows
// between the first and last occupied one are emitted so the downstream
// time series has no gaps.
inline std::vector<ActivityWindow> window_partition(const std::vector<SocialActivity>& stream,
                                                    const WindowOptions& opt) {
    if (opt.window_length == 0) throw ValidationError("window_length must be positive");
    std::vector<ActivityWindow> out;
    if (stream.empty()) return out;

    std::vector<SocialActivity> ordered;
    ordered.reserve(stream.size());
    if (opt.reorder == ReorderPolicy::Reject) {
        Timestamp last = 0;
        bool first = true;
        for (const auto& a : stream) {
            if (!first && a.t < last)
                throw ValidationError("stream timestamps decrease (t=" + std::to_string(a.t) +
                                      " after " + std::to_string(last) + ")");
            last = a.t;
            first = false;
            ordered.push_back(a);
        }
    } else {
        // Bounded reordering: a min-heap of size `horizon`; anything forced
        // out must still be nondecreasing or the disorder exceeded the horizon.
        auto cmp = [](const SocialActivity& x, const SocialActivity& y) { return x.t > y.t; };
        std::priority_queue<SocialActivity, std::vector<SocialActivity>, decltype(cmp)> heap(cmp);
        Timestamp last = 0;
        bool first = true;
        auto emit = [&](const SocialActivity& a) {
            if (!first && a.t < last)
                throw ValidationError("stream disorder exceeds reorder horizon");
            last = a.t;
            first = false;
            ordered.push_back(a);
        };
        for (const auto& a : stream) {
            heap.push(a);
            if (heap.size() > opt.reorder_horizon) {
                emit(heap.top());
                heap.pop();
            }
        }
        while (!heap.empty()) {
            emit(heap.top());
            heap.pop();
        }
    }

    const Timestamp L = opt.window_length;
    std::int64_t first_idx = static_cast<std::int64_t>(ordered.front().t / L);
    std::int64_t last_idx = static_cast<std::int64_t>(ordered.back().t / L);
    out.reserve(static_cast<std::size_t>(last_idx - first_idx + 1));
    for (std::int64_t k = first_idx; k <= last_idx; ++k) {
        ActivityWindow w;
        w.index = k;
        w.start = static_cast<Timestamp>(k) * L;
        w.end = w.start + L;
        out.push_back(std::move(w));
    }
    for (const auto& a : ordered) {
        std::int64_t k = static_cast<std::int64_t>(a.t / L);
        out[static_cast<std::size_t>(k - first_idx)].activities.push_back(a);
    }
    return out;
}

// Filters the window's activities by kind into a multigraph; multiplicity
// is preserved exactly.
inline InteractionMultigraph build_multigraph(const ActivityWindow& w, MultigraphMode mode) {
    InteractionMultigraph g;
    g.mode = mode;
    for (const auto& a : w.activities) {
        if (mode == MultigraphMode::UU && a.kind == ActivityKind::UserUser)
            g.uu_edges.push_back({a.source, a.target_user, a.t});
        else if (mode == MultigraphMode::UC && a.kind == ActivityKind::UserContent)
            g.uc_edges.push_back({a.source, a.target_content, a.t});
    }
    return g;
}

}  // namespace triadic
