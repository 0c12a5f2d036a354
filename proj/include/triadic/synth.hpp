#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "triadic/common.hpp"
#include "triadic/oracle.hpp"
#include "triadic/random.hpp"
#include "triadic/stream.hpp"

namespace triadic {

// Synthetic stream generator. Planted mode realizes a requested cardinality
// histogram {c -> node count} exactly with node-disjoint gadgets:
//   - pairs of cardinality-c nodes become "books" (a shared base edge with
//     c page nodes, each page a cardinality-1 node),
//   - an odd leftover hub becomes a "fan" (c private partner pairs),
//   - remaining cardinality-1 nodes form standalone triangles,
//   - cardinality-0 nodes are matched with triangle-free edges.
// Pages/partners are drawn from the cardinality-1 budget, so the realized
// population histogram equals the request or generation fails with the
// violated constraint. Shuffle mode replays an existing graph's edges in
// random order.
struct SynthSpec {
    enum class Mode : std::uint8_t { Planted, Shuffle } mode = Mode::Planted;
    std::map<int, std::int64_t> histogram;          // planted: cardinality -> node count
    std::vector<std::pair<std::uint32_t, std::uint32_t>> input_edges;  // shuffle
    int windows = 1;
    Timestamp window_length = 86400;
    int burst_window = -1;          // if >= 0, plant extra triangles there
    std::int64_t burst_triangles = 0;
    std::uint64_t seed = 0;
};

struct SynthResult {
    Dataset dataset;         // stream + (undirected) social graph
    std::vector<double> theta;  // exact base-window distribution
    std::int64_t n_nodes = 0;   // population (the distribution's denominator)
    std::int64_t n_positive = 0;  // nodes with cardinality >= 1
    std::size_t graph_edges = 0;  // distinct edges of the base window graph
};

namespace detail {

struct PlantedGraph {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::int64_t n_nodes = 0;
    std::int64_t n_positive = 0;
    std::vector<double> theta;
};

inline PlantedGraph plant_histogram(const std::map<int, std::int64_t>& histogram,
                                    std::uint64_t seed) {
    std::int64_t n_total = 0;
    std::int64_t weighted = 0;
    for (const auto& [c, m] : histogram) {
        if (c < 0 || m < 0) throw ValidationError("histogram entries must be nonnegative");
        n_total += m;
        weighted += static_cast<std::int64_t>(c) * m;
    }
    if (n_total == 0) throw ValidationError("empty histogram");
    if (weighted % 3 != 0)
        throw InfeasibleError(
            "infeasible histogram: sum_c c*count(c) = " + std::to_string(weighted) +
            " must be divisible by 3 (every triangle contributes 3 node incidences); "
            "adjust the cardinality-1 count");

    // page/partner demand against the cardinality-1 supply
    std::int64_t supply = 0;
    auto it1 = histogram.find(1);
    if (it1 != histogram.end()) supply = it1->second;
    std::int64_t demand = 0;
    for (const auto& [c, m] : histogram) {
        if (c < 2 || m == 0) continue;
        demand += (m / 2) * c;        // books: c pages per hub pair
        if (m % 2) demand += 2 * c;   // fan: 2c partners for the odd hub
    }
    if (demand > supply)
        throw InfeasibleError("infeasible histogram: gadgets need " + std::to_string(demand) +
                              " cardinality-1 nodes but only " + std::to_string(supply) +
                              " are requested");
    std::int64_t leftover = supply - demand;
    if (leftover % 3 != 0)
        throw InfeasibleError("infeasible histogram: " + std::to_string(leftover) +
                              " cardinality-1 nodes remain, not groupable into triangles");

    // shuffled id assignment so structure is not correlated with node ids
    Rng rng = make_rng(seed, 0x51);
    std::vector<std::uint32_t> ids(static_cast<std::size_t>(n_total));
    std::iota(ids.begin(), ids.end(), 0u);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t next = 0;
    auto take = [&]() { return ids[next++]; };

    PlantedGraph g;
    g.n_nodes = n_total;

    // collect hub ids per class and the card-1 / card-0 pools
    std::vector<std::uint32_t> ones, zeros;
    for (std::int64_t k = 0; k < supply; ++k) ones.push_back(take());
    if (auto it0 = histogram.find(0); it0 != histogram.end())
        for (std::int64_t k = 0; k < it0->second; ++k) zeros.push_back(take());

    std::size_t one_next = 0;
    auto take_one = [&]() { return ones[one_next++]; };

    auto add_edge = [&](std::uint32_t a, std::uint32_t b) { g.edges.emplace_back(a, b); };

    for (const auto& [c, m] : histogram) {
        if (c < 2 || m == 0) continue;
        std::vector<std::uint32_t> hubs;
        for (std::int64_t k = 0; k < m; ++k) hubs.push_back(take());
        std::size_t h = 0;
        while (h + 1 < hubs.size()) {  // books
            std::uint32_t a = hubs[h], b = hubs[h + 1];
            add_edge(a, b);
            for (int k = 0; k < c; ++k) {
                std::uint32_t p = take_one();
                add_edge(a, p);
                add_edge(b, p);
            }
            h += 2;
        }
        if (h < hubs.size()) {  // fan for the odd hub
            std::uint32_t u = hubs[h];
            for (int k = 0; k < c; ++k) {
                std::uint32_t x = take_one(), y = take_one();
                add_edge(u, x);
                add_edge(u, y);
                add_edge(x, y);
            }
        }
    }

    // standalone triangles for the remaining cardinality-1 nodes
    while (ones.size() - one_next >= 3) {
        std::uint32_t a = take_one(), b = take_one(), cc = take_one();
        add_edge(a, b);
        add_edge(b, cc);
        add_edge(a, cc);
    }

    // cardinality-0 nodes: triangle-free matching, pendant for an odd one
    std::size_t z = 0;
    while (z + 1 < zeros.size()) {
        add_edge(zeros[z], zeros[z + 1]);
        z += 2;
    }
    if (z < zeros.size()) {
        if (g.edges.empty())
            throw InfeasibleError("a single cardinality-0 node cannot appear in a stream");
        add_edge(zeros[z], g.edges.front().first);
    }

    g.n_positive = n_total - (histogram.count(0) ? histogram.at(0) : 0);

    int maxc = histogram.rbegin()->first;
    g.theta.assign(static_cast<std::size_t>(maxc) + 1, 0.0);
    for (const auto& [c, m] : histogram)
        g.theta[static_cast<std::size_t>(c)] = static_cast<double>(m) / static_cast<double>(n_total);
    return g;
}

}  // namespace detail

// Emits `windows` copies of the base graph, each window's edges in random
// order with uniform timestamps; the burst window (if any) additionally
// receives burst_triangles fresh triangles over existing positive nodes.
// The social graph is the undirected union of all interaction edges, so
// interactions always run along social edges.
inline SynthResult synth_stream(const SynthSpec& spec) {
    if (spec.windows < 1) throw ValidationError("synth: windows must be >= 1");
    if (spec.window_length == 0) throw ValidationError("synth: window_length must be positive");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> base_edges;
    SynthResult res;

    if (spec.mode == SynthSpec::Mode::Planted) {
        auto g = detail::plant_histogram(spec.histogram, spec.seed);
        base_edges = std::move(g.edges);
        res.theta = std::move(g.theta);
        res.n_nodes = g.n_nodes;
        res.n_positive = g.n_positive;
    } else {
        if (spec.input_edges.empty()) throw ValidationError("synth shuffle mode: no input edges");
        base_edges = spec.input_edges;
    }

    Rng rng = make_rng(spec.seed, 0x52);

    // intern ids; "u<k>" naming
    std::uint32_t max_id = 0;
    for (auto [a, b] : base_edges) max_id = std::max({max_id, a, b});
    Dataset& ds = res.dataset;
    for (std::uint32_t k = 0; k <= max_id; ++k) ds.user("u" + std::to_string(k));

    std::vector<std::pair<std::uint32_t, std::uint32_t>> social_edges = base_edges;

    // positive-cardinality endpoints, for burst planting
    std::vector<std::uint32_t> endpoints;
    for (auto [a, b] : base_edges) {
        endpoints.push_back(a);
        endpoints.push_back(b);
    }
    std::sort(endpoints.begin(), endpoints.end());
    endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());

    for (int w = 0; w < spec.windows; ++w) {
        Timestamp start = static_cast<Timestamp>(w) * spec.window_length;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges = base_edges;
        if (w == spec.burst_window && spec.burst_triangles > 0) {
            if (endpoints.size() < 3) throw ValidationError("burst planting needs >= 3 nodes");
            std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
            for (std::int64_t t = 0; t < spec.burst_triangles; ++t) {
                std::uint32_t a = endpoints[pick(rng)], b = endpoints[pick(rng)],
                              c = endpoints[pick(rng)];
                if (a == b || b == c || a == c) {
                    --t;
                    continue;
                }
                edges.emplace_back(a, b);
                edges.emplace_back(b, c);
                edges.emplace_back(a, c);
                social_edges.emplace_back(a, b);
                social_edges.emplace_back(b, c);
                social_edges.emplace_back(a, c);
            }
        }
        std::uniform_int_distribution<Timestamp> pick_t(start, start + spec.window_length - 1);
        std::vector<SocialActivity> acts;
        acts.reserve(edges.size());
        for (auto [a, b] : edges) {
            bool flip = (rng() & 1) != 0;
            acts.push_back(SocialActivity::user_user(UserId{flip ? b : a}, UserId{flip ? a : b},
                                                     pick_t(rng)));
        }
        std::stable_sort(acts.begin(), acts.end(),
                         [](const SocialActivity& x, const SocialActivity& y) { return x.t < y.t; });
        for (auto& a : acts) ds.stream.push_back(a);
    }

    // undirected social graph over the union of interaction edges
    std::sort(social_edges.begin(), social_edges.end());
    social_edges.erase(std::unique(social_edges.begin(), social_edges.end()), social_edges.end());
    ds.social = SocialGraph(false);
    for (auto [a, b] : social_edges)
        if (a != b) ds.social.add_edge(UserId{a}, UserId{b});

    std::sort(base_edges.begin(), base_edges.end());
    base_edges.erase(std::unique(base_edges.begin(), base_edges.end()), base_edges.end());
    res.graph_edges = base_edges.size();

    if (spec.mode == SynthSpec::Mode::Shuffle) {
        // exact distribution of the input graph
        ActivityWindow w0;
        w0.index = 0;
        w0.start = 0;
        w0.end = spec.window_length;
        for (const auto& a : ds.stream)
            if (a.t < w0.end) w0.activities.push_back(a);
        auto gt = exact_distribution(build_multigraph(w0, MultigraphMode::UU));
        res.theta = gt.theta;
        res.n_nodes = gt.n;
        std::int64_t pos = 0;
        for (const auto& [id, c] : gt.cardinalities)
            if (c > 0) ++pos;
        res.n_positive = pos;
    }
    return res;
}

}  // namespace triadic
