#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adversary.hpp"
#include "coord.hpp"
#include "offline.hpp"
#include "rng.hpp"

namespace linematch {

enum class AlgorithmKind { greedy_nearest, batch_round_optimal, permutation, random_free };

inline constexpr AlgorithmKind kAllAlgorithms[] = {AlgorithmKind::greedy_nearest, AlgorithmKind::batch_round_optimal,
                                                   AlgorithmKind::permutation, AlgorithmKind::random_free};

inline std::string_view to_string(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::greedy_nearest: return "greedy_nearest";
        case AlgorithmKind::batch_round_optimal: return "batch_round_optimal";
        case AlgorithmKind::permutation: return "permutation";
        case AlgorithmKind::random_free: return "random_free";
    }
    return "?";
}

inline AlgorithmKind parse_algorithm(std::string_view s) {
    for (auto k : kAllAlgorithms)
        if (to_string(k) == s) return k;
    if (s == "greedy") return AlgorithmKind::greedy_nearest;
    if (s == "batch") return AlgorithmKind::batch_round_optimal;
    if (s == "random") return AlgorithmKind::random_free;
    throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::greedy_nearest;
    std::uint64_t seed = 0;

    /// Batch kinds see a whole round before serving any request in it.
    [[nodiscard]] bool is_batch() const { return kind == AlgorithmKind::batch_round_optimal; }
};

struct ServeResult {
    std::size_t server = 0;
    Coord cost;
};

/// Free/matched bookkeeping over a sorted server list.
class ServerPool {
public:
    explicit ServerPool(std::span<const Coord> servers) : servers_(servers.begin(), servers.end()) {
        if (!std::is_sorted(servers_.begin(), servers_.end()))
            throw std::invalid_argument("ServerPool: servers must be sorted");
        for (std::size_t s = 0; s < servers_.size(); ++s) free_.insert(free_.end(), s);
    }

    [[nodiscard]] std::size_t size() const { return servers_.size(); }
    [[nodiscard]] std::size_t free_count() const { return free_.size(); }
    [[nodiscard]] bool is_free(std::size_t s) const { return free_.contains(s); }
    [[nodiscard]] const Coord& position(std::size_t s) const { return servers_.at(s); }
    [[nodiscard]] const std::vector<Coord>& servers() const { return servers_; }
    [[nodiscard]] const std::set<std::size_t>& free_set() const { return free_; }
    [[nodiscard]] const std::map<std::size_t, std::size_t>& matched() const { return matched_; }

    [[nodiscard]] std::vector<std::size_t> free_sorted() const { return {free_.begin(), free_.end()}; }

    /// Nearest free server to `x`; equidistant left/right goes left.
    [[nodiscard]] std::size_t nearest_free(const Coord& x) const {
        if (free_.empty()) throw std::logic_error("ServerPool: no free server");
        const auto first_ge = static_cast<std::size_t>(std::lower_bound(servers_.begin(), servers_.end(), x) - servers_.begin());
        const auto right = free_.lower_bound(first_ge);
        if (right == free_.begin()) return *right;
        const auto left = std::prev(right);
        if (right == free_.end()) return *left;
        return abs_distance(x, servers_[*left]) <= abs_distance(x, servers_[*right]) ? *left : *right;
    }

    void take(std::size_t server, std::size_t request_index) {
        if (free_.erase(server) == 0) throw std::logic_error("ServerPool: server already matched");
        if (!matched_.emplace(request_index, server).second)
            throw std::logic_error("ServerPool: request already matched");
    }

private:
    std::vector<Coord> servers_;
    std::set<std::size_t> free_;
    std::map<std::size_t, std::size_t> matched_;
};

inline ServeResult serve_request_greedy(ServerPool& pool, const Coord& request, std::size_t request_index) {
    if (pool.free_count() == 0) throw std::logic_error("serve_request_greedy: empty pool");
    const std::size_t s = pool.nearest_free(request);
    pool.take(s, request_index);
    return {s, abs_distance(request, pool.position(s))};
}

namespace detail {

inline int common_scale(std::span<const Coord> a, std::span<const Coord> b) {
    int k = 0;
    for (const auto& c : a) k = std::max(k, c.scale());
    for (const auto& c : b) k = std::max(k, c.scale());
    return k;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("cost accumulation overflow");
    return out;
}

inline std::int64_t absdiff(std::int64_t a, std::int64_t b) { return a < b ? b - a : a - b; }

/// Minimum-cost injection of sorted points into sorted targets on a line,
/// using the non-crossing structure: dp[i][j] = best over first i points and
/// first j targets. Returns target rank per point rank.
inline std::vector<std::size_t> monotone_injection(std::span<const std::int64_t> pts, std::span<const std::int64_t> tgt) {
    const std::size_t m = pts.size();
    const std::size_t f = tgt.size();
    if (m > f) throw std::invalid_argument("monotone_injection: more points than targets");
    if (m == 0) return {};
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
    const std::size_t width = f - m + 1;  // point i may use targets i .. i + width - 1
    std::vector<std::int64_t> prev(width, 0), cur(width, inf);
    std::vector<std::uint8_t> take(m * width, 0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t w = 0; w < width; ++w) {
            const std::size_t j = i + w;
            const std::int64_t skip = w > 0 ? cur[w - 1] : inf;
            const std::int64_t use = checked_add(prev[w], absdiff(pts[i], tgt[j]));
            if (use <= skip) {
                cur[w] = use;
                take[i * width + w] = 1;
            } else {
                cur[w] = skip;
            }
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), inf);
    }
    std::vector<std::size_t> out(m);
    std::size_t i = m, w = width - 1;
    while (i > 0) {
        if (take[(i - 1) * width + w]) {
            out[i - 1] = i - 1 + w;
            --i;
        } else {
            --w;
        }
    }
    return out;
}

}  // namespace detail

/// Serves a whole round at once with a minimum-cost matching of its requests
/// into the currently free servers. `first_request_index` numbers the requests
/// for the pool's matched map. Assignment pairs are (round-local request, server).
inline Assignment serve_round_batch_optimal(ServerPool& pool, std::span<const Coord> requests,
                                            std::size_t first_request_index = 0) {
    if (requests.size() > pool.free_count())
        throw std::invalid_argument("serve_round_batch_optimal: more requests than free servers");
    const auto free = pool.free_sorted();
    std::vector<Coord> free_pos;
    free_pos.reserve(free.size());
    for (auto s : free) free_pos.push_back(pool.position(s));
    const int k = detail::common_scale(requests, free_pos);

    std::vector<std::size_t> order(requests.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return requests[a] < requests[b]; });
    std::vector<std::int64_t> pts, tgt;
    pts.reserve(order.size());
    tgt.reserve(free_pos.size());
    for (auto o : order) pts.push_back(requests[o].numerator_at(k));
    for (const auto& c : free_pos) tgt.push_back(c.numerator_at(k));

    const auto inj = detail::monotone_injection(pts, tgt);
    Assignment out;
    out.pairs.resize(requests.size());
    out.per_pair_cost.resize(requests.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t req = order[rank];
        const std::size_t srv = free[inj[rank]];
        out.pairs[req] = {req, srv};
        out.per_pair_cost[req] = abs_distance(requests[req], pool.position(srv));
    }
    for (std::size_t req = 0; req < requests.size(); ++req) {
        pool.take(out.pairs[req].second, first_request_index + req);
        out.total_cost += out.per_pair_cost[req];
    }
    return out;
}

/// State of the Permutation algorithm: an offline-optimal matching M_t of all
/// requests seen so far, represented by the sorted request list and the
/// sorted set of servers it uses (paired in rank order).
struct PermutationState {
    ServerPool pool;
    std::vector<Coord> seen_sorted;
    std::vector<std::size_t> used_sorted;

    explicit PermutationState(std::span<const Coord> servers) : pool(servers) {}

    /// Records requests already matched by other means (e.g. a known prefix
    /// served optimally) so that M_t covers them.
    void absorb(const Coord& request, std::size_t server) {
        seen_sorted.insert(std::upper_bound(seen_sorted.begin(), seen_sorted.end(), request), request);
        used_sorted.insert(std::upper_bound(used_sorted.begin(), used_sorted.end(), server), server);
    }
};

/// Cost of M_t on its sorted representation; used by tests and diagnostics.
inline Coord permutation_matching_cost(const PermutationState& st) {
    Coord total;
    for (std::size_t x = 0; x < st.seen_sorted.size(); ++x)
        total += abs_distance(st.seen_sorted[x], st.pool.position(st.used_sorted[x]));
    return total;
}

/// Serves `request` with the one server that enters the new optimal matching
/// M_t = M_{t-1} + {s}. Among equal-cost choices the leftmost free server wins.
inline ServeResult serve_request_permutation(PermutationState& st, const Coord& request, std::size_t request_index) {
    auto& pool = st.pool;
    if (pool.free_count() == 0) throw std::logic_error("serve_request_permutation: empty pool");

    std::vector<Coord> a = st.seen_sorted;
    a.insert(std::upper_bound(a.begin(), a.end(), request), request);
    const std::size_t t = a.size();
    const auto& b = st.used_sorted;

    std::vector<Coord> scratch(a);
    for (auto s : b) scratch.push_back(pool.position(s));
    for (auto s : pool.free_set()) scratch.push_back(pool.position(s));
    const int k = detail::common_scale(scratch, {});

    auto num = [k](const Coord& c) { return c.numerator_at(k); };
    // pre[p] = sum_{x<p} |a_x - b_x|,  suf[p] = sum_{x>p} |a_x - b_{x-1}|
    std::vector<std::int64_t> pre(t, 0), suf(t, 0);
    for (std::size_t p = 1; p < t; ++p)
        pre[p] = detail::checked_add(pre[p - 1], detail::absdiff(num(a[p - 1]), num(pool.position(b[p - 1]))));
    for (std::size_t p = t - 1; p-- > 0;)
        suf[p] = detail::checked_add(suf[p + 1], detail::absdiff(num(a[p + 1]), num(pool.position(b[p]))));

    std::optional<std::size_t> best;
    std::int64_t best_cost = 0;
    std::size_t rank = 0;  // used servers strictly left of the candidate
    for (auto s : pool.free_set()) {
        while (rank < b.size() && b[rank] < s) ++rank;
        const std::int64_t cost =
            detail::checked_add(detail::checked_add(pre[rank], detail::absdiff(num(a[rank]), num(pool.position(s)))), suf[rank]);
        if (!best || cost < best_cost) {
            best = s;
            best_cost = cost;
        }
    }

    pool.take(*best, request_index);
    st.seen_sorted = std::move(a);
    st.used_sorted.insert(std::upper_bound(st.used_sorted.begin(), st.used_sorted.end(), *best), *best);
    return {*best, abs_distance(request, pool.position(*best))};
}

struct RandomFreeState {
    ServerPool pool;
    Stream stream;

    RandomFreeState(std::span<const Coord> servers, std::uint64_t seed, std::uint32_t trial)
        : pool(servers), stream(seed, {StreamDomain::algorithm, trial, 0, 0}) {}
};

/// Uniformly random free server, drawn from the state's own stream.
inline ServeResult serve_request_random_free(RandomFreeState& st, const Coord& request, std::size_t request_index) {
    if (st.pool.free_count() == 0) throw std::logic_error("serve_request_random_free: empty pool");
    const auto pick = st.stream.uniform_below(st.pool.free_count());
    const std::size_t s = *std::next(st.pool.free_set().begin(), static_cast<std::ptrdiff_t>(pick));
    st.pool.take(s, request_index);
    return {s, abs_distance(request, st.pool.position(s))};
}

/// Outcome of playing one algorithm over one instance.
struct RunStats {
    std::int64_t n = 0;
    AlgorithmKind algorithm = AlgorithmKind::greedy_nearest;
    std::uint32_t trial = 0;
    int prefix_rounds = 0;
    std::vector<Coord> round_costs;               // index r-1
    std::vector<std::size_t> free_before_round;   // index r-1
    std::vector<std::size_t> server_of_request;   // request order of all_requests()
    Coord online_total;
    Coord offline_total;

    /// Ratio online/offline; 1 when both are 0; nullopt when only offline is 0.
    [[nodiscard]] std::optional<double> ratio() const {
        if (offline_total == Coord{}) {
            if (online_total == Coord{}) return 1.0;
            return std::nullopt;
        }
        return online_total.to_double() / offline_total.to_double();
    }

    /// Cost of the rounds served online (after the known prefix).
    [[nodiscard]] Coord suffix_cost() const {
        Coord c;
        for (std::size_t r = static_cast<std::size_t>(prefix_rounds); r < round_costs.size(); ++r) c += round_costs[r];
        return c;
    }
};

/// Plays every round of `inst` with `spec`. The first `prefix_rounds` rounds
/// are known in advance and served as one batch by an optimal matching.
inline RunStats run(const Instance& inst, const AlgorithmSpec& spec, int prefix_rounds = 0) {
    const int rounds = static_cast<int>(inst.rounds.size());
    if (prefix_rounds < 0 || prefix_rounds > rounds) throw std::invalid_argument("run: prefix_rounds out of range");

    RunStats st;
    st.n = inst.n;
    st.algorithm = spec.kind;
    st.trial = inst.params.trial;
    st.prefix_rounds = prefix_rounds;
    st.round_costs.assign(static_cast<std::size_t>(rounds), Coord{});
    st.free_before_round.assign(static_cast<std::size_t>(rounds), 0);
    st.server_of_request.assign(inst.request_count(), 0);

    std::vector<std::size_t> round_start(static_cast<std::size_t>(rounds) + 1, 0);
    for (int r = 0; r < rounds; ++r)
        round_start[static_cast<std::size_t>(r) + 1] = round_start[static_cast<std::size_t>(r)] + inst.rounds[static_cast<std::size_t>(r)].entries.size();

    PermutationState perm(inst.servers);
    RandomFreeState rnd(inst.servers, spec.seed, inst.params.trial);
    ServerPool plain(inst.servers);
    ServerPool& pool = spec.kind == AlgorithmKind::permutation ? perm.pool
                       : spec.kind == AlgorithmKind::random_free ? rnd.pool
                                                                 : plain;

    if (prefix_rounds > 0) {
        std::vector<Coord> known;
        for (int r = 0; r < prefix_rounds; ++r)
            for (const auto& e : inst.rounds[static_cast<std::size_t>(r)].entries) known.push_back(e.request);
        st.free_before_round[0] = pool.free_count();
        const Assignment a = serve_round_batch_optimal(pool, known, 0);
        int r = 0;
        for (std::size_t q = 0; q < known.size(); ++q) {
            while (q >= round_start[static_cast<std::size_t>(r) + 1]) ++r;
            st.round_costs[static_cast<std::size_t>(r)] += a.per_pair_cost[q];
            st.server_of_request[q] = a.pairs[q].second;
            if (spec.kind == AlgorithmKind::permutation) perm.absorb(known[q], a.pairs[q].second);
        }
        for (int rr = 1; rr < prefix_rounds; ++rr) st.free_before_round[static_cast<std::size_t>(rr)] = st.free_before_round[0];
    }

    for (int r = prefix_rounds; r < rounds; ++r) {
        const auto& rd = inst.rounds[static_cast<std::size_t>(r)];
        const std::size_t base = round_start[static_cast<std::size_t>(r)];
        st.free_before_round[static_cast<std::size_t>(r)] = pool.free_count();
        Coord& cost = st.round_costs[static_cast<std::size_t>(r)];
        if (spec.is_batch()) {
            std::vector<Coord> reqs;
            reqs.reserve(rd.entries.size());
            for (const auto& e : rd.entries) reqs.push_back(e.request);
            const Assignment a = serve_round_batch_optimal(pool, reqs, base);
            cost = a.total_cost;
            for (std::size_t q = 0; q < reqs.size(); ++q) st.server_of_request[base + q] = a.pairs[q].second;
            continue;
        }
        for (std::size_t q = 0; q < rd.entries.size(); ++q) {
            const Coord& req = rd.entries[q].request;
            ServeResult res;
            switch (spec.kind) {
                case AlgorithmKind::greedy_nearest: res = serve_request_greedy(pool, req, base + q); break;
                case AlgorithmKind::permutation: res = serve_request_permutation(perm, req, base + q); break;
                case AlgorithmKind::random_free: res = serve_request_random_free(rnd, req, base + q); break;
                case AlgorithmKind::batch_round_optimal: throw std::logic_error("unreachable");
            }
            cost += res.cost;
            st.server_of_request[base + q] = res.server;
        }
    }

    for (const auto& c : st.round_costs) st.online_total += c;
    st.offline_total = sorted_matching_cost(inst.servers, all_requests(inst)).total_cost;
    return st;
}

}  // namespace linematch
