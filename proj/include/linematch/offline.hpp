#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coord.hpp"

namespace linematch {

/// A perfect matching of points (requests or origins) to servers.
struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (request_index, server_index)
    std::vector<Coord> per_pair_cost;
    Coord total_cost;
};

inline bool is_perfect_matching(const Assignment& a, std::size_t size) {
    if (a.pairs.size() != size || a.per_pair_cost.size() != size) return false;
    std::vector<bool> req(size, false), srv(size, false);
    for (auto [p, s] : a.pairs) {
        if (p >= size || s >= size || req[p] || srv[s]) return false;
        req[p] = srv[s] = true;
    }
    return true;
}

/// Pairs the l-th leftmost point with the l-th leftmost server. On a line this
/// non-crossing pairing is a minimum-cost perfect matching.
inline Assignment sorted_matching_cost(std::span<const Coord> servers, std::span<const Coord> points) {
    if (servers.size() != points.size()) throw std::invalid_argument("sorted_matching_cost: size mismatch");
    if (!std::is_sorted(servers.begin(), servers.end()))
        throw std::invalid_argument("sorted_matching_cost: servers must be sorted");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

    Assignment out;
    out.pairs.reserve(points.size());
    out.per_pair_cost.reserve(points.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const Coord c = abs_distance(points[order[rank]], servers[rank]);
        out.pairs.emplace_back(order[rank], rank);
        out.per_pair_cost.push_back(c);
        out.total_cost += c;
    }
    return out;
}

inline constexpr std::size_t kBruteForceCap = 9;

/// Exhaustive minimum over all n! perfect matchings. Verification oracle only.
inline Assignment brute_force_min_cost(std::span<const Coord> servers, std::span<const Coord> points) {
    if (servers.size() != points.size()) throw std::invalid_argument("brute_force_min_cost: size mismatch");
    if (servers.size() > kBruteForceCap) throw std::length_error("brute_force_min_cost: more than 9 points");
    const std::size_t n = servers.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> best = perm;
    Coord best_cost;
    bool have = false;
    do {
        Coord cost;
        for (std::size_t p = 0; p < n; ++p) cost += abs_distance(points[p], servers[perm[p]]);
        if (!have || cost < best_cost) {
            best_cost = cost;
            best = perm;
            have = true;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Assignment out;
    for (std::size_t p = 0; p < n; ++p) {
        out.pairs.emplace_back(p, best[p]);
        out.per_pair_cost.push_back(abs_distance(points[p], servers[best[p]]));
    }
    out.total_cost = best_cost;
    return out;
}

}  // namespace linematch
