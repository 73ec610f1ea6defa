#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lemma_checks.hpp"
#include "parallel.hpp"
#include "rational.hpp"

namespace linematch {

inline constexpr std::int64_t kOracleMaxN = 7;
inline constexpr int kOracleMaxGridK = 6;
/// Enumerated outcomes per configuration are capped at 2^kOracleOutcomeBits.
inline constexpr int kOracleOutcomeBits = 24;

/// log2 of the number of joint request outcomes on a 2^-k grid in round r.
inline int oracle_outcome_bits(const RoundConfig& c, int k) {
    return static_cast<int>((c.r + k) * c.subinterval_count());
}

/// Finest grid exponent <= kOracleMaxGridK whose enumeration fits the outcome cap.
inline int oracle_grid_k(const RoundConfig& c) {
    for (int k = kOracleMaxGridK; k >= 0; --k)
        if (oracle_outcome_bits(c, k) <= kOracleOutcomeBits) return k;
    throw std::length_error("oracle_grid_k: no grid fits the state-space cap");
}

/// Exact minimum expected cost of serving round r from `config` when the
/// whole round is known before any request is served.
///
/// Request m is uniform over the 2^(r+k) grid points of [m 2^r, (m+1) 2^r).
/// For each joint outcome the best batch matching into the free servers is
/// found; the value is the exact average over all outcomes. A randomized
/// policy cannot beat the per-outcome minimum, so this is the optimal value
/// over all policies.
inline Rational exact_round_game_value(const RoundConfig& config, int grid_k_small, unsigned workers = 1) {
    config.validate();
    if (config.n > kOracleMaxN) throw std::length_error("exact_round_game_value: n > 7");
    if (grid_k_small < 0 || grid_k_small > kOracleMaxGridK) throw std::length_error("exact_round_game_value: grid_k_small > 6");
    const int bits = oracle_outcome_bits(config, grid_k_small);
    if (bits > kOracleOutcomeBits) throw std::length_error("exact_round_game_value: state space cap exceeded");
    const std::size_t m = static_cast<std::size_t>(config.subinterval_count());
    const std::size_t f = config.free_servers.size();
    if (f < m) throw std::invalid_argument("exact_round_game_value: fewer free servers than requests");

    const int k = grid_k_small;
    const std::int64_t per = std::int64_t{1} << (config.r + k);  // grid points per subinterval
    std::vector<std::int64_t> tgt(f);
    for (std::size_t s = 0; s < f; ++s) tgt[s] = config.free_servers[s] << k;

    // Partition by the leftmost request's position; each branch enumerates the rest.
    std::vector<std::int64_t> partial(static_cast<std::size_t>(per), 0);
    parallel_for(static_cast<std::size_t>(per), workers, [&](std::size_t first) {
        const std::size_t width = f - m + 1;
        std::vector<std::int64_t> pts(m), prev(width), cur(width);
        std::vector<std::int64_t> digit(m, 0);
        digit[0] = static_cast<std::int64_t>(first);
        std::int64_t sum = 0;
        for (;;) {
            for (std::size_t q = 0; q < m; ++q)
                pts[q] = (static_cast<std::int64_t>(q) * per) + digit[q];
            // Requests are sorted by construction (disjoint subintervals in order).
            std::fill(prev.begin(), prev.end(), 0);
            for (std::size_t q = 0; q < m; ++q) {
                std::int64_t best = std::numeric_limits<std::int64_t>::max();
                for (std::size_t w = 0; w < width; ++w) {
                    const std::int64_t d = pts[q] - tgt[q + w];
                    const std::int64_t use = prev[w] + (d < 0 ? -d : d);
                    best = std::min(best, use);
                    cur[w] = best;
                }
                std::swap(prev, cur);
            }
            sum += prev[width - 1];
            bool advanced = false;
            for (std::size_t q = m; q-- > 1;) {
                if (++digit[q] < per) {
                    advanced = true;
                    break;
                }
                digit[q] = 0;
            }
            if (!advanced) break;
        }
        partial[first] = sum;
    });
    __int128 total = 0;
    for (auto s : partial) total += s;
    // value = total / (outcomes * 2^k)
    const int den_bits = bits + k;
    if (den_bits > 62 || total > INT64_MAX) throw std::overflow_error("exact_round_game_value: result overflow");
    return {static_cast<std::int64_t>(total), std::int64_t{1} << den_bits};
}

/// Free-server configuration of reachable size minimising config_lower_bound.
/// Ties resolve to the lexicographically first subset.
inline RoundConfig worst_config_search(std::int64_t n, int r) {
    const int i = exponent_of(n);
    if (n > 15) throw std::length_error("worst_config_search: n > 15");
    if (r < 1 || r > i) throw std::invalid_argument("worst_config_search: round out of range");
    const std::int64_t free = RoundConfig::reachable_free_count(n, r);
    auto sel = detail::first_combination(free);
    std::optional<RoundConfig> best;
    Rational best_value;
    do {
        RoundConfig c{r, n, sel};
        const Rational v = config_lower_bound(c);
        if (!best || v < best_value) {
            best = std::move(c);
            best_value = v;
        }
    } while (detail::next_combination(sel, n));
    return *best;
}

/// Verifies, for every round and every reachable configuration, that the
/// optimal batch policy's exact expected cost exceeds (n+1)/12, and that it
/// dominates the analytic bound up to the discretization slack.
inline LemmaReport oracle_report(std::int64_t n, unsigned workers = 1) {
    const int i = exponent_of(n);
    if (n > kOracleMaxN) throw std::length_error("oracle_report: n > 7");
    const Rational target(n + 1, 12);
    LemmaReport rep{"lemma2_game_value", n, 0, std::numeric_limits<double>::infinity(), target.to_double(), 0.0, ">",
                    true, "", {}};
    std::int64_t dominance_failures = 0;
    for (int r = 1; r <= i; ++r) {
        const std::int64_t free = RoundConfig::reachable_free_count(n, r);
        auto sel = detail::first_combination(free);
        Rational round_min;
        bool have = false, round_ok = true;
        int k_used = 0;
        do {
            RoundConfig c{r, n, sel};
            k_used = oracle_grid_k(c);
            const Rational v = exact_round_game_value(c, k_used, workers);
            const Rational slack(c.subinterval_count(), std::int64_t{1} << k_used);
            if (v < config_lower_bound(c) - slack) {
                ++dominance_failures;
                round_ok = false;
            }
            if (!(v > target)) round_ok = false;
            if (!have || v < round_min) {
                round_min = v;
                have = true;
            }
            ++rep.trials;
        } while (detail::next_combination(sel, n));
        rep.rows.push_back({"round " + std::to_string(r) + " (grid_k=" + std::to_string(k_used) + ")", round_min.to_double(),
                            target.to_double(), 0.0, round_ok});
        rep.pass = rep.pass && round_ok;
        rep.observed = std::min(rep.observed, round_min.to_double());
    }
    rep.note = "exhaustive over reachable configurations; dominance failures=" + std::to_string(dominance_failures);
    return rep;
}

}  // namespace linematch
