#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "adversary.hpp"
#include "algorithms.hpp"
#include "offline.hpp"

using namespace linematch;

namespace {

std::vector<Coord> integers(std::int64_t n, int k = 8) {
    std::vector<Coord> out;
    for (std::int64_t j = 1; j <= n; ++j) out.push_back(coord_from_integer(j, k));
    return out;
}

Coord dy(std::int64_t num, int k = 8) { return Coord::from_numerator(num, k); }

// Minimum over every injection of `pts` into `targets` (recursive enumeration).
Coord brute_injection(const std::vector<Coord>& pts, const std::vector<Coord>& targets) {
    std::vector<bool> used(targets.size(), false);
    std::optional<Coord> best;
    std::function<void(std::size_t, Coord)> rec = [&](std::size_t q, Coord acc) {
        if (best && *best < acc) return;
        if (q == pts.size()) {
            if (!best || acc < *best) best = acc;
            return;
        }
        for (std::size_t s = 0; s < targets.size(); ++s) {
            if (used[s]) continue;
            used[s] = true;
            rec(q + 1, acc + abs_distance(pts[q], targets[s]));
            used[s] = false;
        }
    };
    rec(0, Coord{});
    return *best;
}

}  // namespace

TEST(Greedy, UniqueNearest) {
    ServerPool pool(integers(3));
    const Coord req = snap_to_grid(2.4, 20, 4.0);
    const ServeResult res = serve_request_greedy(pool, req, 0);
    EXPECT_EQ(res.server, 1u);
    EXPECT_EQ(res.cost, req - coord_from_integer(2, 0));
    EXPECT_FALSE(pool.is_free(1));
    EXPECT_EQ(pool.matched().at(0), 1u);
}

TEST(Greedy, TieGoesLeft) {
    ServerPool pool(integers(3));
    serve_request_greedy(pool, coord_from_integer(2, 0), 0);  // takes server 2
    const ServeResult res = serve_request_greedy(pool, coord_from_integer(2, 0), 1);
    EXPECT_EQ(res.server, 0u);
    EXPECT_EQ(res.cost, coord_from_integer(1, 0));
}

TEST(Greedy, EmptyPoolThrows) {
    ServerPool pool(integers(1));
    serve_request_greedy(pool, dy(10), 0);
    EXPECT_THROW(serve_request_greedy(pool, dy(10), 1), std::logic_error);
}

TEST(Greedy, CostIsLinearScanMinimum) {
    Stream s(12, {});
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(s.uniform_below(20));
        ServerPool pool(integers(n));
        const auto taken = s.uniform_below(static_cast<std::uint64_t>(n));
        for (std::uint64_t x = 0; x < taken; ++x)
            serve_request_greedy(pool, dy(static_cast<std::int64_t>(s.uniform_below(static_cast<std::uint64_t>(n + 1) << 8))), x);
        const Coord req = dy(static_cast<std::int64_t>(s.uniform_below(static_cast<std::uint64_t>(n + 1) << 8)));
        std::optional<Coord> best;
        for (auto f : pool.free_set()) {
            const Coord d = abs_distance(req, pool.position(f));
            if (!best || d < *best) best = d;
        }
        ASSERT_EQ(serve_request_greedy(pool, req, 1000).cost, *best);
    }
}

TEST(BatchOptimal, SingleRequestMatchesGreedy) {
    ServerPool a(integers(5)), b(integers(5));
    const std::vector req{dy(700)};
    const Assignment batch = serve_round_batch_optimal(a, req);
    const ServeResult greedy = serve_request_greedy(b, req[0], 0);
    EXPECT_EQ(batch.total_cost, greedy.cost);
    EXPECT_EQ(batch.pairs[0].second, greedy.server);
}

TEST(BatchOptimal, TwoRequestsExample) {
    ServerPool pool(integers(3));
    const std::vector reqs{dy(480), dy(544)};  // 1.875, 2.125
    const Assignment a = serve_round_batch_optimal(pool, reqs);
    EXPECT_EQ(a.total_cost, coord_from_integer(1, 0));
    EXPECT_EQ(a.total_cost, brute_injection(reqs, integers(3)));
    EXPECT_EQ(pool.free_count(), 1u);
}

TEST(BatchOptimal, TooManyRequestsThrows) {
    ServerPool pool(integers(1));
    const std::vector reqs{dy(1), dy(2)};
    EXPECT_THROW(serve_round_batch_optimal(pool, reqs), std::invalid_argument);
}

TEST(BatchOptimal, EqualsBruteForceInjectionOn300Rounds) {
    Stream s(99, {});
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(s.uniform_below(9));
        ServerPool pool(integers(n));
        // Take a random subset first so the free set is irregular.
        for (std::int64_t j = 0; j < n; ++j)
            if (pool.free_count() > 1 && s.uniform_below(3) == 0) pool.take(static_cast<std::size_t>(j), 100 + static_cast<std::size_t>(j));
        const auto m = 1 + s.uniform_below(std::min<std::uint64_t>(pool.free_count(), 8));
        std::vector<Coord> reqs;
        for (std::uint64_t q = 0; q < m; ++q)
            reqs.push_back(dy(static_cast<std::int64_t>(s.uniform_below(static_cast<std::uint64_t>(n + 1) << 8))));
        std::vector<Coord> free_pos;
        for (auto f : pool.free_set()) free_pos.push_back(pool.position(f));
        const Coord expect = brute_injection(reqs, free_pos);
        const Assignment a = serve_round_batch_optimal(pool, reqs);
        ASSERT_EQ(a.total_cost, expect) << "trial " << trial;
        std::set<std::size_t> servers;
        for (auto [q, srv] : a.pairs) servers.insert(srv);
        ASSERT_EQ(servers.size(), reqs.size());
    }
}

TEST(Permutation, FirstRequestTakesNearest) {
    PermutationState st(integers(5));
    const ServeResult res = serve_request_permutation(st, dy(3 * 256 + 100), 0);
    EXPECT_EQ(res.server, 2u);
}

TEST(Permutation, SecondRequestShiftsToNewServer) {
    PermutationState st(integers(2));
    const ServeResult first = serve_request_permutation(st, dy(288), 0);   // 1.125
    EXPECT_EQ(first.server, 0u);
    const ServeResult second = serve_request_permutation(st, dy(320), 1);  // 1.25
    EXPECT_EQ(second.server, 1u);
    EXPECT_EQ(second.cost, dy(192));  // 0.75
}

// For every prefix of random request sequences, the servers ALG has used form
// an optimal matching of the prefix (checked against brute force over injections).
TEST(Permutation, UsedServersAlwaysFormOfflineOptimum) {
    Stream s(4242, {});
    for (int trial = 0; trial < 150; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(s.uniform_below(8));
        const auto servers = integers(n);
        PermutationState st(servers);
        std::vector<Coord> seen;
        std::set<std::size_t> alg_used;
        for (std::int64_t t = 0; t < n; ++t) {
            const Coord req = dy(static_cast<std::int64_t>(s.uniform_below(static_cast<std::uint64_t>(n + 1) << 8)));
            seen.push_back(req);
            const ServeResult res = serve_request_permutation(st, req, static_cast<std::size_t>(t));
            ASSERT_TRUE(alg_used.insert(res.server).second);
            ASSERT_EQ(std::set<std::size_t>(st.used_sorted.begin(), st.used_sorted.end()), alg_used);
            ASSERT_EQ(permutation_matching_cost(st), brute_injection(seen, servers)) << "trial " << trial << " t=" << t;
        }
    }
}

TEST(RandomFree, SingleFreeServer) {
    RandomFreeState st(integers(3), 1, 0);
    st.pool.take(0, 10);
    st.pool.take(2, 11);
    EXPECT_EQ(serve_request_random_free(st, dy(5), 0).server, 1u);
    EXPECT_THROW(serve_request_random_free(st, dy(5), 1), std::logic_error);
}

TEST(RandomFree, ReproducibleForFixedSeed) {
    RandomFreeState a(integers(30), 77, 3), b(integers(30), 77, 3);
    for (std::size_t q = 0; q < 30; ++q)
        EXPECT_EQ(serve_request_random_free(a, dy(100), q).server, serve_request_random_free(b, dy(100), q).server);
}

TEST(RandomFree, UniformOverFourFreeServers) {
    std::array<int, 4> counts{};
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        RandomFreeState fresh(integers(4), 5, static_cast<std::uint32_t>(t));
        ++counts[serve_request_random_free(fresh, dy(256), 0).server];
    }
    for (int c : counts) EXPECT_NEAR(c / double(trials), 0.25, 0.01);
}

TEST(Run, DegenerateZeroCostInstance) {
    Instance inst;
    inst.params = GenParams::for_exponent(1, 0);
    inst.n = 1;
    inst.servers = {coord_from_integer(1, inst.params.grid_k)};
    const Coord one = coord_from_integer(1, inst.params.origin_k());
    inst.rounds = {Round{1, 2, {RoundEntry{0, one, snap_to_grid(one, inst.params.grid_k)}}}};
    ASSERT_NO_THROW(validate_instance(inst));
    const RunStats st = run(inst, {AlgorithmKind::greedy_nearest, 0});
    EXPECT_EQ(st.online_total, Coord{});
    EXPECT_EQ(st.offline_total, Coord{});
    ASSERT_TRUE(st.ratio().has_value());
    EXPECT_EQ(*st.ratio(), 1.0);
}

TEST(Run, RatioUndefinedWhenOnlyOfflineIsZero) {
    RunStats st;
    st.online_total = coord_from_integer(1, 0);
    EXPECT_FALSE(st.ratio().has_value());
}

TEST(Run, DeterministicPerRoundCosts) {
    const Instance inst = generate(GenParams::for_exponent(2, 2024));
    for (auto kind : kAllAlgorithms) {
        const RunStats a = run(inst, {kind, 9});
        const RunStats b = run(inst, {kind, 9});
        for (std::size_t r = 0; r < a.round_costs.size(); ++r) EXPECT_TRUE(a.round_costs[r].identical(b.round_costs[r]));
    }
}

TEST(Run, FeasibilityAndOnlineAtLeastOffline) {
    for (int i = 1; i <= 7; ++i)
        for (std::uint32_t t = 0; t < 5; ++t)
            for (auto order : {RequestOrder::left_to_right, RequestOrder::shuffled}) {
                GenParams p = GenParams::for_exponent(i, 31337, t);
                p.request_order = order;
                const Instance inst = generate(p);
                for (auto kind : kAllAlgorithms) {
                    const RunStats st = run(inst, {kind, 5});
                    std::set<std::size_t> servers(st.server_of_request.begin(), st.server_of_request.end());
                    ASSERT_EQ(static_cast<std::int64_t>(servers.size()), inst.n);
                    for (int r = 1; r <= i; ++r)
                        ASSERT_EQ(static_cast<std::int64_t>(st.free_before_round[static_cast<std::size_t>(r - 1)]),
                                  ((inst.n + 1) >> (r - 1)) - 1);
                    ASSERT_GE(st.online_total, st.offline_total) << to_string(kind);
                    Coord sum;
                    for (const auto& c : st.round_costs) sum += c;
                    ASSERT_EQ(sum, st.online_total);
                }
            }
}

TEST(Run, RoundOneBatchNeverWorseThanGreedy) {
    for (std::uint32_t t = 0; t < 200; ++t) {
        const Instance inst = generate(GenParams::for_exponent(5, 77, t));
        const RunStats batch = run(inst, {AlgorithmKind::batch_round_optimal, 0});
        const RunStats greedy = run(inst, {AlgorithmKind::greedy_nearest, 0});
        ASSERT_LE(batch.round_costs[0], greedy.round_costs[0]);
    }
}

TEST(Run, PrefixModes) {
    const Instance inst = generate(GenParams::for_exponent(5, 3, 1));
    const RunStats all_known = run(inst, {AlgorithmKind::greedy_nearest, 0}, 5);
    EXPECT_EQ(all_known.online_total, all_known.offline_total);
    EXPECT_EQ(all_known.suffix_cost(), Coord{});
    const RunStats none = run(inst, {AlgorithmKind::greedy_nearest, 0}, 0);
    const RunStats plain = run(inst, {AlgorithmKind::greedy_nearest, 0});
    EXPECT_TRUE(none.online_total.identical(plain.online_total));
    for (auto kind : kAllAlgorithms) {
        const RunStats st = run(inst, {kind, 0}, 2);
        std::set<std::size_t> servers(st.server_of_request.begin(), st.server_of_request.end());
        EXPECT_EQ(static_cast<std::int64_t>(servers.size()), inst.n);
        EXPECT_GE(st.online_total, st.offline_total);
    }
    EXPECT_THROW(run(inst, {}, 6), std::invalid_argument);
}
