#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coord.hpp"
#include "rational.hpp"
#include "rng.hpp"

namespace linematch {

enum class RequestOrder { left_to_right, shuffled };

inline std::string_view to_string(RequestOrder o) {
    return o == RequestOrder::left_to_right ? "left_to_right" : "shuffled";
}

inline RequestOrder parse_request_order(std::string_view s) {
    if (s == "left_to_right") return RequestOrder::left_to_right;
    if (s == "shuffled") return RequestOrder::shuffled;
    throw std::invalid_argument("unknown request order: " + std::string(s));
}

/// Largest supported exponent i (n = 2^i - 1); keeps subinterval indices in 32 bits.
inline constexpr int kMaxExponent = 30;

/// Default grid exponent: min(n, 40), lowered so that a full run's total cost
/// (at most n(n+1) in value) still fits a 64-bit numerator.
inline int default_grid_k(int i) {
    const std::int64_t n = (std::int64_t{1} << i) - 1;
    std::int64_t k = std::min<std::int64_t>(n, 40);
    k = std::min<std::int64_t>(k, 61 - 2 * i);
    return static_cast<int>(std::max<std::int64_t>(k, 0));
}

/// Parameters of one draw from the adversarial request distribution.
struct GenParams {
    int i = 1;
    int grid_k = 1;
    std::uint64_t seed = 0;
    std::uint32_t trial = 0;
    RequestOrder request_order = RequestOrder::left_to_right;

    static GenParams for_exponent(int i, std::uint64_t seed, std::uint32_t trial = 0) {
        GenParams p;
        p.i = i;
        p.grid_k = default_grid_k(i);
        p.seed = seed;
        p.trial = trial;
        return p;
    }

    [[nodiscard]] std::int64_t n() const { return (std::int64_t{1} << i) - 1; }

    /// Scale at which origins are drawn before snapping to the request grid.
    [[nodiscard]] int origin_k() const { return std::min(grid_k + 16, 61 - i); }

    void validate() const {
        if (i < 1 || i > kMaxExponent) throw std::invalid_argument("GenParams: i must be in [1, 30]");
        if (grid_k < 0) throw std::invalid_argument("GenParams: grid_k must be non-negative");
        if (grid_k + i + 1 > kMaxScale) throw std::invalid_argument("GenParams: grid_k + i + 1 must be <= 62");
    }

    friend bool operator==(const GenParams&, const GenParams&) = default;
};

struct RoundEntry {
    std::int64_t subinterval = 0;
    Coord origin;   // at origin_k
    Coord request;  // at grid_k
};

struct Round {
    int r = 1;
    std::int64_t subinterval_length = 2;
    std::vector<RoundEntry> entries;  // arrival order
};

struct Instance {
    std::int64_t n = 0;
    std::vector<Coord> servers;
    std::vector<Round> rounds;
    GenParams params;

    [[nodiscard]] std::size_t request_count() const {
        std::size_t c = 0;
        for (const auto& rd : rounds) c += rd.entries.size();
        return c;
    }
};

/// Exponent i with n = 2^i - 1; throws if n is not of that form.
inline int exponent_of(std::int64_t n) {
    if (n < 1 || ((n + 1) & n) != 0) throw std::invalid_argument("n must be of the form 2^i - 1");
    return std::countr_zero(static_cast<std::uint64_t>(n + 1));
}

/// Draws one instance. Deterministic in `params`; every subinterval of every
/// round reads its own Philox stream.
inline Instance generate(const GenParams& params) {
    params.validate();
    Instance inst;
    inst.params = params;
    inst.n = params.n();
    inst.servers.reserve(static_cast<std::size_t>(inst.n));
    for (std::int64_t j = 1; j <= inst.n; ++j) inst.servers.push_back(coord_from_integer(j, params.grid_k));

    const int ok = params.origin_k();
    for (int r = 1; r <= params.i; ++r) {
        Round round;
        round.r = r;
        round.subinterval_length = std::int64_t{1} << r;
        const std::int64_t count = std::int64_t{1} << (params.i - r);
        round.entries.reserve(static_cast<std::size_t>(count));
        for (std::int64_t m = 0; m < count; ++m) {
            Stream s(params.seed, {StreamDomain::origin, params.trial, static_cast<std::uint32_t>(r),
                                   static_cast<std::uint32_t>(m)});
            const auto offset = static_cast<std::int64_t>(s.bits(r + ok));
            const Coord origin = Coord::from_numerator((m << (r + ok)) + offset, ok);
            round.entries.push_back({m, origin, snap_to_grid(origin, params.grid_k)});
        }
        if (params.request_order == RequestOrder::shuffled) {
            Stream s(params.seed, {StreamDomain::arrival_order, params.trial, static_cast<std::uint32_t>(r), 0});
            for (std::size_t a = round.entries.size(); a > 1; --a) {
                const auto b = static_cast<std::size_t>(s.uniform_below(a));
                std::swap(round.entries[a - 1], round.entries[b]);
            }
        }
        inst.rounds.push_back(std::move(round));
    }
    return inst;
}

/// Checks every structural invariant of an instance; throws std::invalid_argument on the first violation.
inline void validate_instance(const Instance& inst) {
    const auto& p = inst.params;
    p.validate();
    if (inst.n != p.n()) throw std::invalid_argument("Instance: n does not match params");
    if (static_cast<std::int64_t>(inst.servers.size()) != inst.n) throw std::invalid_argument("Instance: server count");
    for (std::int64_t j = 1; j <= inst.n; ++j)
        if (inst.servers[static_cast<std::size_t>(j - 1)] != coord_from_integer(j, 0))
            throw std::invalid_argument("Instance: servers must be 1..n");
    if (static_cast<int>(inst.rounds.size()) != p.i) throw std::invalid_argument("Instance: round count");
    const Coord lo = coord_from_integer(0, 0);
    const Coord hi = coord_from_integer(inst.n + 1, 0);
    for (int r = 1; r <= p.i; ++r) {
        const auto& rd = inst.rounds[static_cast<std::size_t>(r - 1)];
        const std::int64_t count = std::int64_t{1} << (p.i - r);
        if (rd.r != r || rd.subinterval_length != (std::int64_t{1} << r) ||
            static_cast<std::int64_t>(rd.entries.size()) != count)
            throw std::invalid_argument("Instance: malformed round " + std::to_string(r));
        std::vector<bool> seen(static_cast<std::size_t>(count), false);
        for (const auto& e : rd.entries) {
            if (e.subinterval < 0 || e.subinterval >= count || seen[static_cast<std::size_t>(e.subinterval)])
                throw std::invalid_argument("Instance: bad subinterval index");
            seen[static_cast<std::size_t>(e.subinterval)] = true;
            const Coord a = coord_from_integer(e.subinterval * rd.subinterval_length, 0);
            const Coord b = coord_from_integer((e.subinterval + 1) * rd.subinterval_length, 0);
            if (e.origin < a || !(e.origin < b)) throw std::invalid_argument("Instance: origin outside subinterval");
            if (e.request.scale() != p.grid_k) throw std::invalid_argument("Instance: request not on grid");
            if (e.request < a || b < e.request || e.request < lo || hi < e.request)
                throw std::invalid_argument("Instance: request outside subinterval closure");
            if (!e.request.identical(snap_to_grid(e.origin, p.grid_k)))
                throw std::invalid_argument("Instance: request is not the snapped origin");
        }
    }
}

/// Probability that an origin uniform on [left, left + len) lies strictly left of `point`.
inline Rational left_probability(std::int64_t point, std::int64_t left, std::int64_t len) {
    const std::int64_t inside = std::clamp<std::int64_t>(point - left, 0, len);
    return {inside, len};
}

/// E[g_ell] two ways: the closed form ell - ell/(n+1), and the sum of
/// per-origin probabilities of falling left of server ell.
struct GExpectation {
    Rational closed_form;
    Rational clamp_sum;

    [[nodiscard]] bool agree() const { return closed_form == clamp_sum; }
};

inline void check_ell(std::int64_t ell, std::int64_t n) {
    exponent_of(n);
    if (ell < 1 || ell > n) throw std::out_of_range("ell outside [1, n]");
}

inline GExpectation expected_g(std::int64_t ell, std::int64_t n) {
    check_ell(ell, n);
    const int i = exponent_of(n);
    GExpectation out{Rational(ell) - Rational(ell, n + 1), Rational(0)};
    for (int r = 1; r <= i; ++r) {
        const std::int64_t len = std::int64_t{1} << r;
        for (std::int64_t m = 0; m < (std::int64_t{1} << (i - r)); ++m)
            out.clamp_sum += left_probability(ell, m * len, len);
    }
    return out;
}

/// Var[g_ell] as the sum of Bernoulli variances p(1-p) over all n origins.
inline Rational variance_g(std::int64_t ell, std::int64_t n) {
    check_ell(ell, n);
    const int i = exponent_of(n);
    Rational total(0);
    for (int r = 1; r <= i; ++r) {
        const std::int64_t len = std::int64_t{1} << r;
        for (std::int64_t m = 0; m < (std::int64_t{1} << (i - r)); ++m) {
            const Rational p = left_probability(ell, m * len, len);
            total += p * (Rational(1) - p);
        }
    }
    return total;
}

/// All n origins in ascending order (stable with respect to round, then arrival order).
inline std::vector<Coord> origin_sorted(const Instance& inst) {
    std::vector<Coord> out;
    out.reserve(inst.request_count());
    for (const auto& rd : inst.rounds)
        for (const auto& e : rd.entries) out.push_back(e.origin);
    std::stable_sort(out.begin(), out.end());
    return out;
}

/// All n requests in round-then-arrival order.
inline std::vector<Coord> all_requests(const Instance& inst) {
    std::vector<Coord> out;
    out.reserve(inst.request_count());
    for (const auto& rd : inst.rounds)
        for (const auto& e : rd.entries) out.push_back(e.request);
    return out;
}

}  // namespace linematch
