#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "algorithms.hpp"
#include "coord.hpp"
#include "offline.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace linematch {

/// Statistical tolerance used by every Monte Carlo check, in standard errors.
inline constexpr double kToleranceSe = 3.0;

/// Free servers entering round r, and the segments they cut each
/// round-r subinterval into.
struct RoundConfig {
    int r = 1;
    std::int64_t n = 1;
    std::vector<std::int64_t> free_servers;  // strictly increasing, within 1..n

    /// Number of free servers when every earlier round matched one request per subinterval.
    static std::int64_t reachable_free_count(std::int64_t n, int r) { return ((n + 1) >> (r - 1)) - 1; }

    void validate() const {
        const int i = exponent_of(n);
        if (r < 1 || r > i) throw std::invalid_argument("RoundConfig: round outside [1, log2(n+1)]");
        for (std::size_t x = 0; x < free_servers.size(); ++x) {
            if (free_servers[x] < 1 || free_servers[x] > n) throw std::invalid_argument("RoundConfig: server outside 1..n");
            if (x > 0 && free_servers[x] <= free_servers[x - 1])
                throw std::invalid_argument("RoundConfig: free servers must be strictly increasing");
        }
    }

    [[nodiscard]] std::int64_t subinterval_length() const { return std::int64_t{1} << r; }
    [[nodiscard]] std::int64_t subinterval_count() const { return (n + 1) >> r; }

    /// Segments of every subinterval, left to right. Only free servers strictly
    /// inside a subinterval split it; one on a boundary does not.
    [[nodiscard]] std::vector<std::vector<Segment>> segments() const {
        validate();
        const std::int64_t len = subinterval_length();
        std::vector<std::vector<Segment>> out(static_cast<std::size_t>(subinterval_count()));
        auto it = free_servers.begin();
        for (std::int64_t m = 0; m < subinterval_count(); ++m) {
            const std::int64_t a = m * len, b = a + len;
            std::int64_t left = a;
            while (it != free_servers.end() && *it <= a) ++it;
            for (; it != free_servers.end() && *it < b; ++it) {
                out[static_cast<std::size_t>(m)].emplace_back(coord_from_integer(left, 0), coord_from_integer(*it, 0));
                left = *it;
            }
            out[static_cast<std::size_t>(m)].emplace_back(coord_from_integer(left, 0), coord_from_integer(b, 0));
        }
        return out;
    }
};

struct SegmentSummary {
    std::int64_t count = 0;
    std::int64_t total_length = 0;
    std::int64_t sum_squares = 0;
};

inline SegmentSummary summarize_segments(const RoundConfig& config) {
    SegmentSummary s;
    for (const auto& sub : config.segments())
        for (const auto& seg : sub) {
            const std::int64_t d = seg.length().numerator_at(0);
            ++s.count;
            s.total_length += d;
            s.sum_squares += d * d;
        }
    return s;
}

/// Sum over all segments of d^2 / (4 * 2^r): a lower bound on the expected
/// cost of serving the round from this configuration.
inline Rational config_lower_bound(const RoundConfig& config) {
    const SegmentSummary s = summarize_segments(config);
    return {s.sum_squares, 4 * config.subinterval_length()};
}

struct ReportRow {
    std::string label;
    double observed = 0.0;
    double bound = 0.0;
    double standard_error = 0.0;
    bool pass = false;
};

/// Outcome of one verification. `relation` is "<=" or ">=" (or "<", ">"
/// for strict exact checks) and reads as `observed relation bound`.
struct LemmaReport {
    std::string lemma_id;
    std::int64_t n = 0;
    std::int64_t trials = 0;
    double observed = 0.0;
    double bound = 0.0;
    double standard_error = 0.0;
    std::string relation;
    bool pass = false;
    std::string note;
    std::vector<ReportRow> rows;
};

// ---------------------------------------------------------------------------
// Concentration of the origins around the servers.

inline LemmaReport lemma1_exact(std::int64_t n) {
    const int i = exponent_of(n);
    const Rational cap(i, 4);
    LemmaReport rep{"lemma1_exact", n, 0, 0.0, cap.to_double(), 0.0, "<=", true, "", {}};
    Rational worst(0);
    std::int64_t worst_ell = 0;
    std::int64_t mean_mismatch = 0;
    for (std::int64_t ell = 1; ell <= n; ++ell) {
        const GExpectation g = expected_g(ell, n);
        if (!g.agree()) {
            ++mean_mismatch;
            rep.pass = false;
        }
        const Rational var = variance_g(ell, n);
        if (var > cap) rep.pass = false;
        if (var > worst) {
            worst = var;
            worst_ell = ell;
        }
    }
    rep.observed = worst.to_double();
    rep.note = "max Var[g_l] = " + worst.str() + " at l=" + std::to_string(worst_ell) + "; mean identity mismatches: " +
               std::to_string(mean_mismatch);
    return rep;
}

struct McOptions {
    std::int64_t trials = 1000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::optional<int> grid_k;
    RequestOrder order = RequestOrder::left_to_right;
};

inline GenParams trial_params(int i, const McOptions& o, std::uint32_t trial) {
    GenParams p = GenParams::for_exponent(i, o.seed, trial);
    if (o.grid_k) p.grid_k = *o.grid_k;
    p.request_order = o.order;
    return p;
}

/// Largest over l of the mean distance between server l and the l-th leftmost origin.
inline LemmaReport lemma1_distance_mc(std::int64_t n, const McOptions& o) {
    const int i = exponent_of(n);
    if (o.trials < 100) throw std::invalid_argument("lemma1_distance_mc: trials must be >= 100");
    const auto T = static_cast<std::size_t>(o.trials);
    const auto N = static_cast<std::size_t>(n);
    std::vector<double> dist(T * N);
    parallel_for(T, o.workers, [&](std::size_t t) {
        const Instance inst = generate(trial_params(i, o, static_cast<std::uint32_t>(t)));
        const auto origins = origin_sorted(inst);
        for (std::size_t l = 0; l < N; ++l) dist[t * N + l] = abs_distance(inst.servers[l], origins[l]).to_double();
    });
    double best_mean = -1.0, best_se = 0.0;
    std::size_t best_l = 0;
    std::vector<double> column(T);
    for (std::size_t l = 0; l < N; ++l) {
        for (std::size_t t = 0; t < T; ++t) column[t] = dist[t * N + l];
        const MeanSe m = mean_se(column);
        if (m.mean > best_mean) {
            best_mean = m.mean;
            best_se = m.se;
            best_l = l + 1;
        }
    }
    const double bound = std::sqrt(static_cast<double>(i)) + 3.0;
    LemmaReport rep{"lemma1_distance", n, o.trials, best_mean, bound, best_se, "<=",
                    best_mean <= bound + kToleranceSe * best_se, "", {}};
    rep.note = "worst l=" + std::to_string(best_l);
    return rep;
}

/// Mean offline cost of matching servers to origins and to requests.
/// Returns {origins report, requests report}.
inline std::pair<LemmaReport, LemmaReport> offline_aggregate_mc(std::int64_t n, const McOptions& o) {
    const int i = exponent_of(n);
    const auto T = static_cast<std::size_t>(o.trials);
    std::vector<double> to_origins(T), to_requests(T);
    int grid_k = 0;
    parallel_for(T, o.workers, [&](std::size_t t) {
        const Instance inst = generate(trial_params(i, o, static_cast<std::uint32_t>(t)));
        std::vector<Coord> origins;
        for (const auto& rd : inst.rounds)
            for (const auto& e : rd.entries) origins.push_back(e.origin);
        to_origins[t] = sorted_matching_cost(inst.servers, origins).total_cost.to_double();
        to_requests[t] = sorted_matching_cost(inst.servers, all_requests(inst)).total_cost.to_double();
    });
    grid_k = trial_params(i, o, 0).grid_k;
    const double nd = static_cast<double>(n);
    const double base = nd * (std::sqrt(static_cast<double>(i)) + 3.0);
    const double slack = nd * std::ldexp(1.0, -grid_k);
    const MeanSe mo = mean_se(to_origins), mr = mean_se(to_requests);
    LemmaReport ro{"offline_origins", n, o.trials, mo.mean, base, mo.se, "<=", mo.mean <= base + kToleranceSe * mo.se,
                   "", {}};
    LemmaReport rr{"offline_requests", n, o.trials, mr.mean, base + slack, mr.se, "<=",
                   mr.mean <= base + slack + kToleranceSe * mr.se, "grid_k=" + std::to_string(grid_k), {}};
    return {ro, rr};
}

// ---------------------------------------------------------------------------
// Per-round cost: analytic bound for a fixed free-server configuration.

namespace detail {

/// Advances a strictly increasing selection from {1..n} to the next one in
/// lexicographic order. Returns false after the last.
inline bool next_combination(std::vector<std::int64_t>& sel, std::int64_t n) {
    const auto k = static_cast<std::int64_t>(sel.size());
    for (std::int64_t x = k - 1; x >= 0; --x) {
        auto& v = sel[static_cast<std::size_t>(x)];
        if (v < n - (k - 1 - x)) {
            ++v;
            for (std::int64_t y = x + 1; y < k; ++y) sel[static_cast<std::size_t>(y)] = sel[static_cast<std::size_t>(y - 1)] + 1;
            return true;
        }
    }
    return false;
}

inline std::vector<std::int64_t> first_combination(std::int64_t k) {
    std::vector<std::int64_t> sel(static_cast<std::size_t>(k));
    for (std::int64_t x = 0; x < k; ++x) sel[static_cast<std::size_t>(x)] = x + 1;
    return sel;
}

/// Uniform size-k subset of {1..n}, sorted.
inline std::vector<std::int64_t> sample_subset(std::int64_t n, std::int64_t k, Stream& s) {
    std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
    for (std::int64_t x = 0; x < n; ++x) pool[static_cast<std::size_t>(x)] = x + 1;
    for (std::int64_t x = 0; x < k; ++x) {
        const auto pick = x + static_cast<std::int64_t>(s.uniform_below(static_cast<std::uint64_t>(n - x)));
        std::swap(pool[static_cast<std::size_t>(x)], pool[static_cast<std::size_t>(pick)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline double binomial(std::int64_t n, std::int64_t k) {
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

}  // namespace detail

/// Every free-server configuration visited by lemma2_config_property passes
/// three checks: the bound exceeds (n+1)/12, the segment count respects
/// (n+1)/2^r + (n+1)/2^(r-1) - 1, and sum d^2 * s_r >= (sum d)^2.
struct ConfigCheck {
    bool bound_ok = true;
    bool count_ok = true;
    bool cauchy_schwarz_ok = true;
    Rational value;
    SegmentSummary segments;
};

inline ConfigCheck check_config(const RoundConfig& c) {
    ConfigCheck out;
    out.segments = summarize_segments(c);
    out.value = Rational(out.segments.sum_squares, 4 * c.subinterval_length());
    out.bound_ok = out.value > Rational(c.n + 1, 12);
    const std::int64_t max_segments = ((c.n + 1) >> c.r) + ((c.n + 1) >> (c.r - 1)) - 1;
    out.count_ok = out.segments.count <= max_segments;
    out.cauchy_schwarz_ok = static_cast<__int128>(out.segments.sum_squares) * out.segments.count >=
                            static_cast<__int128>(out.segments.total_length) * out.segments.total_length;
    return out;
}

struct ConfigSweep {
    std::optional<std::int64_t> samples;  // nullopt: exhaustive
    std::uint64_t seed = 1;
};

inline constexpr double kExhaustiveConfigCap = 5e6;

/// Checks the round-r analytic bound over all (or sampled) configurations with
/// the reachable number of free servers.
inline LemmaReport lemma2_config_property(std::int64_t n, int r, const ConfigSweep& sweep) {
    const int i = exponent_of(n);
    if (r < 1 || r > i) throw std::invalid_argument("lemma2_config_property: round out of range");
    const std::int64_t free = RoundConfig::reachable_free_count(n, r);
    LemmaReport rep{"lemma2_config_r" + std::to_string(r), n, 0, std::numeric_limits<double>::infinity(),
                    Rational(n + 1, 12).to_double(), 0.0, ">", true, "", {}};
    std::int64_t worst_count = 0, failures = 0;
    auto visit = [&](std::vector<std::int64_t> sel) {
        RoundConfig c{r, n, std::move(sel)};
        const ConfigCheck chk = check_config(c);
        ++rep.trials;
        if (!(chk.bound_ok && chk.count_ok && chk.cauchy_schwarz_ok)) ++failures;
        rep.observed = std::min(rep.observed, chk.value.to_double());
        worst_count = std::max(worst_count, chk.segments.count);
    };
    if (!sweep.samples) {
        if (detail::binomial(n, free) > kExhaustiveConfigCap)
            throw std::length_error("lemma2_config_property: too many configurations to enumerate");
        auto sel = detail::first_combination(free);
        do visit(sel);
        while (detail::next_combination(sel, n));
    } else {
        for (std::int64_t s = 0; s < *sweep.samples; ++s) {
            Stream st(sweep.seed, {StreamDomain::config_sample, 0, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(s)});
            visit(detail::sample_subset(n, free, st));
        }
    }
    rep.pass = failures == 0;
    const std::int64_t max_segments = ((n + 1) >> r) + ((n + 1) >> (r - 1)) - 1;
    rep.note = std::string(sweep.samples ? "sampled" : "exhaustive") + "; free=" + std::to_string(free) +
               "; max s_r=" + std::to_string(worst_count) + " (cap " + std::to_string(max_segments) +
               "); failing configs=" + std::to_string(failures);
    return rep;
}

/// lemma2_config_property over every round: exhaustive when the subset count
/// is small enough, otherwise `samples` uniform configurations per round.
inline std::vector<LemmaReport> lemma2_config_all_rounds(std::int64_t n, std::int64_t samples, std::uint64_t seed) {
    const int i = exponent_of(n);
    std::vector<LemmaReport> out;
    for (int r = 1; r <= i; ++r) {
        ConfigSweep sweep{std::nullopt, seed};
        if (detail::binomial(n, RoundConfig::reachable_free_count(n, r)) > kExhaustiveConfigCap) sweep.samples = samples;
        out.push_back(lemma2_config_property(n, r, sweep));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo over runs of an online algorithm.

/// Runs `spec` on `trials` independent instances; result t is trial t.
inline std::vector<RunStats> run_trials(std::int64_t n, const AlgorithmSpec& spec, const McOptions& o,
                                        int prefix_rounds = 0) {
    const int i = exponent_of(n);
    if (o.trials < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
    std::vector<RunStats> out(static_cast<std::size_t>(o.trials));
    parallel_for(out.size(), o.workers, [&](std::size_t t) {
        out[t] = run(generate(trial_params(i, o, static_cast<std::uint32_t>(t))), spec, prefix_rounds);
    });
    return out;
}

namespace detail {

/// Sum of coordinates accumulated exactly in 128 bits, converted once.
inline double exact_sum(std::span<const Coord> xs) {
    int k = 0;
    for (const auto& c : xs) k = std::max(k, c.scale());
    __int128 sum = 0;
    for (const auto& c : xs) sum += c.numerator_at(k);
    return std::ldexp(static_cast<double>(sum), -k);
}

inline double exact_mean(std::span<const Coord> xs) {
    return xs.empty() ? 0.0 : exact_sum(xs) / static_cast<double>(xs.size());
}

inline MeanSe coord_mean_se(std::span<const Coord> xs) {
    std::vector<double> d;
    d.reserve(xs.size());
    for (const auto& c : xs) d.push_back(c.to_double());
    MeanSe m = mean_se(d);
    m.mean = exact_mean(xs);
    return m;
}

}  // namespace detail

/// Per-round mean cost against (n+1)/12 for rounds after the known prefix.
inline LemmaReport lemma2_report(std::span<const RunStats> runs, std::int64_t n, const std::string& id = "lemma2_empirical") {
    if (runs.empty()) throw std::invalid_argument("lemma2_report: no runs");
    const int rounds = static_cast<int>(runs.front().round_costs.size());
    const int prefix = runs.front().prefix_rounds;
    const double bound = static_cast<double>(n + 1) / 12.0;
    LemmaReport rep{id, n, static_cast<std::int64_t>(runs.size()), 0.0, bound, 0.0, ">=", true, "", {}};
    double worst_margin = std::numeric_limits<double>::infinity();
    std::vector<Coord> col(runs.size());
    for (int r = prefix; r < rounds; ++r) {
        for (std::size_t t = 0; t < runs.size(); ++t) col[t] = runs[t].round_costs[static_cast<std::size_t>(r)];
        const MeanSe m = detail::coord_mean_se(col);
        const bool ok = m.mean >= bound - kToleranceSe * m.se;
        rep.rows.push_back({"round " + std::to_string(r + 1), m.mean, bound, m.se, ok});
        rep.pass = rep.pass && ok;
        const double margin = m.mean - bound;
        if (margin < worst_margin) {
            worst_margin = margin;
            rep.observed = m.mean;
            rep.standard_error = m.se;
        }
    }
    if (rep.rows.empty()) {
        rep.observed = bound;
        rep.note = "no online rounds; vacuous";
    } else {
        rep.note = std::string(to_string(runs.front().algorithm)) + "; worst round reported";
        if (prefix > 0) rep.note += "; prefix_rounds=" + std::to_string(prefix);
    }
    return rep;
}

struct TheoremReports {
    LemmaReport ratio;        // sum C_ALG / sum C_OPT >= sqrt(log2(n+1))/12
    LemmaReport numerator;    // mean C_ALG >= (n+1) log2(n+1) / 12
    LemmaReport denominator;  // mean C_OPT <= n (sqrt(log2(n+1)) + 3) + n 2^-grid_k
};

inline TheoremReports theorem_report(std::span<const RunStats> runs, std::int64_t n, int grid_k) {
    if (runs.empty()) throw std::invalid_argument("theorem_report: no runs");
    const int i = exponent_of(n);
    std::vector<Coord> online, offline;
    std::int64_t excluded = 0;
    for (const auto& s : runs) {
        if (s.offline_total == Coord{} && !(s.online_total == Coord{})) {
            ++excluded;
            continue;
        }
        online.push_back(s.online_total);
        offline.push_back(s.offline_total);
    }
    const auto T = static_cast<std::int64_t>(runs.size());
    const std::string alg(to_string(runs.front().algorithm));
    TheoremReports out;

    const double sum_on = detail::exact_sum(online);
    const double sum_off = detail::exact_sum(offline);
    const double ratio = sum_off > 0.0 ? sum_on / sum_off : 1.0;
    const double ratio_bound = std::sqrt(static_cast<double>(i)) / 12.0;
    out.ratio = {"theorem_ratio", n, T, ratio, ratio_bound, 0.0, ">=", ratio >= ratio_bound,
                 alg + "; aggregate sum(C_ALG)/sum(C_OPT); excluded zero-offline trials=" + std::to_string(excluded) +
                     (std::sqrt(static_cast<double>(i)) > 12.0 ? "" : "; sqrt(log2(n+1)) <= 12, asymptotic chain not tight at this n"),
                 {}};

    std::vector<Coord> all_on, all_off;
    for (const auto& s : runs) {
        all_on.push_back(s.online_total);
        all_off.push_back(s.offline_total);
    }
    const MeanSe mon = detail::coord_mean_se(all_on);
    const double num_bound = static_cast<double>(n + 1) * i / 12.0;
    out.numerator = {"theorem_numerator", n, T, mon.mean, num_bound, mon.se, ">=",
                     mon.mean >= num_bound - kToleranceSe * mon.se, alg, {}};

    const MeanSe moff = detail::coord_mean_se(all_off);
    const double nd = static_cast<double>(n);
    const double den_bound = nd * (std::sqrt(static_cast<double>(i)) + 3.0) + nd * std::ldexp(1.0, -grid_k);
    out.denominator = {"theorem_denominator", n, T, moff.mean, den_bound, moff.se, "<=",
                       moff.mean <= den_bound + kToleranceSe * moff.se, "grid_k=" + std::to_string(grid_k), {}};
    return out;
}

/// Convenience wrappers running fresh trials.
inline LemmaReport lemma2_empirical(std::int64_t n, const AlgorithmSpec& spec, const McOptions& o) {
    const auto runs = run_trials(n, spec, o);
    return lemma2_report(runs, n);
}

inline TheoremReports theorem_ratio(std::int64_t n, const AlgorithmSpec& spec, const McOptions& o) {
    const auto runs = run_trials(n, spec, o);
    return theorem_report(runs, n, trial_params(exponent_of(n), o, 0).grid_k);
}

}  // namespace linematch
