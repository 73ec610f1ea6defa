// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "linematch.hpp"

using namespace linematch;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void fold(Outcome& out, const LemmaReport& r) {
    if (!r.pass) {
        out.pass = false;
        char buf[200];
        std::snprintf(buf, sizeof buf, " [%s n=%lld observed=%.6g %s %.6g se=%.3g]", r.lemma_id.c_str(),
                      static_cast<long long>(r.n), r.observed, r.relation.c_str(), r.bound, r.standard_error);
        out.detail += buf;
    }
}

std::string fmt_report(const LemmaReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s n=%lld: %.4f %s %.4f (se %.4f)", r.lemma_id.c_str(), static_cast<long long>(r.n),
                  r.observed, r.relation.c_str(), r.bound, r.standard_error);
    return buf;
}

Outcome exact_mean() {
    Outcome o;
    std::int64_t checked = 0;
    for (int i = 1; i <= 10; ++i) {
        const std::int64_t n = (std::int64_t{1} << i) - 1;
        for (std::int64_t ell = 1; ell <= n; ++ell, ++checked) {
            const GExpectation g = expected_g(ell, n);
            if (!g.agree() || g.closed_form != Rational(ell) - Rational(ell, n + 1)) {
                o.pass = false;
                o.detail += " mismatch at n=" + std::to_string(n) + " l=" + std::to_string(ell);
            }
        }
    }
    if (o.pass) o.detail = std::to_string(checked) + " (n, l) pairs, exact rational equality";
    return o;
}

Outcome exact_variance() {
    Outcome o;
    std::string worst;
    for (int i = 1; i <= 10; ++i) {
        const LemmaReport r = lemma1_exact((std::int64_t{1} << i) - 1);
        fold(o, r);
        if (i == 10) worst = r.note;
    }
    if (o.pass) o.detail = "n=1..1023; at n=1023 " + worst;
    return o;
}

Outcome distance() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const LemmaReport r = lemma1_distance_mc(1023, {1000, 1, 1, std::nullopt, RequestOrder::left_to_right});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fold(o, r);
    char buf[64];
    std::snprintf(buf, sizeof buf, "; %.1f s", secs);
    if (secs >= 60.0) {
        o.pass = false;
        o.detail += " runtime over one minute";
    }
    o.detail = fmt_report(r) + buf + o.detail;
    return o;
}

Outcome offline_aggregate() {
    Outcome o;
    const auto [origins, requests] = offline_aggregate_mc(1023, {1000, 2, 1, std::nullopt, RequestOrder::left_to_right});
    fold(o, origins);
    fold(o, requests);
    o.detail = fmt_report(requests) + "; " + fmt_report(origins) + o.detail;
    return o;
}

Outcome offline_oracle() {
    Outcome o;
    int adversarial = 0;
    for (std::uint32_t inst = 0; inst < 200; ++inst) {
        Stream s(77, {StreamDomain::config_sample, inst, 99, 0});
        std::vector<Coord> servers, points;
        std::int64_t n = 0;
        if (inst % 4 == 0) {
            // Adversarial instances with n in {1, 3, 7}.
            const Instance in = generate(GenParams::for_exponent(1 + static_cast<int>(inst / 4 % 3), 500 + inst));
            servers = in.servers;
            points = all_requests(in);
            n = in.n;
            ++adversarial;
        } else {
            n = 1 + static_cast<std::int64_t>(s.uniform_below(8));
            const int k = static_cast<int>(s.uniform_below(6));
            for (std::int64_t j = 0; j < n; ++j) {
                servers.push_back(Coord::from_numerator(static_cast<std::int64_t>(s.uniform_below(64)), k));
                points.push_back(Coord::from_numerator(static_cast<std::int64_t>(s.uniform_below(64)), k));
            }
            std::sort(servers.begin(), servers.end());
        }
        const Coord fast = sorted_matching_cost(servers, points).total_cost;
        const Coord slow = brute_force_min_cost(servers, points).total_cost;
        if (!(fast == slow)) {
            o.pass = false;
            o.detail += " instance " + std::to_string(inst) + " differs";
        }
    }
    if (o.pass) o.detail = "200 instances (" + std::to_string(adversarial) + " adversarial), all exactly equal";
    return o;
}

Outcome lemma2_analytic() {
    Outcome o;
    std::int64_t configs = 0;
    for (const auto& r : lemma2_config_all_rounds(7, 10000, 3)) {
        fold(o, r);
        configs += r.trials;
        if (r.note.rfind("exhaustive", 0) != 0) {
            o.pass = false;
            o.detail += " n=7 round not exhaustive";
        }
    }
    const std::int64_t small = configs;
    for (int r = 1; r <= 10; ++r) {
        const LemmaReport rep = lemma2_config_property(1023, r, {10000, 3});
        fold(o, rep);
        configs += rep.trials;
    }
    o.detail = "n=7 exhaustive: " + std::to_string(small) + " configs; n=1023 sampled: " + std::to_string(configs - small) +
               " configs" + o.detail;
    return o;
}

Outcome game_value() {
    Outcome o;
    for (std::int64_t n : {1, 3, 7}) {
        const LemmaReport r = oracle_report(n);
        fold(o, r);
        o.detail += fmt_report(r) + " over " + std::to_string(r.trials) + " configs; ";
    }
    return o;
}

Outcome lemma2_runs() {
    Outcome o;
    std::string worst;
    double worst_margin = 1e300;
    for (std::int64_t n : {255, 1023})
        for (auto kind : kAllAlgorithms) {
            const LemmaReport r = lemma2_empirical(n, {kind, 11}, {500, 11, 1, std::nullopt, RequestOrder::left_to_right});
            fold(o, r);
            const double margin = (r.observed - r.bound) / r.bound;
            if (margin < worst_margin) {
                worst_margin = margin;
                worst = fmt_report(r) + " [" + r.note + "]";
            }
        }
    o.detail = "tightest: " + worst + o.detail;
    return o;
}

Outcome totals() {
    Outcome o;
    for (auto kind : {AlgorithmKind::greedy_nearest, AlgorithmKind::batch_round_optimal}) {
        const TheoremReports t = theorem_ratio(1023, {kind, 5}, {500, 5, 1, std::nullopt, RequestOrder::left_to_right});
        fold(o, t.numerator);
        fold(o, t.ratio);
        o.detail += std::string(to_string(kind)) + ": " + fmt_report(t.numerator) + ", ratio " +
                    std::to_string(t.ratio.observed) + " >= " + std::to_string(t.ratio.bound) + "; ";
    }
    return o;
}

Outcome determinism() {
    Outcome o;
    ExperimentConfig cfg;
    cfg.n_list = {15, 127};
    cfg.algorithms.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
    cfg.trials = 128;
    cfg.seed = 2024;
    cfg.request_order = RequestOrder::shuffled;
    const SuiteResult base = run_suite(cfg);
    const std::string base_mc = render_reports_json({lemma1_distance_mc(127, cfg.mc_options())});
    for (unsigned w : {2u, 3u, 8u}) {
        cfg.workers = w;
        const SuiteResult other = run_suite(cfg);
        const std::string mc = render_reports_json({lemma1_distance_mc(127, cfg.mc_options())});
        if (other.trials_jsonl != base.trials_jsonl || other.summary_csv != base.summary_csv ||
            other.rounds_csv != base.rounds_csv || other.reports_json != base.reports_json || mc != base_mc) {
            o.pass = false;
            o.detail += " outputs differ with workers=" + std::to_string(w);
        }
    }
    if (o.pass) o.detail = "workers 1/2/3/8 give byte-identical JSON and CSV";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"exact origin-count mean", exact_mean},
        {"exact origin-count variance", exact_variance},
        {"server-to-origin distance", distance},
        {"offline aggregate cost", offline_aggregate},
        {"sorted matching vs brute force", offline_oracle},
        {"per-round configuration bound", lemma2_analytic},
        {"exact optimal round value", game_value},
        {"per-round online cost", lemma2_runs},
        {"total cost and aggregate ratio", totals},
        {"determinism across workers", determinism},
    };
    int failures = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        Outcome out;
        try {
            out = criteria[c].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failures;
        std::printf("%s criterion %zu (%s): %s\n", out.pass ? "PASS" : "FAIL", c + 1, criteria[c].first, out.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
