#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adversary.hpp"
#include "algorithms.hpp"
#include "lemma_checks.hpp"
#include "serialization.hpp"

namespace linematch {

/// Bumped whenever a CSV column is added, removed or reordered.
inline constexpr int kCsvSchemaVersion = 1;

struct ExperimentConfig {
    std::vector<std::int64_t> n_list{3};
    std::vector<AlgorithmKind> algorithms{AlgorithmKind::greedy_nearest};
    std::int64_t trials = 100;
    std::uint64_t seed = 1;
    std::optional<int> grid_k;
    RequestOrder request_order = RequestOrder::left_to_right;
    int prefix_known_rounds = 0;
    std::string out_dir;  // empty: no files written
    unsigned workers = 1;

    void validate() const {
        if (n_list.empty()) throw std::invalid_argument("config: n list is empty");
        if (algorithms.empty()) throw std::invalid_argument("config: algorithm list is empty");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
        for (auto n : n_list) {
            const int i = exponent_of(n);
            if (prefix_known_rounds < 0 || prefix_known_rounds > i)
                throw std::invalid_argument("config: prefix_rounds must be in [0, log2(n+1)]");
            GenParams p = GenParams::for_exponent(i, seed);
            if (grid_k) p.grid_k = *grid_k;
            p.validate();
        }
    }

    [[nodiscard]] McOptions mc_options() const { return {trials, seed, workers, grid_k, request_order}; }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

template <class T>
T parse_number(const std::string& s, std::string_view key) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("config: bad value for " + std::string(key) + ": '" + s + "'");
    return v;
}

/// Shortest round-trip decimal form of a double.
inline std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// Applies one `key = value` setting. Keys accept dash or underscore spellings.
inline void apply_setting(ExperimentConfig& cfg, std::string key, const std::string& value) {
    for (auto& c : key)
        if (c == '-') c = '_';
    if (key == "n" || key == "n_list") {
        cfg.n_list.clear();
        for (const auto& v : detail::split_list(value)) cfg.n_list.push_back(detail::parse_number<std::int64_t>(v, key));
    } else if (key == "alg" || key == "algorithms") {
        cfg.algorithms.clear();
        for (const auto& v : detail::split_list(value)) cfg.algorithms.push_back(parse_algorithm(v));
    } else if (key == "trials") {
        cfg.trials = detail::parse_number<std::int64_t>(value, key);
    } else if (key == "seed") {
        cfg.seed = detail::parse_number<std::uint64_t>(value, key);
    } else if (key == "grid_k") {
        cfg.grid_k = detail::parse_number<int>(value, key);
    } else if (key == "order" || key == "request_order") {
        cfg.request_order = parse_request_order(value);
    } else if (key == "prefix_rounds" || key == "prefix_known_rounds") {
        cfg.prefix_known_rounds = detail::parse_number<int>(value, key);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "workers") {
        cfg.workers = detail::parse_number<unsigned>(value, key);
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

/// Flat `key = value` text, one setting per line; `#` starts a comment.
inline void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, detail::trim(std::string_view(t).substr(0, eq)), detail::trim(std::string_view(t).substr(eq + 1)));
    }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg;
    apply_config_text(cfg, ss.str());
    return cfg;
}

struct SuiteRow {
    std::int64_t n = 0;
    AlgorithmKind algorithm = AlgorithmKind::greedy_nearest;
    std::int64_t trials = 0;
    int prefix_rounds = 0;
    MeanSe online;
    MeanSe offline;
    MeanSe suffix;
    double aggregate_ratio = 0.0;
    double ratio_bound = 0.0;
    std::vector<MeanSe> per_round;
};

/// Everything one suite run produces, already rendered.
struct SuiteResult {
    std::vector<SuiteRow> rows;
    std::vector<LemmaReport> reports;
    std::string trials_jsonl;
    std::string summary_csv;
    std::string rounds_csv;
    std::string reports_json;
    std::string table;

    [[nodiscard]] bool all_pass() const {
        for (const auto& r : reports)
            if (!r.pass) return false;
        return true;
    }
};

inline std::string render_reports_json(const std::vector<LemmaReport>& reports) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

inline std::string render_report_table(const std::vector<LemmaReport>& reports) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-22s %6s %7s %14s %3s %14s %11s  %s\n", "check", "n", "trials", "observed", "", "bound",
                  "se", "result");
    out += buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-22s %6lld %7lld %14.6f %3s %14.6f %11.6f  %s\n", r.lemma_id.c_str(),
                      static_cast<long long>(r.n), static_cast<long long>(r.trials), r.observed, r.relation.c_str(), r.bound,
                      r.standard_error, r.pass ? "PASS" : "FAIL");
        out += buf;
        for (const auto& row : r.rows) {
            std::snprintf(buf, sizeof buf, "    %-18s %29.6f %3s %14.6f %11.6f  %s\n", row.label.c_str(), row.observed,
                          r.relation.c_str(), row.bound, row.standard_error, row.pass ? "PASS" : "FAIL");
            out += buf;
        }
        if (!r.note.empty()) out += "    note: " + r.note + "\n";
    }
    return out;
}

namespace detail {

inline SuiteResult run_configured(const ExperimentConfig& cfg) {
    cfg.validate();
    SuiteResult res;
    std::string summary =
        "schema_version,n,algorithm,trials,prefix_rounds,request_order,grid_k,mean_online,se_online,mean_offline,se_offline,"
        "mean_suffix,se_suffix,aggregate_ratio,ratio_bound\n";
    std::string rounds = "schema_version,n,algorithm,prefix_rounds,round,mean_cost,se_cost,bound,pass\n";
    const McOptions o = cfg.mc_options();

    for (auto n : cfg.n_list) {
        const int i = exponent_of(n);
        const int grid_k = trial_params(i, o, 0).grid_k;
        for (auto kind : cfg.algorithms) {
            const AlgorithmSpec spec{kind, cfg.seed};
            const auto runs = run_trials(n, spec, o, cfg.prefix_known_rounds);
            for (const auto& s : runs) {
                res.trials_jsonl += to_json(s).dump();
                res.trials_jsonl += '\n';
            }

            SuiteRow row;
            row.n = n;
            row.algorithm = kind;
            row.trials = cfg.trials;
            row.prefix_rounds = cfg.prefix_known_rounds;
            std::vector<Coord> on, off, suf, col(runs.size());
            for (const auto& s : runs) {
                on.push_back(s.online_total);
                off.push_back(s.offline_total);
                suf.push_back(s.suffix_cost());
            }
            row.online = coord_mean_se(on);
            row.offline = coord_mean_se(off);
            row.suffix = coord_mean_se(suf);
            const auto lemma2 = lemma2_report(runs, n);
            for (int r = 0; r < i; ++r) {
                for (std::size_t t = 0; t < runs.size(); ++t) col[t] = runs[t].round_costs[static_cast<std::size_t>(r)];
                row.per_round.push_back(coord_mean_se(col));
            }
            const auto thm = theorem_report(runs, n, grid_k);
            row.aggregate_ratio = thm.ratio.observed;
            row.ratio_bound = thm.ratio.bound;

            const std::string alg(to_string(kind));
            summary += std::to_string(kCsvSchemaVersion) + "," + std::to_string(n) + "," + alg + "," +
                       std::to_string(cfg.trials) + "," + std::to_string(cfg.prefix_known_rounds) + "," +
                       std::string(to_string(cfg.request_order)) + "," + std::to_string(grid_k) + "," + fmt(row.online.mean) +
                       "," + fmt(row.online.se) + "," + fmt(row.offline.mean) + "," + fmt(row.offline.se) + "," +
                       fmt(row.suffix.mean) + "," + fmt(row.suffix.se) + "," + fmt(row.aggregate_ratio) + "," +
                       fmt(row.ratio_bound) + "\n";
            const double bound = static_cast<double>(n + 1) / 12.0;
            for (int r = 0; r < i; ++r) {
                const auto& m = row.per_round[static_cast<std::size_t>(r)];
                const bool online_round = r >= cfg.prefix_known_rounds;
                const std::string pass = online_round ? (m.mean >= bound - kToleranceSe * m.se ? "1" : "0") : "";
                rounds += std::to_string(kCsvSchemaVersion) + "," + std::to_string(n) + "," + alg + "," +
                          std::to_string(cfg.prefix_known_rounds) + "," + std::to_string(r + 1) + "," + fmt(m.mean) + "," +
                          fmt(m.se) + "," + fmt(bound) + "," + pass + "\n";
            }

            res.reports.push_back(lemma2);
            if (cfg.prefix_known_rounds == 0) {
                res.reports.push_back(thm.ratio);
                res.reports.push_back(thm.numerator);
                res.reports.push_back(thm.denominator);
            }
            res.rows.push_back(std::move(row));
        }
    }
    res.summary_csv = std::move(summary);
    res.rounds_csv = std::move(rounds);
    res.reports_json = render_reports_json(res.reports);

    char buf[256];
    std::snprintf(buf, sizeof buf, "%6s %-20s %7s %6s %14s %14s %14s %10s\n", "n", "algorithm", "trials", "prefix",
                  "mean_online", "mean_offline", "mean_suffix", "ratio");
    res.table = buf;
    for (const auto& row : res.rows) {
        std::snprintf(buf, sizeof buf, "%6lld %-20s %7lld %6d %14.4f %14.4f %14.4f %10.4f\n", static_cast<long long>(row.n),
                      std::string(to_string(row.algorithm)).c_str(), static_cast<long long>(row.trials), row.prefix_rounds,
                      row.online.mean, row.offline.mean, row.suffix.mean, row.aggregate_ratio);
        res.table += buf;
    }
    res.table += "\n" + render_report_table(res.reports);
    return res;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

/// Writes trials.jsonl, summary.csv, rounds.csv and reports.json into `dir`.
inline void write_suite_outputs(const SuiteResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "trials.jsonl", res.trials_jsonl);
    detail::write_text(dir / "summary.csv", res.summary_csv);
    detail::write_text(dir / "rounds.csv", res.rounds_csv);
    detail::write_text(dir / "reports.json", res.reports_json);
}

/// Runs every (n, algorithm) pair for `trials` instances; writes outputs when
/// cfg.out_dir is set.
inline SuiteResult run_suite(const ExperimentConfig& cfg) {
    SuiteResult res = detail::run_configured(cfg);
    if (!cfg.out_dir.empty()) write_suite_outputs(res, cfg.out_dir);
    return res;
}

/// As run_suite, but the first prefix_known_rounds rounds are revealed up front
/// and served by one optimal batch; only the remaining rounds are checked.
inline SuiteResult run_prefix_known(const ExperimentConfig& cfg) {
    if (cfg.prefix_known_rounds < 1) throw std::invalid_argument("run_prefix_known: prefix_rounds must be >= 1");
    return run_suite(cfg);
}

}  // namespace linematch
