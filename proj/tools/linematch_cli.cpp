// Command-line front end for the online line-matching laboratory.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linematch.hpp"

namespace lm = linematch;

namespace {

struct CliValues {
    std::string config;
    std::string n;
    std::string alg;
    std::string trials;
    std::string seed;
    std::string grid_k;
    std::string order;
    std::string prefix_rounds;
    std::string out;
    std::string workers;
    std::int64_t samples = 10000;
    std::uint32_t trial = 0;
};

void add_common(CLI::App* sub, CliValues& v) {
    sub->add_option("--config", v.config, "Flat key = value config file (flags override it)");
    sub->add_option("--n", v.n, "Comma-separated n values, each 2^i - 1");
    sub->add_option("--alg", v.alg, "Comma-separated algorithms: greedy_nearest, batch_round_optimal, permutation, random_free");
    sub->add_option("--trials", v.trials, "Monte Carlo trials");
    sub->add_option("--seed", v.seed, "Root seed");
    sub->add_option("--grid-k", v.grid_k, "Request grid exponent (default min(n, 40))");
    sub->add_option("--order", v.order, "Arrival order within a round: left_to_right or shuffled");
    sub->add_option("--prefix-rounds", v.prefix_rounds, "Rounds revealed in advance (prefix mode)");
    sub->add_option("--out", v.out, "Output directory (generate: output file)");
    sub->add_option("--workers", v.workers, "Worker threads");
}

/// Config file first, then every flag given explicitly on the command line.
lm::ExperimentConfig build_config(const CLI::App* sub, const CliValues& v) {
    lm::ExperimentConfig cfg = v.config.empty() ? lm::ExperimentConfig{} : lm::load_config_file(v.config);
    const std::pair<const char*, const std::string*> flags[] = {
        {"n", &v.n},         {"alg", &v.alg},       {"trials", &v.trials},   {"seed", &v.seed},
        {"grid-k", &v.grid_k}, {"order", &v.order}, {"prefix-rounds", &v.prefix_rounds},
        {"out", &v.out},     {"workers", &v.workers},
    };
    for (const auto& [name, value] : flags)
        if (sub->count(std::string("--") + name) > 0) lm::apply_setting(cfg, name, *value);
    return cfg;
}

int finish(const std::vector<lm::LemmaReport>& reports, const lm::ExperimentConfig& cfg) {
    std::cout << lm::render_report_table(reports);
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream(std::filesystem::path(cfg.out_dir) / "reports.json", std::ios::binary) << lm::render_reports_json(reports);
    }
    for (const auto& r : reports)
        if (!r.pass) return 1;
    return 0;
}

int cmd_generate(const lm::ExperimentConfig& cfg, std::uint32_t trial) {
    lm::GenParams p = lm::trial_params(lm::exponent_of(cfg.n_list.front()), cfg.mc_options(), trial);
    const std::string text = lm::instance_to_jsonl(lm::generate(p));
    if (cfg.out_dir.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out_dir, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + cfg.out_dir);
        out << text;
    }
    return 0;
}

int cmd_lemma1(const lm::ExperimentConfig& cfg) {
    std::vector<lm::LemmaReport> reports;
    for (auto n : cfg.n_list) {
        reports.push_back(lm::lemma1_exact(n));
        if (cfg.trials >= 100) {
            reports.push_back(lm::lemma1_distance_mc(n, cfg.mc_options()));
            auto [origins, requests] = lm::offline_aggregate_mc(n, cfg.mc_options());
            reports.push_back(origins);
            reports.push_back(requests);
        }
    }
    return finish(reports, cfg);
}

int cmd_lemma2(const lm::ExperimentConfig& cfg, std::int64_t samples) {
    std::vector<lm::LemmaReport> reports;
    for (auto n : cfg.n_list) {
        for (auto& r : lm::lemma2_config_all_rounds(n, samples, cfg.seed)) reports.push_back(std::move(r));
        for (auto kind : cfg.algorithms) reports.push_back(lm::lemma2_empirical(n, {kind, cfg.seed}, cfg.mc_options()));
    }
    return finish(reports, cfg);
}

int cmd_oracle(const lm::ExperimentConfig& cfg) {
    std::vector<lm::LemmaReport> reports;
    for (auto n : cfg.n_list) {
        lm::LemmaReport rep = lm::oracle_report(n, cfg.workers);
        for (int r = 1; r <= lm::exponent_of(n); ++r) {
            const auto worst = lm::worst_config_search(n, r);
            std::string set;
            for (auto s : worst.free_servers) set += (set.empty() ? "" : ",") + std::to_string(s);
            rep.note += "; worst r=" + std::to_string(r) + " free={" + set + "} bound=" + lm::config_lower_bound(worst).str();
        }
        reports.push_back(std::move(rep));
    }
    return finish(reports, cfg);
}

int cmd_ratio(const lm::ExperimentConfig& cfg) {
    std::vector<lm::LemmaReport> reports;
    for (auto n : cfg.n_list)
        for (auto kind : cfg.algorithms) {
            const auto thm = lm::theorem_ratio(n, {kind, cfg.seed}, cfg.mc_options());
            reports.push_back(thm.ratio);
            reports.push_back(thm.numerator);
            reports.push_back(thm.denominator);
        }
    return finish(reports, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online metric matching on the line: adversarial instances, algorithms and bound checks"};
    app.require_subcommand(1);
    CliValues v;

    auto* gen = app.add_subcommand("generate", "Write one instance transcript as JSON Lines");
    auto* run = app.add_subcommand("run", "Run algorithms over many instances; write CSV/JSON summaries");
    auto* l1 = app.add_subcommand("lemma1", "Exact and Monte Carlo checks of origin concentration");
    auto* l2 = app.add_subcommand("lemma2", "Per-round cost bound: analytic configurations and empirical runs");
    auto* orc = app.add_subcommand("oracle", "Exhaustive optimal-policy round values for n <= 7");
    auto* rat = app.add_subcommand("ratio", "Aggregate competitive-ratio estimate and its two halves");
    auto* pre = app.add_subcommand("prefix", "Runs with the first rounds revealed in advance");
    for (auto* sub : {gen, run, l1, l2, orc, rat, pre}) add_common(sub, v);
    gen->add_option("--trial", v.trial, "Trial index of the instance stream");
    l2->add_option("--samples", v.samples, "Sampled configurations per round when enumeration is too large");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        lm::ExperimentConfig cfg = build_config(sub, v);
        cfg.validate();
        if (sub == gen) return cmd_generate(cfg, v.trial);
        if (sub == run || sub == pre) {
            const auto res = sub == pre ? lm::run_prefix_known(cfg) : lm::run_suite(cfg);
            std::cout << res.table;
            return sub == pre && !res.all_pass() ? 1 : 0;
        }
        if (sub == l1) return cmd_lemma1(cfg);
        if (sub == l2) return cmd_lemma2(cfg, v.samples);
        if (sub == orc) return cmd_oracle(cfg);
        if (sub == rat) return cmd_ratio(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
