#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "adversary.hpp"
#include "algorithms.hpp"
#include "coord.hpp"
#include "lemma_checks.hpp"
#include "offline.hpp"

namespace linematch {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kInstanceFormat = "linematch-instance/1";

inline Json to_json(const Coord& c) { return Json{{"num", c.numerator()}, {"k", c.scale()}}; }

inline Coord coord_from_json(const Json& j) {
    return Coord::from_numerator(j.at("num").get<std::int64_t>(), j.at("k").get<int>());
}

inline Json header_json(const GenParams& p) {
    return Json{{"type", "header"},
                {"format", kInstanceFormat},
                {"i", p.i},
                {"n", p.n()},
                {"grid_k", p.grid_k},
                {"origin_k", p.origin_k()},
                {"seed", p.seed},
                {"trial", p.trial},
                {"request_order", to_string(p.request_order)}};
}

/// JSON Lines transcript: one header record, then one record per round entry
/// in round and arrival order.
inline std::string instance_to_jsonl(const Instance& inst) {
    std::string out = header_json(inst.params).dump();
    out += '\n';
    for (const auto& rd : inst.rounds)
        for (const auto& e : rd.entries) {
            const Json rec{{"type", "entry"},
                           {"round", rd.r},
                           {"subinterval", e.subinterval},
                           {"origin", to_json(e.origin)},
                           {"request", to_json(e.request)}};
            out += rec.dump();
            out += '\n';
        }
    return out;
}

inline Instance instance_from_jsonl(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    Instance inst;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Json rec = Json::parse(line);
        const auto type = rec.at("type").get<std::string>();
        if (type == "header") {
            if (have_header) throw std::invalid_argument("transcript: duplicate header");
            if (rec.at("format").get<std::string>() != kInstanceFormat)
                throw std::invalid_argument("transcript: unsupported format");
            GenParams p;
            p.i = rec.at("i").get<int>();
            p.grid_k = rec.at("grid_k").get<int>();
            p.seed = rec.at("seed").get<std::uint64_t>();
            p.trial = rec.at("trial").get<std::uint32_t>();
            p.request_order = parse_request_order(rec.at("request_order").get<std::string>());
            p.validate();
            if (rec.at("n").get<std::int64_t>() != p.n()) throw std::invalid_argument("transcript: n inconsistent with i");
            if (rec.at("origin_k").get<int>() != p.origin_k()) throw std::invalid_argument("transcript: origin_k mismatch");
            inst.params = p;
            inst.n = p.n();
            for (std::int64_t j = 1; j <= inst.n; ++j) inst.servers.push_back(coord_from_integer(j, p.grid_k));
            for (int r = 1; r <= p.i; ++r) inst.rounds.push_back(Round{r, std::int64_t{1} << r, {}});
            have_header = true;
        } else if (type == "entry") {
            if (!have_header) throw std::invalid_argument("transcript: entry before header");
            const int r = rec.at("round").get<int>();
            if (r < 1 || r > inst.params.i) throw std::invalid_argument("transcript: round out of range");
            inst.rounds[static_cast<std::size_t>(r - 1)].entries.push_back(
                {rec.at("subinterval").get<std::int64_t>(), coord_from_json(rec.at("origin")), coord_from_json(rec.at("request"))});
        } else {
            throw std::invalid_argument("transcript: unknown record type " + type);
        }
    }
    if (!have_header) throw std::invalid_argument("transcript: missing header");
    validate_instance(inst);
    return inst;
}

inline Json to_json(const Assignment& a) {
    Json pairs = Json::array();
    for (std::size_t x = 0; x < a.pairs.size(); ++x)
        pairs.push_back(Json{{"request", a.pairs[x].first}, {"server", a.pairs[x].second}, {"cost", to_json(a.per_pair_cost[x])}});
    return Json{{"pairs", pairs}, {"total_cost", to_json(a.total_cost)}, {"total_cost_f", a.total_cost.to_double()}};
}

inline Json to_json(const RunStats& s) {
    Json rounds = Json::array();
    for (std::size_t r = 0; r < s.round_costs.size(); ++r)
        rounds.push_back(Json{{"r", r + 1},
                              {"free_before", s.free_before_round[r]},
                              {"cost", to_json(s.round_costs[r])},
                              {"cost_f", s.round_costs[r].to_double()}});
    const auto ratio = s.ratio();
    return Json{{"n", s.n},
                {"algorithm", to_string(s.algorithm)},
                {"trial", s.trial},
                {"prefix_rounds", s.prefix_rounds},
                {"rounds", rounds},
                {"online_total", to_json(s.online_total)},
                {"offline_total", to_json(s.offline_total)},
                {"online_total_f", s.online_total.to_double()},
                {"offline_total_f", s.offline_total.to_double()},
                {"ratio", ratio ? Json(*ratio) : Json(nullptr)}};
}

/// Non-finite doubles have no JSON spelling; they are written as null.
inline Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const LemmaReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back(Json{{"label", row.label},
                            {"observed", finite_or_null(row.observed)},
                            {"bound", finite_or_null(row.bound)},
                            {"standard_error", finite_or_null(row.standard_error)},
                            {"pass", row.pass}});
    return Json{{"lemma_id", r.lemma_id},
                {"n", r.n},
                {"trials", r.trials},
                {"observed", finite_or_null(r.observed)},
                {"relation", r.relation},
                {"bound", finite_or_null(r.bound)},
                {"standard_error", finite_or_null(r.standard_error)},
                {"pass", r.pass},
                {"note", r.note},
                {"rows", rows}};
}

}  // namespace linematch
