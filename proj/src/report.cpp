#include "hiermc/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hiermc/dataset_io.hpp"

namespace hiermc {

using nlohmann::json;

std::string_view tool_version() { return HIERMC_VERSION; }

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json interval(const Interval& i) { return json::array({number(i.lower), number(i.upper)}); }

std::string_view sided_name(Sidedness s) { return s == Sidedness::Greater ? "greater" : "two-sided"; }

}  // namespace

json AnalysisReport::to_json() const {
    return {{"method", method}, {"dataset", dataset}, {"config", config},
            {"result", result}, {"tool_version", version}, {"seeds", seeds}};
}

AnalysisReport AnalysisReport::from_json(const json& j) {
    AnalysisReport r;
    try {
        r.method = j.at("method").get<std::string>();
        r.dataset = j.at("dataset");
        r.config = j.at("config");
        r.result = j.at("result");
        r.version = j.at("tool_version").get<std::string>();
        r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("report: ") + e.what());
    }
    return r;
}

std::string AnalysisReport::serialize() const { return to_json().dump(2) + "\n"; }

AnalysisReport AnalysisReport::parse(std::string_view text) {
    try {
        return from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("report: ") + e.what());
    }
}

json dataset_summary(const TrialDataset& data) {
    return {{"fingerprint", fingerprint(data)},
            {"n_e", data.arm_size(Arm::E)},
            {"n_c", data.arm_size(Arm::C)},
            {"horizon", data.horizon_days}};
}

json to_json(const UStatSummary& s) {
    return {{"estimate", number(s.estimate)}, {"variance", number(s.variance)}, {"se", number(s.se)},
            {"z", number(s.z)},           {"ci", interval(s.ci)},            {"p_value", number(s.p_value)},
            {"alpha", s.alpha},           {"sided", sided_name(s.sided)},    {"degenerate", s.degenerate}};
}

json to_json(const GpcResult& r) {
    json levels = json::array();
    for (const auto& row : r.levels) {
        levels.push_back({{"outcome", to_string(row.level.outcome)},
                          {"direction", to_string(row.level.direction)},
                          {"tau", row.level.tau},
                          {"pairs_entering", row.pairs_entering},
                          {"favorable", row.favorable},
                          {"unfavorable", row.unfavorable},
                          {"neutral", row.neutral},
                          {"prop_favorable", row.prop_favorable},
                          {"prop_unfavorable", row.prop_unfavorable},
                          {"prop_neutral", row.prop_neutral},
                          {"cumulative_ntb", row.cumulative_ntb},
                          {"inference", to_json(row.inference)}});
    }
    return {{"n_e", r.n_e},
            {"n_c", r.n_c},
            {"total_pairs", r.total_pairs},
            {"levels", levels},
            {"p_win", r.p_win},
            {"p_loss", r.p_loss},
            {"p_tie", r.p_tie},
            {"ntb", r.ntb},
            {"win_odds", number(r.win_odds)},
            {"win_odds_infinite", r.win_odds_infinite}};
}

json to_json(const DoorResult& r) {
    json cats = json::array();
    for (std::size_t k = 0; k < r.ranks.size(); ++k) {
        cats.push_back({{"rank", r.ranks[k]},
                        {"label", r.labels[k]},
                        {"count_e", r.e.counts[k]},
                        {"count_c", r.c.counts[k]},
                        {"proportion_e", r.e.proportion(k)},
                        {"proportion_c", r.c.proportion(k)},
                        {"rational_e", std::to_string(r.e.counts[k]) + "/" + std::to_string(r.e.n)},
                        {"rational_c", std::to_string(r.c.counts[k]) + "/" + std::to_string(r.c.n)}});
    }
    return {{"categories", cats},
            {"n_e", r.e.n},
            {"n_c", r.c.n},
            {"total_pairs", r.total_pairs},
            {"favorable", r.favorable},
            {"unfavorable", r.unfavorable},
            {"tied", r.tied},
            {"prop_favorable", r.prop_favorable},
            {"prop_unfavorable", r.prop_unfavorable},
            {"prop_neutral", r.prop_neutral},
            {"door_probability", r.door_probability},
            {"ntb", r.ntb},
            {"win_odds", number(r.win_odds)},
            {"win_odds_infinite", r.win_odds_infinite},
            {"probability_ci", interval(r.probability_ci)},
            {"ci_scale", r.ci_scale == CiScale::Logit ? "logit" : "probability"},
            {"p_value", number(r.p_value)},
            {"ntb_inference", to_json(r.ntb_inference)}};
}

json to_json(const LongitudinalDoorResult& r) {
    return {{"weights", r.weights},
            {"daily_ntb", r.daily_ntb},
            {"daily_favorable", r.daily_favorable},
            {"daily_unfavorable", r.daily_unfavorable},
            {"pairs_per_day", r.pairs_per_day},
            {"weighted_ntb", r.weighted_ntb}};
}

json to_json(const EmpiricalSop& sop) { return {{"n", sop.n}, {"counts", sop.counts}}; }

json to_json(const SopMatrix& sop) {
    json rows = json::array();
    for (Eigen::Index t = 0; t < sop.probabilities.rows(); ++t) {
        json row = json::array();
        for (Eigen::Index y = 0; y < sop.probabilities.cols(); ++y) row.push_back(sop.probabilities(t, y));
        rows.push_back(std::move(row));
    }
    return {{"baseline_state", sop.baseline_state}, {"probabilities", rows}};
}

json empirical_sop_json(const TrialDataset& data) {
    return {{"E", to_json(empirical_sop(data, Arm::E))}, {"C", to_json(empirical_sop(data, Arm::C))}};
}

json to_json(const FittedTransitionModel& fit) {
    json params = json::array();
    const auto names = fit.spec.parameter_names();
    for (std::size_t k = 0; k < names.size() && static_cast<Eigen::Index>(k) < fit.theta.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        params.push_back({{"name", names[k]}, {"estimate", number(fit.theta[i])},
                          {"se", number(fit.standard_errors.size() > i ? fit.standard_errors[i] : NAN)}});
    }
    return {{"spec", to_json(fit.spec)},
            {"parameters", params},
            {"log_likelihood", number(fit.log_likelihood)},
            {"initial_log_likelihood", number(fit.initial_log_likelihood)},
            {"gradient_norm", number(fit.gradient_norm)},
            {"iterations", fit.iterations},
            {"status", to_string(fit.status)},
            {"message", fit.message},
            {"n_records", fit.n_records}};
}

json to_json(const MostSummary& s) {
    auto tis = [](const TimeInStates& t) { return json{{"total", t.total}, {"per_state", t.per_state}}; };
    return {{"sop", {{"E", to_json(s.sop_e)}, {"C", to_json(s.sop_c)}}},
            {"unwell_states", s.unwell_e.states},
            {"mean_time_unwell", {{"E", tis(s.unwell_e)}, {"C", tis(s.unwell_c)}}},
            {"unwell_difference", s.unwell_difference},
            {"days_benefit", s.days_benefit},
            {"days_per_state", {{"E", mean_days_per_state(s.sop_e)}, {"C", mean_days_per_state(s.sop_c)}}},
            {"days_benefit_assumption", "independent draws from each arm's state occupancy distribution"}};
}

json to_json(const MostBootstrap& b) {
    json per_e = json::array(), per_c = json::array();
    for (const auto& i : b.per_state_e) per_e.push_back(interval(i));
    for (const auto& i : b.per_state_c) per_c.push_back(interval(i));
    return {{"replicates", b.raw.requested},
            {"failed", b.raw.failed},
            {"seed", b.raw.seed},
            {"alpha", b.raw.alpha},
            {"method", "percentile"},
            {"high_failure_rate", b.raw.high_failure_rate()},
            {"ci",
             {{"unwell_e", interval(b.unwell_e)},
              {"unwell_c", interval(b.unwell_c)},
              {"unwell_difference", interval(b.difference)},
              {"days_benefit", interval(b.days_benefit)},
              {"per_state_e", per_e},
              {"per_state_c", per_c}}}};
}

namespace {

std::string full(const json& v) {
    if (v.is_null()) return "NA";
    if (v.is_number_float()) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
        return std::string(buf, ptr);
    }
    return v.dump();
}

std::string fixed(const json& v, int digits) {
    if (v.is_null()) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v.get<double>());
    return buf;
}

std::string ci_text(const json& ci, int digits) { return "[" + fixed(ci[0], digits) + "; " + fixed(ci[1], digits) + "]"; }

void require_table_method(const AnalysisReport& r) {
    if (r.method != "gpc" && r.method != "wmw" && r.method != "door")
        throw Error(ErrorCode::MethodFigureMismatch, "no table layout for method '" + r.method + "'");
}

}  // namespace

std::string table_csv(const AnalysisReport& report) {
    require_table_method(report);
    std::ostringstream os;
    const auto& r = report.result;
    if (report.method == "door") {
        os << "Outcome,Number of Pairs,Proportion Favorable,Proportion Unfavorable,Proportion Neutral,"
              "DOOR Probability,CI Lower,CI Upper,p-value\n";
        os << "DOOR," << r["total_pairs"].get<std::uint64_t>() << ',' << full(r["prop_favorable"]) << ','
           << full(r["prop_unfavorable"]) << ',' << full(r["prop_neutral"]) << ',' << full(r["door_probability"])
           << ',' << full(r["probability_ci"][0]) << ',' << full(r["probability_ci"][1]) << ','
           << full(r["p_value"]) << '\n';
        return os.str();
    }
    os << "Outcome,Number of Pairs,Proportion Favorable,Proportion Unfavorable,Proportion Neutral,"
          "Cumulative NTB,CI Lower,CI Upper,p-value\n";
    for (const auto& l : r["levels"]) {
        const auto& inf = l["inference"];
        os << l["outcome"].get<std::string>() << ',' << l["pairs_entering"].get<std::uint64_t>() << ','
           << full(l["prop_favorable"]) << ',' << full(l["prop_unfavorable"]) << ',' << full(l["prop_neutral"]) << ','
           << full(l["cumulative_ntb"]) << ',' << full(inf["ci"][0]) << ',' << full(inf["ci"][1]) << ','
           << full(inf["p_value"]) << '\n';
    }
    return os.str();
}

std::string table_text(const AnalysisReport& report) {
    require_table_method(report);
    std::ostringstream os;
    const auto& r = report.result;
    char line[256];
    if (report.method == "door") {
        std::snprintf(line, sizeof line, "%-10s %8s %10s %10s %10s %18s %8s\n", "Outcome", "Pairs", "Favorable",
                      "Neutral", "DOOR prob", "95% CI", "p");
        os << line;
        std::snprintf(line, sizeof line, "%-10s %8llu %10s %10s %10s %18s %8s\n", "DOOR",
                      static_cast<unsigned long long>(r["total_pairs"].get<std::uint64_t>()),
                      fixed(r["prop_favorable"], 2).c_str(), fixed(r["prop_neutral"], 2).c_str(),
                      fixed(r["door_probability"], 2).c_str(), ci_text(r["probability_ci"], 3).c_str(),
                      fixed(r["p_value"], 3).c_str());
        os << line;
        return os.str();
    }
    std::snprintf(line, sizeof line, "%-10s %8s %10s %12s %10s %10s %16s %8s\n", "Outcome", "Pairs", "Favorable",
                  "Unfavorable", "Neutral", "Cum. NTB", "95% CI", "p");
    os << line;
    for (const auto& l : r["levels"]) {
        std::snprintf(line, sizeof line, "%-10s %8llu %10s %12s %10s %10s %16s %8s\n",
                      l["outcome"].get<std::string>().c_str(),
                      static_cast<unsigned long long>(l["pairs_entering"].get<std::uint64_t>()),
                      fixed(l["prop_favorable"], 2).c_str(), fixed(l["prop_unfavorable"], 2).c_str(),
                      fixed(l["prop_neutral"], 2).c_str(), fixed(l["cumulative_ntb"], 2).c_str(),
                      ci_text(l["inference"]["ci"], 2).c_str(), fixed(l["inference"]["p_value"], 3).c_str());
        os << line;
    }
    return os.str();
}

}  // namespace hiermc
