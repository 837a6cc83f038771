#include "hiermc/gpc.hpp"

#include <cmath>
#include <limits>

namespace hiermc {

using nlohmann::json;

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Death: return "death";
        case Outcome::Home: return "home";
        case Outcome::VentilatorFreeDays: return "vfd";
    }
    return "?";
}

std::string_view to_string(Direction d) { return d == Direction::HigherIsBetter ? "higher" : "lower"; }

Outcome parse_outcome(std::string_view s) {
    if (s == "death") return Outcome::Death;
    if (s == "home" || s == "home_at_end") return Outcome::Home;
    if (s == "vfd" || s == "ventilator_free_days") return Outcome::VentilatorFreeDays;
    throw Error(ErrorCode::ConfigError, "unknown outcome '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
    if (s == "higher" || s == "higher-is-better") return Direction::HigherIsBetter;
    if (s == "lower" || s == "lower-is-better") return Direction::LowerIsBetter;
    throw Error(ErrorCode::ConfigError, "unknown direction '" + std::string(s) + "'");
}

double outcome_value(const DerivedOutcomes& d, Outcome o) {
    switch (o) {
        case Outcome::Death: return d.death;
        case Outcome::Home: return d.home_at_end;
        case Outcome::VentilatorFreeDays: return d.ventilator_free_days;
    }
    return 0.0;
}

void ComparisonRule::validate() const {
    if (levels.empty()) throw Error(ErrorCode::ConfigError, "comparison rule needs at least one level");
    for (const auto& l : levels) {
        if (!std::isfinite(l.tau) || l.tau < 0.0)
            throw Error(ErrorCode::ConfigError, "thresholds must be finite and non-negative");
        if (l.outcome != Outcome::VentilatorFreeDays && l.tau != 0.0)
            throw Error(ErrorCode::ConfigError, "binary outcome '" + std::string(to_string(l.outcome)) +
                                                    "' requires tau = 0");
    }
}

ComparisonRule ComparisonRule::guiding_example() {
    return {{{Outcome::Death, Direction::LowerIsBetter, 0.0},
             {Outcome::Home, Direction::HigherIsBetter, 0.0},
             {Outcome::VentilatorFreeDays, Direction::HigherIsBetter, 3.0}}};
}

ComparisonRule ComparisonRule::ventilator_free_days_only() {
    return {{{Outcome::VentilatorFreeDays, Direction::HigherIsBetter, 0.0}}};
}

json to_json(const ComparisonRule& rule) {
    json levels = json::array();
    for (const auto& l : rule.levels)
        levels.push_back({{"outcome", to_string(l.outcome)}, {"direction", to_string(l.direction)}, {"tau", l.tau}});
    return {{"levels", levels}};
}

ComparisonRule rule_from_json(const json& j) {
    ComparisonRule rule;
    try {
        for (const auto& l : j.at("levels")) {
            RuleLevel level;
            level.outcome = parse_outcome(l.at("outcome").get<std::string>());
            level.direction = parse_direction(l.value("direction", std::string("higher")));
            level.tau = l.value("tau", 0.0);
            rule.levels.push_back(level);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("comparison rule: ") + e.what());
    }
    rule.validate();
    return rule;
}

int score_pair_level(double e_value, double c_value, const RuleLevel& level) {
    const double sign = level.direction == Direction::HigherIsBetter ? 1.0 : -1.0;
    const double e = sign * e_value;
    const double c = sign * c_value;
    if (e > c + level.tau) return 1;
    if (c > e + level.tau) return -1;
    return 0;
}

PairScore score_pair(const DerivedOutcomes& e, const DerivedOutcomes& c, const ComparisonRule& rule) {
    for (std::size_t k = 0; k < rule.levels.size(); ++k) {
        const auto& level = rule.levels[k];
        if (int s = score_pair_level(outcome_value(e, level.outcome), outcome_value(c, level.outcome), level))
            return {s, k};
    }
    return {0, std::nullopt};
}

double win_odds(double p_win, double p_loss, double p_tie, bool& infinite) {
    const double den = p_loss + 0.5 * p_tie;
    infinite = den == 0.0;
    if (infinite) return std::numeric_limits<double>::infinity();
    return (p_win + 0.5 * p_tie) / den;
}

GpcResult gpc_analyze(const TrialDataset& data, const ComparisonRule& rule, const AnalysisOptions& options) {
    rule.validate();
    const auto e_idx = data.arm_members(Arm::E);
    const auto c_idx = data.arm_members(Arm::C);
    if (e_idx.empty() || c_idx.empty()) throw Error(ErrorCode::EmptyArm, "GPC needs both arms nonempty");

    const std::size_t L = rule.levels.size();
    std::vector<std::vector<double>> ev(L, std::vector<double>(e_idx.size()));
    std::vector<std::vector<double>> cv(L, std::vector<double>(c_idx.size()));
    std::vector<double> taus(L);
    auto fill = [&](const std::vector<std::size_t>& idx, std::vector<std::vector<double>>& out) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto d = derive_outcomes(data.trajectories[idx[i]], data.scale);
            for (std::size_t k = 0; k < L; ++k) {
                const auto& level = rule.levels[k];
                const double sign = level.direction == Direction::HigherIsBetter ? 1.0 : -1.0;
                out[k][i] = sign * outcome_value(d, level.outcome);
            }
        }
    };
    fill(e_idx, ev);
    fill(c_idx, cv);
    for (std::size_t k = 0; k < L; ++k) taus[k] = rule.levels[k].tau;

    const auto counts = kernels::hierarchical_pairs(ev, cv, taus, options.exec);

    GpcResult r;
    r.n_e = e_idx.size();
    r.n_c = c_idx.size();
    r.total_pairs = static_cast<std::uint64_t>(r.n_e) * r.n_c;
    const double N = static_cast<double>(r.total_pairs);

    std::vector<std::int64_t> e_cum(r.n_e, 0), c_cum(r.n_c, 0);
    std::vector<double> e_means(r.n_e), c_means(r.n_c);
    std::uint64_t wins = 0, losses = 0;
    for (std::size_t k = 0; k < L; ++k) {
        GpcLevelRow row;
        row.level = rule.levels[k];
        row.pairs_entering = counts.entering[k];
        row.favorable = counts.favorable[k];
        row.unfavorable = counts.unfavorable[k];
        row.neutral = row.pairs_entering - row.favorable - row.unfavorable;
        row.prop_favorable = static_cast<double>(row.favorable) / N;
        row.prop_unfavorable = static_cast<double>(row.unfavorable) / N;
        row.prop_neutral = static_cast<double>(row.neutral) / N;
        wins += row.favorable;
        losses += row.unfavorable;
        row.cumulative_ntb = (static_cast<double>(wins) - static_cast<double>(losses)) / N;

        for (std::size_t i = 0; i < r.n_e; ++i) {
            e_cum[i] += counts.e_level_sums[k][i];
            e_means[i] = static_cast<double>(e_cum[i]) / static_cast<double>(r.n_c);
        }
        for (std::size_t j = 0; j < r.n_c; ++j) {
            c_cum[j] += counts.c_level_sums[k][j];
            c_means[j] = static_cast<double>(c_cum[j]) / static_cast<double>(r.n_e);
        }
        row.inference = ustat_inference(e_means, c_means, options.alpha, options.sided);
        r.levels.push_back(std::move(row));
    }

    r.p_win = static_cast<double>(wins) / N;
    r.p_loss = static_cast<double>(losses) / N;
    r.p_tie = static_cast<double>(counts.terminal_ties) / N;
    r.ntb = r.levels.back().cumulative_ntb;
    r.win_odds = win_odds(r.p_win, r.p_loss, r.p_tie, r.win_odds_infinite);
    return r;
}

GpcResult conventional_wmw(const TrialDataset& data, const AnalysisOptions& options) {
    return gpc_analyze(data, ComparisonRule::ventilator_free_days_only(), options);
}

}  // namespace hiermc
