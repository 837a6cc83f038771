#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hiermc/inference.hpp"
#include "hiermc/kernels.hpp"
#include "hiermc/trial_data.hpp"

namespace hiermc {

enum class Outcome { Death, Home, VentilatorFreeDays };
enum class Direction { HigherIsBetter, LowerIsBetter };

std::string_view to_string(Outcome o);
std::string_view to_string(Direction d);
Outcome parse_outcome(std::string_view s);
Direction parse_direction(std::string_view s);

double outcome_value(const DerivedOutcomes& d, Outcome o);

struct RuleLevel {
    Outcome outcome = Outcome::Death;
    Direction direction = Direction::HigherIsBetter;
    double tau = 0.0;
};

/// Prioritized comparison rule; level 0 has the highest priority.
struct ComparisonRule {
    std::vector<RuleLevel> levels;

    /// Nonempty, finite non-negative thresholds, zero thresholds on binary outcomes.
    void validate() const;

    /// Death (lower is better), home at end (higher), ventilator-free days
    /// (higher, threshold 3 days).
    static ComparisonRule guiding_example();
    /// Ventilator-free days only, threshold 0.
    static ComparisonRule ventilator_free_days_only();
};

nlohmann::json to_json(const ComparisonRule& rule);
ComparisonRule rule_from_json(const nlohmann::json& j);

/// +1 when the E value beats the C value by more than tau after applying the
/// level's direction, -1 for the mirror case, 0 otherwise.
int score_pair_level(double e_value, double c_value, const RuleLevel& level);

struct PairScore {
    int score = 0;
    std::optional<std::size_t> deciding_level;
};

PairScore score_pair(const DerivedOutcomes& e, const DerivedOutcomes& c, const ComparisonRule& rule);

/// One row of the decomposition table. Proportions are relative to the
/// total number of pairs, not to the pairs entering the level.
struct GpcLevelRow {
    RuleLevel level;
    std::uint64_t pairs_entering = 0;
    std::uint64_t favorable = 0;
    std::uint64_t unfavorable = 0;
    std::uint64_t neutral = 0;
    double prop_favorable = 0.0;
    double prop_unfavorable = 0.0;
    double prop_neutral = 0.0;
    double cumulative_ntb = 0.0;
    UStatSummary inference;  // of the cumulative NTB up to this level
};

struct GpcResult {
    std::size_t n_e = 0;
    std::size_t n_c = 0;
    std::uint64_t total_pairs = 0;
    std::vector<GpcLevelRow> levels;
    double p_win = 0.0;
    double p_loss = 0.0;
    double p_tie = 0.0;
    double ntb = 0.0;
    double win_odds = 0.0;
    /// Set when P(loss) + P(tie)/2 == 0; win_odds is +inf then.
    bool win_odds_infinite = false;

    const UStatSummary& overall() const { return levels.back().inference; }
};

GpcResult gpc_analyze(const TrialDataset& data, const ComparisonRule& rule, const AnalysisOptions& options = {});

/// Single-level ventilator-free-days analysis with the death override and
/// no threshold.
GpcResult conventional_wmw(const TrialDataset& data, const AnalysisOptions& options = {});

/// (P_win + P_tie/2) / (P_loss + P_tie/2); sets `infinite` on a zero denominator.
double win_odds(double p_win, double p_loss, double p_tie, bool& infinite);

}  // namespace hiermc
