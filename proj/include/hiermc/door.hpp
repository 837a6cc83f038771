#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hiermc/inference.hpp"
#include "hiermc/trial_data.hpp"

namespace hiermc {

/// Conjunction of integer comparisons over {death, home, vfd}.
///
/// Grammar:
///   predicate  := "true" | comparison ( "&&" comparison )*
///   comparison := field op integer
///   field      := "death" | "home" | "vfd"
///   op         := "==" | "!=" | "<" | "<=" | ">" | ">="
///
/// `and` is accepted as a synonym for `&&`.
class Predicate {
public:
    enum class Field { Death, Home, Vfd };
    enum class Op { Eq, Ne, Lt, Le, Gt, Ge };

    struct Comparison {
        Field field;
        Op op;
        int value;
    };

    static Predicate parse(std::string_view text);

    bool operator()(const DerivedOutcomes& d) const;
    const std::string& text() const { return text_; }
    const std::vector<Comparison>& clauses() const { return clauses_; }

private:
    std::string text_;
    std::vector<Comparison> clauses_;
};

struct DoorCategory {
    int rank = 0;
    std::string label;
    Predicate predicate;
};

/// Ranked partition of the outcome space; categories are kept sorted by
/// rank, higher rank is more desirable.
struct DoorSpec {
    std::vector<DoorCategory> categories;

    /// Ranks unique, and every cell of death {0,1} x home {0,1} x
    /// vfd {-1..horizon} matched by exactly one category. Throws SpecGap or
    /// SpecOverlap naming the first offending cell.
    void validate(int horizon_days) const;
    std::size_t position_of_rank(int rank) const;
};

/// Seven-category ranking on death, home at end and ventilator-free days
/// with cutoffs 10 and 25 (both inclusive in the middle band).
DoorSpec guiding_example_spec();

nlohmann::json to_json(const DoorSpec& spec);
DoorSpec door_spec_from_json(const nlohmann::json& j);

/// Rank of the unique matching category.
int map_to_door(const DerivedOutcomes& d, const DoorSpec& spec);

struct DoorArmDistribution {
    Arm arm = Arm::C;
    std::size_t n = 0;
    std::vector<std::size_t> counts;  // by category position

    double proportion(std::size_t position) const {
        return static_cast<double>(counts[position]) / static_cast<double>(n);
    }
};

struct DoorResult {
    std::vector<int> ranks;
    std::vector<std::string> labels;
    DoorArmDistribution e;
    DoorArmDistribution c;
    std::uint64_t total_pairs = 0;
    std::uint64_t favorable = 0;
    std::uint64_t unfavorable = 0;
    std::uint64_t tied = 0;
    double prop_favorable = 0.0;
    double prop_unfavorable = 0.0;
    double prop_neutral = 0.0;
    double door_probability = 0.5;
    double ntb = 0.0;
    double win_odds = 1.0;
    bool win_odds_infinite = false;
    UStatSummary ntb_inference;
    CiScale ci_scale = CiScale::Probability;
    Interval probability_ci;
    double p_value = 1.0;
};

DoorResult door_analyze(const TrialDataset& data, const DoorSpec& spec, const AnalysisOptions& options = {});

struct LongitudinalDoorResult {
    std::vector<double> weights;     // days 1..J
    std::vector<double> daily_ntb;   // days 1..J
    std::vector<std::uint64_t> daily_favorable;
    std::vector<std::uint64_t> daily_unfavorable;
    std::uint64_t pairs_per_day = 0;
    double weighted_ntb = 0.0;
};

std::vector<double> uniform_weights(int horizon_days);

/// JSON array, or numbers separated by commas/whitespace.
std::vector<double> read_weights(const std::filesystem::path& path);

/// Per-day NTB on the daily ordinal state and its weighted sum.
LongitudinalDoorResult longitudinal_door(const TrialDataset& data, std::span<const double> weights,
                                         Execution exec = Execution::Parallel);

}  // namespace hiermc
