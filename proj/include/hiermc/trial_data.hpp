#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hiermc/error.hpp"

namespace hiermc {

enum class Arm : std::uint8_t { E, C };

char arm_code(Arm arm);
Arm parse_arm(std::string_view text);

/// Ordinal codes of the four-state critical-care scale. Higher is better.
namespace states {
inline constexpr int kDead = 1;
inline constexpr int kVentilator = 2;
inline constexpr int kHospital = 3;
inline constexpr int kHome = 4;
}  // namespace states

/// Ordinal health-state scale with codes 1..K and a set of absorbing codes.
struct StateScale {
    int K = 4;
    std::vector<int> absorbing{states::kDead};
    std::vector<std::string> labels{"dead", "ventilator", "hospital", "home"};

    bool in_range(int code) const { return code >= 1 && code <= K; }
    bool is_absorbing(int code) const;
    std::string_view label(int code) const;

    /// Throws ConfigError on inconsistent K / labels / absorbing codes.
    void validate() const;

    static StateScale guiding_example() { return {}; }

    bool operator==(const StateScale&) const = default;
};

struct PatientTrajectory {
    std::string id;
    Arm arm = Arm::C;
    /// One state per day; index 0 is the baseline day.
    std::vector<int> states;
};

struct TrialDataset {
    StateScale scale;
    int horizon_days = 28;
    std::vector<PatientTrajectory> trajectories;

    std::size_t arm_size(Arm arm) const;
    /// Positions in `trajectories` belonging to `arm`, in dataset order.
    std::vector<std::size_t> arm_members(Arm arm) const;
};

struct Violation {
    std::string patient_id;
    int day = -1;  // -1 when the violation is not tied to a day
    ErrorCode rule;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Every invariant violation in `raw`, in dataset order.
std::vector<Violation> find_violations(const TrialDataset& raw);

/// Returns `raw` unchanged when it is valid, otherwise throws ValidationError.
TrialDataset validate_dataset(TrialDataset raw);

/// Scalar outcomes read off a trajectory. Ventilator-free days uses -1 as
/// the override value for patients who died.
struct DerivedOutcomes {
    int death = 0;
    int home_at_end = 0;
    int ventilator_free_days = 0;

    bool operator==(const DerivedOutcomes&) const = default;
};

inline constexpr int kDeathOverride = -1;

DerivedOutcomes derive_outcomes(const PatientTrajectory& traj, const StateScale& scale);

/// Per-arm occupancy counts, row = day, column = state code - 1.
struct EmpiricalSop {
    Arm arm = Arm::C;
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> counts;

    double proportion(int day, int state) const {
        return static_cast<double>(counts[static_cast<std::size_t>(day)][static_cast<std::size_t>(state - 1)]) /
               static_cast<double>(n);
    }
};

EmpiricalSop empirical_sop(const TrialDataset& data, Arm arm);

}  // namespace hiermc
