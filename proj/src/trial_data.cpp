#include "hiermc/trial_data.hpp"

#include <algorithm>
#include <unordered_set>

namespace hiermc {

char arm_code(Arm arm) { return arm == Arm::E ? 'E' : 'C'; }

Arm parse_arm(std::string_view text) {
    if (text == "E") return Arm::E;
    if (text == "C") return Arm::C;
    throw Error(ErrorCode::DataFormat, "arm must be E or C, got '" + std::string(text) + "'");
}

bool StateScale::is_absorbing(int code) const {
    return std::find(absorbing.begin(), absorbing.end(), code) != absorbing.end();
}

std::string_view StateScale::label(int code) const {
    if (!in_range(code) || static_cast<std::size_t>(code) > labels.size()) return {};
    return labels[static_cast<std::size_t>(code - 1)];
}

void StateScale::validate() const {
    if (K < 2) throw Error(ErrorCode::ConfigError, "state scale needs K >= 2");
    if (labels.size() != static_cast<std::size_t>(K))
        throw Error(ErrorCode::ConfigError, "state scale needs exactly K labels");
    for (int a : absorbing)
        if (!in_range(a)) throw Error(ErrorCode::ConfigError, "absorbing state outside 1..K");
    if (static_cast<int>(absorbing.size()) >= K)
        throw Error(ErrorCode::ConfigError, "at least one state must be non-absorbing");
}

std::size_t TrialDataset::arm_size(Arm arm) const {
    return static_cast<std::size_t>(std::count_if(trajectories.begin(), trajectories.end(),
                                                  [arm](const PatientTrajectory& t) { return t.arm == arm; }));
}

std::vector<std::size_t> TrialDataset::arm_members(Arm arm) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        if (trajectories[i].arm == arm) out.push_back(i);
    return out;
}

namespace {
std::string summarize(const std::vector<Violation>& v) {
    std::string msg = std::to_string(v.size()) + " dataset violation(s)";
    if (!v.empty()) msg += "; first: " + v.front().message;
    return msg;
}
}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::DataFormat : violations.front().rule, summarize(violations)),
      violations_(std::move(violations)) {}

std::vector<Violation> find_violations(const TrialDataset& raw) {
    std::vector<Violation> out;
    std::unordered_set<std::string> seen;
    const auto expected_len = static_cast<std::size_t>(raw.horizon_days) + 1;
    for (const auto& t : raw.trajectories) {
        if (!seen.insert(t.id).second)
            out.push_back({t.id, -1, ErrorCode::DuplicateId, "duplicate patient id '" + t.id + "'"});
        if (t.states.size() != expected_len)
            out.push_back({t.id, -1, ErrorCode::HorizonMismatch,
                           "patient '" + t.id + "' has " + std::to_string(t.states.size()) + " days, expected " +
                               std::to_string(expected_len)});
        int absorbed_in = 0;
        for (std::size_t d = 0; d < t.states.size(); ++d) {
            const int s = t.states[d];
            const int day = static_cast<int>(d);
            if (!raw.scale.in_range(s)) {
                out.push_back({t.id, day, ErrorCode::StateOutOfRange,
                               "patient '" + t.id + "' day " + std::to_string(day) + ": state " + std::to_string(s) +
                                   " outside 1.." + std::to_string(raw.scale.K)});
                continue;
            }
            if (absorbed_in != 0 && s != absorbed_in) {
                out.push_back({t.id, day, ErrorCode::AbsorbingViolation,
                               "patient '" + t.id + "' leaves absorbing state " + std::to_string(absorbed_in) +
                                   " at day " + std::to_string(day)});
            }
            if (absorbed_in == 0 && raw.scale.is_absorbing(s)) absorbed_in = s;
        }
    }
    return out;
}

TrialDataset validate_dataset(TrialDataset raw) {
    auto violations = find_violations(raw);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return raw;
}

DerivedOutcomes derive_outcomes(const PatientTrajectory& traj, const StateScale& scale) {
    DerivedOutcomes out;
    int free_days = 0;
    for (std::size_t d = 1; d < traj.states.size(); ++d) {
        const int s = traj.states[d];
        if (scale.is_absorbing(s)) out.death = 1;
        if (s != states::kVentilator) ++free_days;
    }
    if (!traj.states.empty() && scale.is_absorbing(traj.states.front())) out.death = 1;
    out.home_at_end = (!out.death && traj.states.back() == scale.K) ? 1 : 0;
    out.ventilator_free_days = out.death ? kDeathOverride : free_days;
    return out;
}

EmpiricalSop empirical_sop(const TrialDataset& data, Arm arm) {
    EmpiricalSop sop;
    sop.arm = arm;
    sop.counts.assign(static_cast<std::size_t>(data.horizon_days) + 1,
                      std::vector<std::size_t>(static_cast<std::size_t>(data.scale.K), 0));
    for (const auto& t : data.trajectories) {
        if (t.arm != arm) continue;
        ++sop.n;
        for (std::size_t d = 0; d < sop.counts.size(); ++d)
            ++sop.counts[d][static_cast<std::size_t>(t.states[d] - 1)];
    }
    if (sop.n == 0) throw Error(ErrorCode::EmptyArm, std::string("arm ") + arm_code(arm) + " has no patients");
    return sop;
}

}  // namespace hiermc
