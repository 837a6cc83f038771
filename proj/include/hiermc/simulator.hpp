#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hiermc/trial_data.hpp"

namespace hiermc {

/// Cumulative-logit generator with the same terms as the fitted transition
/// model: P(Y >= y | prev) = expit(intercept_y + treatment*X + time*t
/// + treatment_time*X*t + prev_state_effect[prev]).
struct CumulativeLogitParams {
    std::vector<double> intercepts;  // y = 2..K, strictly decreasing
    double treatment = 0.0;
    double time = 0.0;
    double treatment_time = 0.0;
    std::map<int, double> prev_state_effects;  // missing codes contribute 0
};

/// Ground-truth first-order Markov chain. `matrices[arm][day - 1]` is the
/// K x K transition matrix used to move from day-1 to day.
class GroundTruthModel {
public:
    static GroundTruthModel from_parameters(const StateScale& scale, const CumulativeLogitParams& params,
                                            int horizon_days, int baseline_state = states::kHospital);

    /// One matrix per arm, reused every day.
    static GroundTruthModel stationary(const StateScale& scale, const Eigen::MatrixXd& matrix_e,
                                       const Eigen::MatrixXd& matrix_c, int horizon_days,
                                       int baseline_state = states::kHospital);

    /// Per-day matrices for each arm; both vectors hold horizon_days entries.
    static GroundTruthModel from_matrices(const StateScale& scale, std::vector<Eigen::MatrixXd> per_day_e,
                                          std::vector<Eigen::MatrixXd> per_day_c,
                                          int baseline_state = states::kHospital);

    const StateScale& scale() const { return scale_; }
    int horizon_days() const { return static_cast<int>(matrices_[0].size()); }
    int baseline_state() const { return baseline_state_; }
    const Eigen::MatrixXd& transition(Arm arm, int day) const;

    /// Throws InvalidTransitionRow unless every row is a probability vector
    /// and every absorbing row is the matching unit vector.
    void validate() const;

private:
    GroundTruthModel() = default;

    StateScale scale_;
    int baseline_state_ = states::kHospital;
    std::vector<Eigen::MatrixXd> matrices_[2];
};

/// Simulation config file: scale, horizon, arm size and generator.
struct SimulationConfig {
    StateScale scale;
    int horizon_days = 28;
    int n_per_arm = 100;
    int baseline_state = states::kHospital;
    nlohmann::json generator;

    GroundTruthModel model() const;
};

SimulationConfig simulation_config_from_json(const nlohmann::json& j);
SimulationConfig read_simulation_config(const std::filesystem::path& path);

/// Every patient starts at the model's baseline state. Patient k (E arm first,
/// then C) draws from its own sub-stream derived from (seed, k), so output
/// does not depend on the number of threads.
TrialDataset simulate_trial(const GroundTruthModel& model, int n_per_arm, int horizon_days, std::uint64_t seed);

}  // namespace hiermc
