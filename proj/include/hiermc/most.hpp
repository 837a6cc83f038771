#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hiermc/inference.hpp"
#include "hiermc/kernels.hpp"
#include "hiermc/trial_data.hpp"

namespace hiermc {

/// First-order proportional-odds transition model
///
///   P(Y_t >= y | Y_{t-1} = s) = expit(alpha_y + b_trt*X + b_time*t + b_int*X*t + g_s)
///
/// for y = 2..K, X = 1 on the E arm, t = day index. Previous states in the
/// absorbing set are not modelled. The previous-state effects carry one
/// indicator per non-absorbing state other than `prev_state_ref`, since a
/// full set of indicators is collinear with the intercepts.
///
/// Parameter layout: (alpha_2..alpha_K, [b_trt], [b_time], [b_int], g...).
struct TransitionModelSpec {
    StateScale scale;
    bool treatment = true;
    bool time = true;
    bool treatment_time = true;
    int prev_state_ref = states::kVentilator;

    std::vector<int> prev_state_levels() const;
    int n_intercepts() const { return scale.K - 1; }
    int n_covariates() const;
    int dimension() const { return n_intercepts() + n_covariates(); }
    std::vector<std::string> parameter_names() const;
    /// Covariate row (everything but the intercepts) for one design point.
    std::vector<double> covariates(Arm arm, int day, int previous_state) const;
    void validate() const;
};

nlohmann::json to_json(const TransitionModelSpec& spec);
/// Schema: {K, absorbing, terms: {treatment, time: "linear"|"none",
/// treatment_time, prev_state_ref}}. `base` supplies labels and defaults.
TransitionModelSpec model_spec_from_json(const nlohmann::json& j, const StateScale& base);

struct TransitionRecord {
    std::size_t patient = 0;  // position in the dataset
    int day = 0;
    int previous_state = 0;
    int current_state = 0;
    Arm arm = Arm::C;
};

/// One record per patient-day whose previous state is not absorbing.
std::vector<TransitionRecord> build_transition_records(const TrialDataset& data);

/// One row per record (no aggregation).
kernels::CumulativeLogitData design_rows(std::span<const TransitionRecord> records, const TransitionModelSpec& spec);
/// Records with an identical design point and outcome merged into one
/// weighted row, in a fixed order.
kernels::CumulativeLogitData design_cells(std::span<const TransitionRecord> records, const TransitionModelSpec& spec);

/// Intercepts strictly decreasing, so cumulative probabilities are monotone
/// at every design point.
bool cumulative_valid(const Eigen::VectorXd& theta, const TransitionModelSpec& spec);

/// Throw InvalidCumulative when `cumulative_valid` fails.
double log_likelihood(std::span<const TransitionRecord> records, const Eigen::VectorXd& theta,
                      const TransitionModelSpec& spec);
Eigen::VectorXd gradient(std::span<const TransitionRecord> records, const Eigen::VectorXd& theta,
                         const TransitionModelSpec& spec);

enum class FitStatus { Converged, SeparationSuspected, NonConvergence, EmptyCategory };

std::string_view to_string(FitStatus s);

struct FitOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-8;
    double separation_bound = 15.0;
    std::optional<Eigen::VectorXd> init;
    Execution exec = Execution::Parallel;
};

struct FittedTransitionModel {
    TransitionModelSpec spec;
    Eigen::VectorXd theta;
    Eigen::VectorXd standard_errors;
    Eigen::MatrixXd observed_information;
    double log_likelihood = 0.0;
    double initial_log_likelihood = 0.0;
    double gradient_norm = 0.0;  // max-abs
    int iterations = 0;
    FitStatus status = FitStatus::NonConvergence;
    std::string message;
    std::size_t n_records = 0;
    /// Log-likelihood after every accepted step, starting at the initial value.
    std::vector<double> trace;

    bool converged() const { return status == FitStatus::Converged; }
};

/// Damped Newton on the observed information with step halving; falls back
/// to gradient ascent when the information is not positive definite. Starts
/// from pooled empirical cumulative logits with all slopes at zero unless
/// `options.init` is given.
FittedTransitionModel fit_mle(std::span<const TransitionRecord> records, const TransitionModelSpec& spec,
                              const FitOptions& options = {});

/// K x K row-stochastic matrix for moving into `day`. Absorbing rows are
/// unit vectors.
Eigen::MatrixXd transition_matrix(const TransitionModelSpec& spec, const Eigen::VectorXd& theta, Arm arm, int day);
Eigen::MatrixXd transition_matrix(const FittedTransitionModel& model, Arm arm, int day);

/// Rows are days 0..J, columns states 1..K.
struct SopMatrix {
    Arm arm = Arm::C;
    int baseline_state = states::kHospital;
    Eigen::MatrixXd probabilities;

    int horizon() const { return static_cast<int>(probabilities.rows()) - 1; }
    int K() const { return static_cast<int>(probabilities.cols()); }
};

/// p(0) = unit vector at the baseline state, p(t) = p(t-1) P(t).
SopMatrix sop_forward(const FittedTransitionModel& model, Arm arm, int baseline_state, int horizon_days);
/// Same recursion over caller-supplied matrices, `per_day[t-1]` used for day t.
SopMatrix sop_forward(std::span<const Eigen::MatrixXd> per_day, int baseline_state, Arm arm = Arm::C);

struct TimeInStates {
    std::vector<int> states;
    std::vector<double> per_state;
    double total = 0.0;
};

/// Expected days 1..J spent in `unwell_states`, which must be a down-set
/// {1..m} of the scale; per-state terms sum to the total.
TimeInStates mean_time_unwell(const SopMatrix& sop, const std::vector<int>& unwell_states);

/// Expected days 1..J in each state; sums to J.
std::vector<double> mean_days_per_state(const SopMatrix& sop);

/// Sum over days of P(E state > C state) - P(E state < C state), with the
/// two subjects drawn independently from their arm's occupancy distribution.
double days_benefit(const SopMatrix& e, const SopMatrix& c);

/// Parses "unwell:1,2,3" (the prefix is optional).
std::vector<int> parse_unwell_states(std::string_view text);

struct MostSummary {
    SopMatrix sop_e;
    SopMatrix sop_c;
    TimeInStates unwell_e;
    TimeInStates unwell_c;
    double unwell_difference = 0.0;  // E - C
    double days_benefit = 0.0;
};

MostSummary summarize_most(const FittedTransitionModel& model, const std::vector<int>& unwell_states,
                           int baseline_state, int horizon_days);

/// Statistic vector layout used by the bootstrap: unwell E, unwell C,
/// difference, days benefit, then per-state days for E and for C.
std::vector<double> summary_vector(const MostSummary& s);

struct MostBootstrap {
    BootstrapResult raw;
    Interval unwell_e;
    Interval unwell_c;
    Interval difference;
    Interval days_benefit;
    std::vector<Interval> per_state_e;
    std::vector<Interval> per_state_c;
};

/// Resamples patients within arm, refits, and summarizes. Replicates whose
/// fit does not converge are dropped and counted.
MostBootstrap bootstrap_summary(const TrialDataset& data, const TransitionModelSpec& spec,
                                const std::vector<int>& unwell_states, int replicates, std::uint64_t seed,
                                int baseline_state = states::kHospital, double alpha = 0.05);

}  // namespace hiermc
