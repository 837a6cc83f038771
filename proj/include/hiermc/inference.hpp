#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hiermc/kernels.hpp"
#include "hiermc/trial_data.hpp"

namespace hiermc {

enum class Sidedness {
    TwoSided,
    Greater,  // H1: effect > 0
};

/// Scale on which a probability-type interval is built.
enum class CiScale { Probability, Logit };

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sample U-statistic summary built from per-subject mean pair scores.
/// Variance is the leading-order projection estimate S_E^2/n_E + S_C^2/n_C.
struct UStatSummary {
    std::vector<double> e_means;
    std::vector<double> c_means;
    double estimate = 0.0;
    double variance = 0.0;
    double se = 0.0;
    double z = 0.0;
    Interval ci;
    double p_value = 1.0;
    double alpha = 0.05;
    Sidedness sided = Sidedness::TwoSided;
    /// Variance is zero (or undefined for n < 2). The interval collapses to the
    /// estimate and p is 0 when the estimate is nonzero in the tested
    /// direction, 1 otherwise.
    bool degenerate = false;
};

struct AnalysisOptions {
    double alpha = 0.05;
    Sidedness sided = Sidedness::TwoSided;
    CiScale ci_scale = CiScale::Probability;
    Execution exec = Execution::Parallel;
};

UStatSummary ustat_inference(std::span<const double> e_means, std::span<const double> c_means, double alpha = 0.05,
                             Sidedness sided = Sidedness::TwoSided);

double normal_cdf(double x);
double normal_quantile(double p);

/// p-value of a z statistic under the requested sidedness.
double normal_p_value(double z, Sidedness sided);

/// Inverse-ECDF percentile bounds: order statistics ceil(q*B) for
/// q = alpha/2 and 1 - alpha/2 (1-based, clamped to [1, B]).
Interval percentile_bounds(std::vector<double> values, double alpha = 0.05);

/// Draws each arm's patients with replacement, keeping arm sizes. Copies get
/// unique ids of the form "<id>~<draw>".
TrialDataset resample_within_arms(const TrialDataset& data, std::uint64_t seed);

using Statistic = std::function<std::vector<double>(const TrialDataset&)>;

struct BootstrapResult {
    std::vector<double> point;
    std::vector<Interval> ci;
    /// [statistic][successful replicate], in replicate order.
    std::vector<std::vector<double>> replicates;
    int requested = 0;
    int failed = 0;
    std::uint64_t seed = 0;
    double alpha = 0.05;

    /// More than 2% of replicates dropped.
    bool high_failure_rate() const { return failed * 50 > requested; }
};

/// Replicate b resamples with sub-seed derive_seed(seed, bootstrap, b) and
/// replicates run in parallel. A replicate whose statistic throws
/// hiermc::Error is dropped and counted. The statistic must be safe to call
/// concurrently.
BootstrapResult percentile_bootstrap(const TrialDataset& data, const Statistic& statistic, int replicates,
                                     std::uint64_t seed, double alpha = 0.05);

}  // namespace hiermc
