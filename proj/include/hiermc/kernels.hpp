#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hiermc {

/// Parallel is the default for every data-parallel loop; Serial runs the
/// plain reference loop and is kept for tests and benchmarks.
enum class Execution { Parallel, Serial };

namespace kernels {

/// All-pairs comparison of two integer samples (higher is better).
struct OrdinalPairCounts {
    std::uint64_t favorable = 0;
    std::uint64_t unfavorable = 0;
    std::uint64_t tied = 0;
    std::vector<std::int64_t> e_score_sums;  // sum over C of U_ij for each E subject
    std::vector<std::int64_t> c_score_sums;  // sum over E of U_ij for each C subject
};

OrdinalPairCounts ordinal_pairs(std::span<const int> e, std::span<const int> c,
                                Execution exec = Execution::Parallel);

/// Prioritized multi-level pair scoring. values[level][subject] are oriented
/// so that larger is better; a pair is decided at the first level where one
/// side exceeds the other by more than taus[level].
struct HierarchicalPairCounts {
    std::vector<std::uint64_t> entering;
    std::vector<std::uint64_t> favorable;
    std::vector<std::uint64_t> unfavorable;
    std::uint64_t terminal_ties = 0;
    /// [level][subject]: sum of scores of the pairs decided at that level.
    std::vector<std::vector<std::int64_t>> e_level_sums;
    std::vector<std::vector<std::int64_t>> c_level_sums;
};

HierarchicalPairCounts hierarchical_pairs(const std::vector<std::vector<double>>& e_values,
                                          const std::vector<std::vector<double>>& c_values,
                                          std::span<const double> taus, Execution exec = Execution::Parallel);

/// Weighted observations for a cumulative-logit model with K ordered
/// categories: P(Y >= y | x) = expit(alpha_y + x'beta), y = 2..K.
/// Parameter vector layout is (alpha_2..alpha_K, beta).
struct CumulativeLogitData {
    int K = 0;
    int n_covariates = 0;
    std::vector<int> category;     // 1..K
    std::vector<double> covariates;  // row-major, n_covariates per row
    std::vector<double> weight;

    std::size_t size() const { return category.size(); }
    void add(int y, std::span<const double> x, double w);
};

enum class Derivatives { None, Gradient, Hessian };

struct LikelihoodTerms {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// Caller guarantees strictly decreasing intercepts. Parallel execution sums
/// fixed-size blocks in index order, so the result does not depend on the
/// thread count.
LikelihoodTerms cumulative_logit_terms(const CumulativeLogitData& data, const Eigen::VectorXd& theta,
                                       Derivatives level, Execution exec = Execution::Parallel);

}  // namespace kernels
}  // namespace hiermc
