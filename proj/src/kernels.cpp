#include "hiermc/kernels.hpp"

#include <cmath>
#include <limits>

#include "hiermc/parallel.hpp"

namespace hiermc::kernels {

namespace {

inline int compare(int e, int c) { return (e > c) - (e < c); }

}  // namespace

OrdinalPairCounts ordinal_pairs(std::span<const int> e, std::span<const int> c, Execution exec) {
    OrdinalPairCounts out;
    const std::size_t ne = e.size();
    const std::size_t nc = c.size();
    out.e_score_sums.assign(ne, 0);
    out.c_score_sums.assign(nc, 0);

    if (exec == Execution::Serial) {
        for (std::size_t i = 0; i < ne; ++i) {
            for (std::size_t j = 0; j < nc; ++j) {
                const int u = compare(e[i], c[j]);
                out.e_score_sums[i] += u;
                out.c_score_sums[j] += u;
                if (u > 0) ++out.favorable;
                else if (u < 0) ++out.unfavorable;
                else ++out.tied;
            }
        }
        return out;
    }

    std::uint64_t fav = 0, unfav = 0, tied = 0;
    const auto ne_signed = static_cast<long long>(ne);
#pragma omp parallel num_threads(parallel::max_threads()) reduction(+ : fav, unfav, tied)
    {
        std::vector<std::int64_t> c_local(nc, 0);
#pragma omp for schedule(static)
        for (long long ii = 0; ii < ne_signed; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const int ei = e[i];
            std::int64_t row = 0;
            for (std::size_t j = 0; j < nc; ++j) {
                const int u = compare(ei, c[j]);
                row += u;
                c_local[j] += u;
                fav += u > 0;
                unfav += u < 0;
                tied += u == 0;
            }
            out.e_score_sums[i] = row;
        }
#pragma omp critical(hiermc_ordinal_pairs)
        for (std::size_t j = 0; j < nc; ++j) out.c_score_sums[j] += c_local[j];
    }
    out.favorable = fav;
    out.unfavorable = unfav;
    out.tied = tied;
    return out;
}

namespace {

struct LevelAccumulator {
    std::vector<std::uint64_t> entering, favorable, unfavorable;
    std::uint64_t terminal_ties = 0;
    std::vector<std::vector<std::int64_t>> c_level_sums;

    LevelAccumulator(std::size_t levels, std::size_t nc)
        : entering(levels, 0), favorable(levels, 0), unfavorable(levels, 0),
          c_level_sums(levels, std::vector<std::int64_t>(nc, 0)) {}

    void merge_into(HierarchicalPairCounts& out) const {
        for (std::size_t k = 0; k < entering.size(); ++k) {
            out.entering[k] += entering[k];
            out.favorable[k] += favorable[k];
            out.unfavorable[k] += unfavorable[k];
            for (std::size_t j = 0; j < c_level_sums[k].size(); ++j) out.c_level_sums[k][j] += c_level_sums[k][j];
        }
        out.terminal_ties += terminal_ties;
    }
};

// Scores every pair (i, j) for one E subject i.
inline void score_row(std::size_t i, const std::vector<std::vector<double>>& ev,
                      const std::vector<std::vector<double>>& cv, std::span<const double> taus,
                      LevelAccumulator& acc, std::vector<std::vector<std::int64_t>>& e_level_sums) {
    const std::size_t levels = taus.size();
    const std::size_t nc = cv.empty() ? 0 : cv[0].size();
    for (std::size_t j = 0; j < nc; ++j) {
        std::size_t k = 0;
        for (; k < levels; ++k) {
            ++acc.entering[k];
            const double a = ev[k][i];
            const double b = cv[k][j];
            if (a > b + taus[k]) {
                ++acc.favorable[k];
                ++e_level_sums[k][i];
                ++acc.c_level_sums[k][j];
                break;
            }
            if (b > a + taus[k]) {
                ++acc.unfavorable[k];
                --e_level_sums[k][i];
                --acc.c_level_sums[k][j];
                break;
            }
        }
        if (k == levels) ++acc.terminal_ties;
    }
}

}  // namespace

HierarchicalPairCounts hierarchical_pairs(const std::vector<std::vector<double>>& e_values,
                                          const std::vector<std::vector<double>>& c_values,
                                          std::span<const double> taus, Execution exec) {
    const std::size_t levels = taus.size();
    const std::size_t ne = levels ? e_values[0].size() : 0;
    const std::size_t nc = levels ? c_values[0].size() : 0;

    HierarchicalPairCounts out;
    out.entering.assign(levels, 0);
    out.favorable.assign(levels, 0);
    out.unfavorable.assign(levels, 0);
    out.e_level_sums.assign(levels, std::vector<std::int64_t>(ne, 0));
    out.c_level_sums.assign(levels, std::vector<std::int64_t>(nc, 0));

    if (exec == Execution::Serial) {
        LevelAccumulator acc(levels, nc);
        for (std::size_t i = 0; i < ne; ++i) score_row(i, e_values, c_values, taus, acc, out.e_level_sums);
        acc.merge_into(out);
        return out;
    }

    const auto ne_signed = static_cast<long long>(ne);
#pragma omp parallel num_threads(parallel::max_threads())
    {
        LevelAccumulator acc(levels, nc);
#pragma omp for schedule(static)
        for (long long i = 0; i < ne_signed; ++i)
            score_row(static_cast<std::size_t>(i), e_values, c_values, taus, acc, out.e_level_sums);
#pragma omp critical(hiermc_hierarchical_pairs)
        acc.merge_into(out);
    }
    return out;
}

void CumulativeLogitData::add(int y, std::span<const double> x, double w) {
    category.push_back(y);
    covariates.insert(covariates.end(), x.begin(), x.end());
    weight.push_back(w);
}

namespace {

constexpr std::size_t kBlock = 256;

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Adds the contribution of observations [begin, end) to `t`.
void accumulate(const CumulativeLogitData& d, const Eigen::VectorXd& theta, Derivatives level, std::size_t begin,
                std::size_t end, LikelihoodTerms& t) {
    const int K = d.K;
    const int p = d.n_covariates;
    const int n_alpha = K - 1;
    const int dim = n_alpha + p;
    Eigen::VectorXd dpi(dim);
    Eigen::VectorXd xv(p);

    for (std::size_t r = begin; r < end; ++r) {
        const int y = d.category[r];
        const double w = d.weight[r];
        const double* x = d.covariates.data() + r * static_cast<std::size_t>(p);
        double eta = 0.0;
        for (int k = 0; k < p; ++k) eta += x[k] * theta[n_alpha + k];

        // upper cutoff P(Y >= y), lower cutoff P(Y >= y + 1)
        const bool has_upper = y >= 2;
        const bool has_lower = y <= K - 1;
        const double Fa = has_upper ? expit(theta[y - 2] + eta) : 1.0;
        const double Fb = has_lower ? expit(theta[y - 1] + eta) : 0.0;
        const double pi = Fa - Fb;
        t.value += w * (pi > 0.0 ? std::log(pi) : -std::numeric_limits<double>::infinity());
        if (level == Derivatives::None) continue;

        const double fa = Fa * (1.0 - Fa);
        const double fb = Fb * (1.0 - Fb);
        dpi.setZero();
        if (has_upper) dpi[y - 2] += fa;
        if (has_lower) dpi[y - 1] -= fb;
        for (int k = 0; k < p; ++k) {
            xv[k] = x[k];
            dpi[n_alpha + k] = (fa - fb) * x[k];
        }
        t.gradient.noalias() += (w / pi) * dpi;
        if (level != Derivatives::Hessian) continue;

        const double dfa = fa * (1.0 - 2.0 * Fa);
        const double dfb = fb * (1.0 - 2.0 * Fb);
        const double s = w / pi;
        // second derivative of pi, assembled block by block
        if (has_upper) {
            t.hessian(y - 2, y - 2) += s * dfa;
            t.hessian.block(y - 2, n_alpha, 1, p) += (s * dfa) * xv.transpose();
            t.hessian.block(n_alpha, y - 2, p, 1) += (s * dfa) * xv;
        }
        if (has_lower) {
            t.hessian(y - 1, y - 1) -= s * dfb;
            t.hessian.block(y - 1, n_alpha, 1, p) -= (s * dfb) * xv.transpose();
            t.hessian.block(n_alpha, y - 1, p, 1) -= (s * dfb) * xv;
        }
        t.hessian.block(n_alpha, n_alpha, p, p).noalias() += (s * (dfa - dfb)) * (xv * xv.transpose());
        t.hessian.noalias() -= (w / (pi * pi)) * (dpi * dpi.transpose());
    }
}

LikelihoodTerms zero_terms(int dim, Derivatives level) {
    LikelihoodTerms t;
    if (level != Derivatives::None) t.gradient = Eigen::VectorXd::Zero(dim);
    if (level == Derivatives::Hessian) t.hessian = Eigen::MatrixXd::Zero(dim, dim);
    return t;
}

}  // namespace

LikelihoodTerms cumulative_logit_terms(const CumulativeLogitData& data, const Eigen::VectorXd& theta,
                                       Derivatives level, Execution exec) {
    const int dim = data.K - 1 + data.n_covariates;
    const std::size_t n = data.size();

    if (exec == Execution::Serial) {
        LikelihoodTerms t = zero_terms(dim, level);
        accumulate(data, theta, level, 0, n, t);
        return t;
    }

    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<LikelihoodTerms> partial(n_blocks);
    const auto nb_signed = static_cast<long long>(n_blocks);
#pragma omp parallel for schedule(static) num_threads(parallel::max_threads())
    for (long long b = 0; b < nb_signed; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        partial[ub] = zero_terms(dim, level);
        accumulate(data, theta, level, ub * kBlock, std::min(n, (ub + 1) * kBlock), partial[ub]);
    }

    LikelihoodTerms t = zero_terms(dim, level);
    for (const auto& part : partial) {
        t.value += part.value;
        if (level != Derivatives::None) t.gradient += part.gradient;
        if (level == Derivatives::Hessian) t.hessian += part.hessian;
    }
    return t;
}

}  // namespace hiermc::kernels
