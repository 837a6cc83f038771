#include "hiermc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <boost/math/distributions/normal.hpp>

#include "hiermc/parallel.hpp"
#include "hiermc/rng.hpp"

namespace hiermc {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double normal_p_value(double z, Sidedness sided) {
    if (sided == Sidedness::Greater) return 0.5 * std::erfc(z / std::sqrt(2.0));
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

UStatSummary ustat_inference(std::span<const double> e_means, std::span<const double> c_means, double alpha,
                             Sidedness sided) {
    if (e_means.empty() || c_means.empty())
        throw Error(ErrorCode::EmptyArm, "U-statistic inference needs both arms nonempty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");

    UStatSummary s;
    s.e_means.assign(e_means.begin(), e_means.end());
    s.c_means.assign(c_means.begin(), c_means.end());
    s.alpha = alpha;
    s.sided = sided;
    s.estimate = mean_of(e_means);

    if (e_means.size() >= 2 && c_means.size() >= 2) {
        s.variance = sample_variance(e_means, s.estimate) / static_cast<double>(e_means.size()) +
                     sample_variance(c_means, mean_of(c_means)) / static_cast<double>(c_means.size());
    }
    s.se = std::sqrt(s.variance);
    if (!(s.variance > 0.0)) {
        s.degenerate = true;
        s.variance = 0.0;
        s.se = 0.0;
        s.ci = {s.estimate, s.estimate};
        const bool favoured = sided == Sidedness::Greater ? s.estimate > 0.0 : s.estimate != 0.0;
        s.z = s.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), s.estimate);
        s.p_value = favoured ? 0.0 : 1.0;
        return s;
    }
    const double q = normal_quantile(1.0 - alpha / 2.0);
    s.z = s.estimate / s.se;
    s.ci = {s.estimate - q * s.se, s.estimate + q * s.se};
    s.p_value = normal_p_value(s.z, sided);
    return s;
}

Interval percentile_bounds(std::vector<double> values, double alpha) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile bounds of an empty sample");
    std::sort(values.begin(), values.end());
    const auto B = static_cast<double>(values.size());
    auto order_stat = [&](double q) {
        // small epsilon keeps q*B that is an exact integer from rounding up
        auto k = static_cast<long long>(std::ceil(q * B - 1e-9));
        k = std::clamp<long long>(k, 1, static_cast<long long>(values.size()));
        return values[static_cast<std::size_t>(k - 1)];
    };
    return {order_stat(alpha / 2.0), order_stat(1.0 - alpha / 2.0)};
}

TrialDataset resample_within_arms(const TrialDataset& data, std::uint64_t seed) {
    TrialDataset out;
    out.scale = data.scale;
    out.horizon_days = data.horizon_days;
    out.trajectories.reserve(data.trajectories.size());
    Rng rng(seed);
    std::size_t draw = 0;
    for (Arm arm : {Arm::E, Arm::C}) {
        const auto members = data.arm_members(arm);
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto& src = data.trajectories[members[rng.below(members.size())]];
            PatientTrajectory t = src;
            t.id = src.id + "~" + std::to_string(draw++);
            out.trajectories.push_back(std::move(t));
        }
    }
    return out;
}

BootstrapResult percentile_bootstrap(const TrialDataset& data, const Statistic& statistic, int replicates,
                                     std::uint64_t seed, double alpha) {
    if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one replicate");

    BootstrapResult r;
    r.requested = replicates;
    r.seed = seed;
    r.alpha = alpha;
    r.point = statistic(data);

    std::vector<std::optional<std::vector<double>>> values(static_cast<std::size_t>(replicates));
#pragma omp parallel for schedule(dynamic) num_threads(parallel::max_threads())
    for (int b = 0; b < replicates; ++b) {
        const auto sub = derive_seed(seed, streams::kBootstrap, static_cast<std::uint64_t>(b));
        try {
            auto v = statistic(resample_within_arms(data, sub));
            if (v.size() == r.point.size()) values[static_cast<std::size_t>(b)] = std::move(v);
        } catch (const Error&) {
            // dropped; counted below
        }
    }

    r.replicates.assign(r.point.size(), {});
    for (const auto& v : values) {
        if (!v) {
            ++r.failed;
            continue;
        }
        for (std::size_t s = 0; s < v->size(); ++s) r.replicates[s].push_back((*v)[s]);
    }
    if (r.failed == replicates)
        throw Error(ErrorCode::AllReplicatesFailed, "all " + std::to_string(replicates) + " bootstrap replicates failed");
    for (const auto& reps : r.replicates) r.ci.push_back(percentile_bounds(reps, alpha));
    return r;
}

}  // namespace hiermc
