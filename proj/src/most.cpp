#include "hiermc/most.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace hiermc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

// --- specification -----------------------------------------------------

std::vector<int> TransitionModelSpec::prev_state_levels() const {
    std::vector<int> out;
    for (int s = 1; s <= scale.K; ++s)
        if (!scale.is_absorbing(s) && s != prev_state_ref) out.push_back(s);
    return out;
}

int TransitionModelSpec::n_covariates() const {
    return static_cast<int>(treatment) + static_cast<int>(time) + static_cast<int>(treatment_time) +
           static_cast<int>(prev_state_levels().size());
}

std::vector<std::string> TransitionModelSpec::parameter_names() const {
    std::vector<std::string> names;
    for (int y = 2; y <= scale.K; ++y) names.push_back("alpha_" + std::to_string(y));
    if (treatment) names.emplace_back("treatment");
    if (time) names.emplace_back("time");
    if (treatment_time) names.emplace_back("treatment_time");
    for (int s : prev_state_levels()) names.push_back("prev_state_" + std::to_string(s));
    return names;
}

std::vector<double> TransitionModelSpec::covariates(Arm arm, int day, int previous_state) const {
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(n_covariates()));
    const double treated = arm == Arm::E ? 1.0 : 0.0;
    if (treatment) x.push_back(treated);
    if (time) x.push_back(day);
    if (treatment_time) x.push_back(treated * day);
    for (int s : prev_state_levels()) x.push_back(previous_state == s ? 1.0 : 0.0);
    return x;
}

void TransitionModelSpec::validate() const {
    scale.validate();
    if (!scale.in_range(prev_state_ref) || scale.is_absorbing(prev_state_ref))
        throw Error(ErrorCode::ConfigError, "prev_state_ref must be a non-absorbing state");
}

json to_json(const TransitionModelSpec& spec) {
    return {{"K", spec.scale.K},
            {"absorbing", spec.scale.absorbing},
            {"terms",
             {{"treatment", spec.treatment},
              {"time", spec.time ? "linear" : "none"},
              {"treatment_time", spec.treatment_time},
              {"prev_state_ref", spec.prev_state_ref}}}};
}

TransitionModelSpec model_spec_from_json(const json& j, const StateScale& base) {
    TransitionModelSpec spec;
    spec.scale = base;
    try {
        if (j.contains("K") && j["K"].get<int>() != base.K)
            throw Error(ErrorCode::ConfigError, "model K does not match the dataset");
        if (j.contains("absorbing")) spec.scale.absorbing = j["absorbing"].get<std::vector<int>>();
        if (j.contains("terms")) {
            const auto& t = j["terms"];
            spec.treatment = t.value("treatment", true);
            const auto time = t.value("time", std::string("linear"));
            if (time != "linear" && time != "none")
                throw Error(ErrorCode::ConfigError, "time term must be \"linear\" or \"none\"");
            spec.time = time == "linear";
            spec.treatment_time = t.value("treatment_time", true);
            spec.prev_state_ref = t.value("prev_state_ref", states::kVentilator);
        }
        if (j.value("link", std::string("logit")) != "logit")
            throw Error(ErrorCode::ConfigError, "only the logit link is supported");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("model spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

// --- records and design -------------------------------------------------

std::vector<TransitionRecord> build_transition_records(const TrialDataset& data) {
    std::vector<TransitionRecord> out;
    for (std::size_t p = 0; p < data.trajectories.size(); ++p) {
        const auto& t = data.trajectories[p];
        for (std::size_t d = 1; d < t.states.size(); ++d) {
            if (data.scale.is_absorbing(t.states[d - 1])) break;
            out.push_back({p, static_cast<int>(d), t.states[d - 1], t.states[d], t.arm});
        }
    }
    return out;
}

kernels::CumulativeLogitData design_rows(std::span<const TransitionRecord> records, const TransitionModelSpec& spec) {
    kernels::CumulativeLogitData d;
    d.K = spec.scale.K;
    d.n_covariates = spec.n_covariates();
    for (const auto& r : records) d.add(r.current_state, spec.covariates(r.arm, r.day, r.previous_state), 1.0);
    return d;
}

kernels::CumulativeLogitData design_cells(std::span<const TransitionRecord> records, const TransitionModelSpec& spec) {
    // key: (arm, day, previous, current); ordered map gives a fixed row order
    std::map<std::tuple<int, int, int, int>, double> cells;
    for (const auto& r : records)
        cells[{static_cast<int>(r.arm), r.day, r.previous_state, r.current_state}] += 1.0;
    kernels::CumulativeLogitData d;
    d.K = spec.scale.K;
    d.n_covariates = spec.n_covariates();
    for (const auto& [key, w] : cells) {
        const auto [arm, day, prev, cur] = key;
        d.add(cur, spec.covariates(static_cast<Arm>(arm), day, prev), w);
    }
    return d;
}

bool cumulative_valid(const VectorXd& theta, const TransitionModelSpec& spec) {
    if (theta.size() != spec.dimension() || !theta.allFinite()) return false;
    for (int k = 1; k < spec.n_intercepts(); ++k)
        if (!(theta[k] < theta[k - 1])) return false;
    return true;
}

namespace {

void require_valid(const VectorXd& theta, const TransitionModelSpec& spec) {
    if (theta.size() != spec.dimension())
        throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong length");
    if (!cumulative_valid(theta, spec))
        throw Error(ErrorCode::InvalidCumulative, "intercepts must be strictly decreasing");
}

}  // namespace

double log_likelihood(std::span<const TransitionRecord> records, const VectorXd& theta,
                      const TransitionModelSpec& spec) {
    require_valid(theta, spec);
    return kernels::cumulative_logit_terms(design_cells(records, spec), theta, kernels::Derivatives::None).value;
}

VectorXd gradient(std::span<const TransitionRecord> records, const VectorXd& theta, const TransitionModelSpec& spec) {
    require_valid(theta, spec);
    return kernels::cumulative_logit_terms(design_cells(records, spec), theta, kernels::Derivatives::Gradient)
        .gradient;
}

// --- fitting ------------------------------------------------------------

std::string_view to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Converged: return "converged";
        case FitStatus::SeparationSuspected: return "separation_suspected";
        case FitStatus::NonConvergence: return "nonconvergence";
        case FitStatus::EmptyCategory: return "empty_category";
    }
    return "?";
}

namespace {

double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Empirical cumulative logits of the pooled outcome; nullopt if a category
// or a previous-state level is never observed.
std::optional<VectorXd> default_init(const kernels::CumulativeLogitData& d, const TransitionModelSpec& spec,
                                     std::string& why) {
    const int K = spec.scale.K;
    std::vector<double> by_category(static_cast<std::size_t>(K) + 1, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < d.size(); ++r) {
        by_category[static_cast<std::size_t>(d.category[r])] += d.weight[r];
        total += d.weight[r];
    }
    for (int y = 1; y <= K; ++y) {
        if (by_category[static_cast<std::size_t>(y)] == 0.0) {
            why = "state " + std::to_string(y) + " is never entered";
            return std::nullopt;
        }
    }
    const auto levels = spec.prev_state_levels();
    const int first_gamma = spec.n_intercepts() + spec.n_covariates() - static_cast<int>(levels.size());
    for (std::size_t g = 0; g < levels.size(); ++g) {
        double w = 0.0;
        for (std::size_t r = 0; r < d.size(); ++r)
            if (d.covariates[r * static_cast<std::size_t>(d.n_covariates) +
                             static_cast<std::size_t>(first_gamma - spec.n_intercepts()) + g] != 0.0)
                w += d.weight[r];
        if (w == 0.0) {
            why = "no transitions out of state " + std::to_string(levels[g]);
            return std::nullopt;
        }
    }
    VectorXd theta = VectorXd::Zero(spec.dimension());
    double at_or_above = total;
    for (int y = 2; y <= K; ++y) {
        at_or_above -= by_category[static_cast<std::size_t>(y - 1)];
        const double p = at_or_above / total;
        theta[y - 2] = std::log(p / (1.0 - p));
    }
    return theta;
}

}  // namespace

FittedTransitionModel fit_mle(std::span<const TransitionRecord> records, const TransitionModelSpec& spec,
                              const FitOptions& options) {
    spec.validate();
    FittedTransitionModel fit;
    fit.spec = spec;
    fit.n_records = records.size();
    if (records.empty()) {
        fit.status = FitStatus::EmptyCategory;
        fit.message = "no transition records";
        return fit;
    }

    const auto cells = design_cells(records, spec);
    std::string why;
    VectorXd theta;
    if (options.init) {
        theta = *options.init;
        require_valid(theta, spec);
    } else if (auto init = default_init(cells, spec, why)) {
        theta = *init;
    } else {
        fit.status = FitStatus::EmptyCategory;
        fit.message = why;
        return fit;
    }

    using kernels::Derivatives;
    auto eval = [&](const VectorXd& t) {
        return kernels::cumulative_logit_terms(cells, t, Derivatives::Hessian, options.exec);
    };

    auto terms = eval(theta);
    fit.initial_log_likelihood = terms.value;
    fit.trace.push_back(terms.value);
    bool converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const double gnorm = max_abs(terms.gradient);
        if (gnorm <= options.gradient_tolerance) {
            converged = true;
            break;
        }
        const MatrixXd info = -terms.hessian;
        Eigen::LDLT<MatrixXd> ldlt(info);
        VectorXd direction;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
            direction = ldlt.solve(terms.gradient);
        } else {
            direction = terms.gradient / std::max(1.0, terms.gradient.norm());
        }

        // rounding slack near the optimum, where Newton steps change the
        // log-likelihood by less than its representable resolution
        const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(terms.value));
        bool accepted = false;
        double step = 1.0;
        for (int h = 0; h < 60 && !accepted; ++h, step *= 0.5) {
            const VectorXd candidate = theta + step * direction;
            if (!cumulative_valid(candidate, spec)) continue;
            auto cand = eval(candidate);
            if (!std::isfinite(cand.value)) continue;
            if (cand.value > terms.value ||
                (cand.value >= terms.value - slack && max_abs(cand.gradient) < gnorm)) {
                theta = candidate;
                terms = std::move(cand);
                accepted = true;
            }
        }
        if (!accepted) break;
        fit.trace.push_back(terms.value);
    }

    fit.theta = theta;
    fit.iterations = it;
    fit.log_likelihood = terms.value;
    fit.gradient_norm = max_abs(terms.gradient);
    fit.observed_information = -terms.hessian;
    converged = converged || fit.gradient_norm <= options.gradient_tolerance;

    Eigen::LDLT<MatrixXd> ldlt(fit.observed_information);
    const bool info_pd = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
    if (info_pd) {
        const MatrixXd cov = ldlt.solve(MatrixXd::Identity(spec.dimension(), spec.dimension()));
        fit.standard_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        fit.standard_errors = VectorXd::Constant(spec.dimension(), std::numeric_limits<double>::quiet_NaN());
    }

    if (!converged || !info_pd) {
        fit.status = FitStatus::NonConvergence;
        std::ostringstream os;
        os << "no convergence after " << it << " iterations (max |gradient| " << fit.gradient_norm << ")";
        fit.message = os.str();
    } else if (max_abs(theta) > options.separation_bound) {
        fit.status = FitStatus::SeparationSuspected;
        fit.message = "a parameter exceeds the separation bound";
    } else {
        fit.status = FitStatus::Converged;
    }
    return fit;
}

// --- transition matrices and occupancy ---------------------------------

MatrixXd transition_matrix(const TransitionModelSpec& spec, const VectorXd& theta, Arm arm, int day) {
    require_valid(theta, spec);
    const int K = spec.scale.K;
    const int n_alpha = spec.n_intercepts();
    MatrixXd m = MatrixXd::Zero(K, K);
    for (int prev = 1; prev <= K; ++prev) {
        if (spec.scale.is_absorbing(prev)) {
            m(prev - 1, prev - 1) = 1.0;
            continue;
        }
        const auto x = spec.covariates(arm, day, prev);
        double eta = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) eta += x[k] * theta[n_alpha + static_cast<int>(k)];
        double upper = 1.0;
        for (int y = 1; y <= K; ++y) {
            const double lower = y < K ? 1.0 / (1.0 + std::exp(-(theta[y - 1] + eta))) : 0.0;
            m(prev - 1, y - 1) = upper - lower;
            upper = lower;
        }
    }
    return m;
}

MatrixXd transition_matrix(const FittedTransitionModel& model, Arm arm, int day) {
    return transition_matrix(model.spec, model.theta, arm, day);
}

SopMatrix sop_forward(std::span<const MatrixXd> per_day, int baseline_state, Arm arm) {
    if (per_day.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one transition matrix");
    const auto K = per_day.front().rows();
    if (baseline_state < 1 || baseline_state > K) throw Error(ErrorCode::InvalidArgument, "baseline state outside 1..K");
    SopMatrix sop;
    sop.arm = arm;
    sop.baseline_state = baseline_state;
    sop.probabilities = MatrixXd::Zero(static_cast<Eigen::Index>(per_day.size()) + 1, K);
    sop.probabilities(0, baseline_state - 1) = 1.0;
    for (std::size_t t = 1; t <= per_day.size(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        sop.probabilities.row(ti) = sop.probabilities.row(ti - 1) * per_day[t - 1];
    }
    return sop;
}

SopMatrix sop_forward(const FittedTransitionModel& model, Arm arm, int baseline_state, int horizon_days) {
    std::vector<MatrixXd> per_day;
    per_day.reserve(static_cast<std::size_t>(horizon_days));
    for (int day = 1; day <= horizon_days; ++day) per_day.push_back(transition_matrix(model, arm, day));
    return sop_forward(per_day, baseline_state, arm);
}

TimeInStates mean_time_unwell(const SopMatrix& sop, const std::vector<int>& unwell_states) {
    std::vector<int> s = unwell_states;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.empty()) throw Error(ErrorCode::NotADownset, "unwell state set is empty");
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k] != static_cast<int>(k) + 1 || s[k] > sop.K())
            throw Error(ErrorCode::NotADownset, "unwell states must be {1..m} for some m <= K");

    const auto days = mean_days_per_state(sop);
    TimeInStates out;
    out.states = s;
    for (int y : s) {
        out.per_state.push_back(days[static_cast<std::size_t>(y - 1)]);
        out.total += days[static_cast<std::size_t>(y - 1)];
    }
    return out;
}

std::vector<double> mean_days_per_state(const SopMatrix& sop) {
    std::vector<double> out(static_cast<std::size_t>(sop.K()), 0.0);
    for (int t = 1; t <= sop.horizon(); ++t)
        for (int y = 0; y < sop.K(); ++y) out[static_cast<std::size_t>(y)] += sop.probabilities(t, y);
    return out;
}

double days_benefit(const SopMatrix& e, const SopMatrix& c) {
    if (e.horizon() != c.horizon() || e.K() != c.K())
        throw Error(ErrorCode::HorizonMismatch, "occupancy matrices must share horizon and state count");
    double total = 0.0;
    for (int t = 1; t <= e.horizon(); ++t) {
        // P(E > C) - P(E < C) = sum_a pE_a * (P(C < a) - P(C > a))
        double c_below = 0.0;
        const double c_total = c.probabilities.row(t).sum();
        for (int a = 0; a < e.K(); ++a) {
            const double c_above = c_total - c_below - c.probabilities(t, a);
            total += e.probabilities(t, a) * (c_below - c_above);
            c_below += c.probabilities(t, a);
        }
    }
    return total;
}

std::vector<int> parse_unwell_states(std::string_view text) {
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
        if (text.substr(0, colon) != "unwell")
            throw Error(ErrorCode::ConfigError, "summary must be of the form unwell:1,2,3");
        text.remove_prefix(colon + 1);
    }
    std::vector<int> out;
    std::stringstream ss{std::string(text)};
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "bad state code '" + part + "' in summary");
        }
    }
    return out;
}

MostSummary summarize_most(const FittedTransitionModel& model, const std::vector<int>& unwell_states,
                           int baseline_state, int horizon_days) {
    MostSummary s;
    s.sop_e = sop_forward(model, Arm::E, baseline_state, horizon_days);
    s.sop_c = sop_forward(model, Arm::C, baseline_state, horizon_days);
    s.unwell_e = mean_time_unwell(s.sop_e, unwell_states);
    s.unwell_c = mean_time_unwell(s.sop_c, unwell_states);
    s.unwell_difference = s.unwell_e.total - s.unwell_c.total;
    s.days_benefit = days_benefit(s.sop_e, s.sop_c);
    return s;
}

std::vector<double> summary_vector(const MostSummary& s) {
    std::vector<double> v{s.unwell_e.total, s.unwell_c.total, s.unwell_difference, s.days_benefit};
    v.insert(v.end(), s.unwell_e.per_state.begin(), s.unwell_e.per_state.end());
    v.insert(v.end(), s.unwell_c.per_state.begin(), s.unwell_c.per_state.end());
    return v;
}

MostBootstrap bootstrap_summary(const TrialDataset& data, const TransitionModelSpec& spec,
                                const std::vector<int>& unwell_states, int replicates, std::uint64_t seed,
                                int baseline_state, double alpha) {
    const int horizon = data.horizon_days;
    FitOptions options;
    options.exec = Execution::Serial;  // replicates are the parallel dimension
    Statistic statistic = [&](const TrialDataset& d) {
        const auto records = build_transition_records(d);
        const auto fit = fit_mle(records, spec, options);
        if (!fit.converged())
            throw Error(fit.status == FitStatus::SeparationSuspected ? ErrorCode::SeparationSuspected
                                                                     : ErrorCode::NonConvergence,
                        fit.message);
        return summary_vector(summarize_most(fit, unwell_states, baseline_state, horizon));
    };

    MostBootstrap out;
    out.raw = percentile_bootstrap(data, statistic, replicates, seed, alpha);
    out.unwell_e = out.raw.ci[0];
    out.unwell_c = out.raw.ci[1];
    out.difference = out.raw.ci[2];
    out.days_benefit = out.raw.ci[3];
    const std::size_t m = (out.raw.ci.size() - 4) / 2;
    for (std::size_t k = 0; k < m; ++k) {
        out.per_state_e.push_back(out.raw.ci[4 + k]);
        out.per_state_c.push_back(out.raw.ci[4 + m + k]);
    }
    return out;
}

}  // namespace hiermc
