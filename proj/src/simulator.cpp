#include "hiermc/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hiermc/parallel.hpp"
#include "hiermc/rng.hpp"

namespace hiermc {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatrixXd parametric_matrix(const StateScale& scale, const CumulativeLogitParams& p, Arm arm, int day) {
    const int K = scale.K;
    MatrixXd m = MatrixXd::Zero(K, K);
    const double x = arm == Arm::E ? 1.0 : 0.0;
    for (int prev = 1; prev <= K; ++prev) {
        if (scale.is_absorbing(prev)) {
            m(prev - 1, prev - 1) = 1.0;
            continue;
        }
        double lp = p.treatment * x + p.time * day + p.treatment_time * x * day;
        if (auto it = p.prev_state_effects.find(prev); it != p.prev_state_effects.end()) lp += it->second;
        double upper = 1.0;  // P(Y >= y)
        for (int y = 1; y <= K; ++y) {
            const double lower = y < K ? expit(p.intercepts[static_cast<std::size_t>(y - 1)] + lp) : 0.0;
            m(prev - 1, y - 1) = upper - lower;
            upper = lower;
        }
    }
    return m;
}

std::string name_of(Arm arm, int day) {
    return std::string("arm ") + arm_code(arm) + " day " + std::to_string(day);
}

}  // namespace

GroundTruthModel GroundTruthModel::from_parameters(const StateScale& scale, const CumulativeLogitParams& params,
                                                   int horizon_days, int baseline_state) {
    if (params.intercepts.size() != static_cast<std::size_t>(scale.K - 1))
        throw Error(ErrorCode::ConfigError, "generator needs K-1 intercepts");
    for (std::size_t i = 1; i < params.intercepts.size(); ++i)
        if (!(params.intercepts[i] < params.intercepts[i - 1]))
            throw Error(ErrorCode::InvalidTransitionRow, "generator intercepts must be strictly decreasing");
    GroundTruthModel m;
    m.scale_ = scale;
    m.baseline_state_ = baseline_state;
    for (Arm arm : {Arm::E, Arm::C})
        for (int day = 1; day <= horizon_days; ++day)
            m.matrices_[static_cast<int>(arm)].push_back(parametric_matrix(scale, params, arm, day));
    m.validate();
    return m;
}

GroundTruthModel GroundTruthModel::stationary(const StateScale& scale, const MatrixXd& matrix_e,
                                              const MatrixXd& matrix_c, int horizon_days, int baseline_state) {
    return from_matrices(scale, std::vector<MatrixXd>(static_cast<std::size_t>(horizon_days), matrix_e),
                         std::vector<MatrixXd>(static_cast<std::size_t>(horizon_days), matrix_c), baseline_state);
}

GroundTruthModel GroundTruthModel::from_matrices(const StateScale& scale, std::vector<MatrixXd> per_day_e,
                                                 std::vector<MatrixXd> per_day_c, int baseline_state) {
    if (per_day_e.size() != per_day_c.size() || per_day_e.empty())
        throw Error(ErrorCode::ConfigError, "both arms need the same non-zero number of daily matrices");
    GroundTruthModel m;
    m.scale_ = scale;
    m.baseline_state_ = baseline_state;
    m.matrices_[static_cast<int>(Arm::E)] = std::move(per_day_e);
    m.matrices_[static_cast<int>(Arm::C)] = std::move(per_day_c);
    m.validate();
    return m;
}

const MatrixXd& GroundTruthModel::transition(Arm arm, int day) const {
    return matrices_[static_cast<int>(arm)].at(static_cast<std::size_t>(day - 1));
}

void GroundTruthModel::validate() const {
    if (!scale_.in_range(baseline_state_))
        throw Error(ErrorCode::ConfigError, "baseline state outside 1..K");
    const int K = scale_.K;
    for (Arm arm : {Arm::E, Arm::C}) {
        for (int day = 1; day <= horizon_days(); ++day) {
            const MatrixXd& m = transition(arm, day);
            if (m.rows() != K || m.cols() != K)
                throw Error(ErrorCode::InvalidTransitionRow, name_of(arm, day) + ": matrix must be K x K");
            for (int r = 0; r < K; ++r) {
                if ((m.row(r).array() < 0.0).any() || !m.row(r).allFinite() ||
                    std::abs(m.row(r).sum() - 1.0) > 1e-9)
                    throw Error(ErrorCode::InvalidTransitionRow,
                                name_of(arm, day) + ": row " + std::to_string(r + 1) + " is not a probability vector");
                if (scale_.is_absorbing(r + 1) && m(r, r) != 1.0)
                    throw Error(ErrorCode::InvalidTransitionRow,
                                name_of(arm, day) + ": absorbing row " + std::to_string(r + 1) + " must stay put");
            }
        }
    }
}

namespace {

MatrixXd matrix_from_json(const json& j, int K) {
    MatrixXd m(K, K);
    if (!j.is_array() || static_cast<int>(j.size()) != K)
        throw Error(ErrorCode::ConfigError, "transition matrix must have K rows");
    for (int r = 0; r < K; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != K)
            throw Error(ErrorCode::ConfigError, "transition matrix rows must have K entries");
        for (int c = 0; c < K; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

std::vector<MatrixXd> arm_matrices(const json& j, int K, int horizon) {
    // either a single K x K matrix or a list of `horizon` matrices
    if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
        if (static_cast<int>(j.size()) != horizon)
            throw Error(ErrorCode::ConfigError, "need one transition matrix per day");
        std::vector<MatrixXd> out;
        for (const auto& m : j) out.push_back(matrix_from_json(m, K));
        return out;
    }
    return std::vector<MatrixXd>(static_cast<std::size_t>(horizon), matrix_from_json(j, K));
}

}  // namespace

GroundTruthModel SimulationConfig::model() const {
    try {
        const std::string type = generator.at("type").get<std::string>();
        if (type == "cumulative_logit") {
            CumulativeLogitParams p;
            p.intercepts = generator.at("intercepts").get<std::vector<double>>();
            p.treatment = generator.value("treatment", 0.0);
            p.time = generator.value("time", 0.0);
            p.treatment_time = generator.value("treatment_time", 0.0);
            if (generator.contains("prev_state_effects"))
                for (const auto& [code, value] : generator["prev_state_effects"].items())
                    p.prev_state_effects[std::stoi(code)] = value.get<double>();
            return GroundTruthModel::from_parameters(scale, p, horizon_days, baseline_state);
        }
        if (type == "matrices") {
            return GroundTruthModel::from_matrices(scale, arm_matrices(generator.at("E"), scale.K, horizon_days),
                                                   arm_matrices(generator.at("C"), scale.K, horizon_days),
                                                   baseline_state);
        }
        throw Error(ErrorCode::ConfigError, "unknown generator type '" + type + "'");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("generator: ") + e.what());
    }
}

SimulationConfig simulation_config_from_json(const json& j) {
    SimulationConfig c;
    try {
        if (j.contains("states")) {
            const auto& s = j["states"];
            c.scale.K = s.value("K", 4);
            if (s.contains("absorbing")) c.scale.absorbing = s["absorbing"].get<std::vector<int>>();
            if (s.contains("labels")) c.scale.labels = s["labels"].get<std::vector<std::string>>();
        }
        c.horizon_days = j.value("horizon", 28);
        c.n_per_arm = j.value("n_per_arm", 100);
        c.baseline_state = j.value("baseline_state", states::kHospital);
        c.generator = j.at("generator");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("simulation config: ") + e.what());
    }
    c.scale.validate();
    if (c.horizon_days < 1 || c.n_per_arm < 1)
        throw Error(ErrorCode::ConfigError, "simulation config: horizon and n_per_arm must be positive");
    return c;
}

SimulationConfig read_simulation_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    return simulation_config_from_json(j);
}

namespace {

int draw_state(const MatrixXd& m, int prev, double u) {
    const int K = static_cast<int>(m.cols());
    double cum = 0.0;
    int last_positive = prev;
    for (int y = 1; y <= K; ++y) {
        const double p = m(prev - 1, y - 1);
        if (p <= 0.0) continue;
        cum += p;
        last_positive = y;
        if (u < cum) return y;
    }
    return last_positive;
}

}  // namespace

TrialDataset simulate_trial(const GroundTruthModel& model, int n_per_arm, int horizon_days, std::uint64_t seed) {
    if (n_per_arm < 1) throw Error(ErrorCode::InvalidArgument, "n_per_arm must be >= 1");
    if (horizon_days < 1 || horizon_days > model.horizon_days())
        throw Error(ErrorCode::InvalidArgument, "horizon exceeds the model's transition schedule");

    TrialDataset data;
    data.scale = model.scale();
    data.horizon_days = horizon_days;
    const auto n_total = static_cast<std::size_t>(2 * n_per_arm);
    data.trajectories.resize(n_total);

    const int width = n_per_arm < 1000 ? 3 : static_cast<int>(std::to_string(n_per_arm).size());
    const auto n_signed = static_cast<long long>(n_total);
#pragma omp parallel for schedule(static) num_threads(parallel::max_threads())
    for (long long k = 0; k < n_signed; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const Arm arm = k < n_per_arm ? Arm::E : Arm::C;
        const long long within = k < n_per_arm ? k : k - n_per_arm;
        char id[32];
        std::snprintf(id, sizeof id, "%c%0*lld", arm_code(arm), width, within + 1);

        PatientTrajectory& t = data.trajectories[idx];
        t.id = id;
        t.arm = arm;
        t.states.resize(static_cast<std::size_t>(horizon_days) + 1);
        Rng rng(derive_seed(seed, streams::kSimulation, static_cast<std::uint64_t>(k)));
        int state = model.baseline_state();
        t.states[0] = state;
        for (int day = 1; day <= horizon_days; ++day) {
            const double u = rng.uniform();
            state = draw_state(model.transition(arm, day), state, u);
            t.states[static_cast<std::size_t>(day)] = state;
        }
    }
    return data;
}

}  // namespace hiermc
