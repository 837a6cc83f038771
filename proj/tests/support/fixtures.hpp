#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hiermc/trial_data.hpp"

namespace fixtures {

/// Random valid four-state trajectories, each starting in hospital, drawn
/// from a simple sticky chain so that ties and deaths both occur.
inline hiermc::TrialDataset random_dataset(std::uint64_t seed, int n_e, int n_c, int horizon = 28,
                                           double death_rate = 0.01) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    hiermc::TrialDataset d;
    d.horizon_days = horizon;
    auto add = [&](hiermc::Arm arm, int n) {
        for (int i = 0; i < n; ++i) {
            hiermc::PatientTrajectory t;
            t.id = std::string(1, hiermc::arm_code(arm)) + std::to_string(i);
            t.arm = arm;
            t.states.push_back(3);
            for (int day = 1; day <= horizon; ++day) {
                int s = t.states.back();
                if (s != 1) {
                    const double x = u(gen);
                    if (x < death_rate)
                        s = 1;
                    else if (x >= 0.87)
                        s = std::min(4, s + 1);
                    else if (x >= 0.75)
                        s = std::max(2, s - 1);
                }
                t.states.push_back(s);
            }
            d.trajectories.push_back(std::move(t));
        }
    };
    add(hiermc::Arm::E, n_e);
    add(hiermc::Arm::C, n_c);
    return d;
}

inline hiermc::PatientTrajectory constant_trajectory(const std::string& id, hiermc::Arm arm, int state,
                                                     int horizon = 28) {
    hiermc::PatientTrajectory t{id, arm, std::vector<int>(static_cast<std::size_t>(horizon + 1), state)};
    t.states[0] = 3;
    return t;
}

/// Trajectory realizing the given outcomes: ventilator first, then hospital,
/// ending at home when requested. Home with zero free days is unreachable.
inline hiermc::PatientTrajectory with_outcomes(const std::string& id, hiermc::Arm arm, int death, int home, int vfd,
                                               int horizon = 28) {
    hiermc::PatientTrajectory t{id, arm, {3}};
    if (death) {
        for (int day = 1; day <= horizon; ++day) t.states.push_back(1);
        return t;
    }
    for (int day = 1; day <= horizon; ++day) t.states.push_back(day <= horizon - vfd ? 2 : 3);
    if (home) t.states.back() = 4;
    return t;
}

inline hiermc::TrialDataset from_trajectories(std::vector<hiermc::PatientTrajectory> ts, int horizon = 28) {
    hiermc::TrialDataset d;
    d.horizon_days = horizon;
    d.trajectories = std::move(ts);
    return d;
}

}  // namespace fixtures
