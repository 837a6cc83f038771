#pragma once

#include <doctest.h>

#include <cmath>

#include "hiermc/most.hpp"

namespace checks {

/// Row sums, absorbing unit rows and a non-decreasing absorbing column for
/// every transition matrix and occupancy curve of a fitted model.
inline void sop_invariants(const hiermc::FittedTransitionModel& fit, int baseline, int horizon) {
    const auto& scale = fit.spec.scale;
    for (hiermc::Arm arm : {hiermc::Arm::E, hiermc::Arm::C}) {
        for (int day = 1; day <= horizon; ++day) {
            const auto P = hiermc::transition_matrix(fit, arm, day);
            for (int r = 0; r < scale.K; ++r) {
                CHECK(std::abs(P.row(r).sum() - 1.0) <= 1e-12);
                CHECK(P.row(r).minCoeff() >= 0.0);
                if (scale.is_absorbing(r + 1))
                    for (int c = 0; c < scale.K; ++c) CHECK(P(r, c) == (c == r ? 1.0 : 0.0));
            }
        }
        const auto sop = hiermc::sop_forward(fit, arm, baseline, horizon);
        CHECK(sop.probabilities(0, baseline - 1) == 1.0);
        for (int t = 0; t <= horizon; ++t) {
            CHECK(std::abs(sop.probabilities.row(t).sum() - 1.0) <= 1e-10);
            for (int a : scale.absorbing)
                if (t > 0) CHECK(sop.probabilities(t, a - 1) >= sop.probabilities(t - 1, a - 1));
        }
    }
}

}  // namespace checks
