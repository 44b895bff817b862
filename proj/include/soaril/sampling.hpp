#pragma once

#include "soaril/mdp.hpp"

#include <cstdint>
#include <vector>

namespace soaril {

struct Transition {
    std::int64_t state;
    std::int64_t action;
    std::int64_t next_state;

    bool operator==(const Transition&) const = default;
};

/// A rollout with geometric horizon H. `steps` holds the H transitions taken
/// before stopping; (final_state, final_action) is the step-H pair, which is an
/// exact draw from the occupancy measure of the rolled-out policy.
struct Trajectory {
    std::vector<Transition> steps;
    std::int64_t final_state = 0;
    std::int64_t final_action = 0;

    std::int64_t length() const { return static_cast<std::int64_t>(steps.size()); }
    bool operator==(const Trajectory&) const = default;
};

/// Rolls out `pi` from s0 ~ nu0 for H ~ Geometric(1 - gamma) steps, support {0, 1, ...}.
template <class Scalar>
Trajectory sample_trajectory(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& pi, Rng& rng) {
    Trajectory traj;
    const std::int64_t horizon = rng.geometric(static_cast<double>(mdp.discount));
    traj.steps.reserve(static_cast<std::size_t>(horizon));
    std::int64_t s = rng.categorical(mdp.init);
    std::int64_t a = rng.categorical(pi.probs.row(s));
    for (std::int64_t t = 0; t < horizon; ++t) {
        const std::int64_t next = rng.categorical(mdp.successors(s, a));
        traj.steps.push_back({s, a, next});
        s = next;
        a = rng.categorical(pi.probs.row(s));
    }
    traj.final_state = s;
    traj.final_action = a;
    return traj;
}

}  // namespace soaril
