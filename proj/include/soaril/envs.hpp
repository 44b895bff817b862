#pragma once

#include "soaril/mdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace soaril {

/// Two-state exploration trap. State 0 is the low (costly) state, state 1 the
/// high state. Action 0 is the expert action.
struct HardExplorationSpec {
    std::int64_t num_actions = 20;
    double p_base = 0.1;   // low -> high under a non-expert action
    double p_gap = 0.1;    // extra low -> high probability of the expert action
    double p_fall = 0.1;   // high -> low under any action
    double cost_low = 1.0;
    double cost_high = 0.0;
    double discount = 0.95;

    void validate() const;
};

/// Starts in the low state. Every action is identical in the high state; in
/// the low state only action 0 differs, by p_gap.
TabularMdpd hard_exploration_mdp(const HardExplorationSpec& spec);

/// Garnet-style random MDP: each (s, a) gets `branching` distinct successors
/// chosen uniformly with Dirichlet(1, ..., 1) weights, costs U[0, 1] and a
/// uniform initial distribution.
TabularMdpd random_mdp(std::int64_t num_states, std::int64_t num_actions, std::int64_t branching, double discount,
                       Rng& rng);

/// Chain 0 - 1 - ... - (length-1), actions 0 = forward, 1 = backward. With
/// probability slip_prob the move is reversed (clamped at both ends). Cost is
/// 0 at the last state and 1 elsewhere; episodes start at state 0.
TabularMdpd chain_mdp(std::int64_t length, double slip_prob, double discount = 0.9);

}  // namespace soaril
