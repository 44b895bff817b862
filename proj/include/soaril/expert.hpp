#pragma once

#include "soaril/mdp.hpp"
#include "soaril/sampling.hpp"

#include <cstdint>
#include <vector>

namespace soaril {

/// Cost-minimizing expert. With temperature 0 the result is the deterministic
/// greedy policy of the optimal Q (value iteration to a 1e-10 sup-norm
/// fixpoint, lowest action index on ties); with temperature tau > 0 it is the
/// softmin policy of entropy-regularized value iteration.
template <class Scalar>
Policy<Scalar> compute_expert_policy(const TabularMdp<Scalar>& mdp, Scalar temperature = Scalar(0)) {
    if (temperature < Scalar(0)) throw UsageError("compute_expert_policy: temperature must be >= 0");
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    const Scalar g = mdp.discount;

    Vector<Scalar> v = Vector<Scalar>::Zero(S);
    Table<Scalar> q = mdp.cost;
    auto backup = [&](const Table<Scalar>& qt) -> Vector<Scalar> {
        if (temperature == Scalar(0)) return qt.rowwise().minCoeff();
        // v(s) = -tau log sum_a exp(-q(s,a)/tau), shifted by the row minimum.
        const Vector<Scalar> m = qt.rowwise().minCoeff();
        Vector<Scalar> out(S);
        for (Eigen::Index s = 0; s < S; ++s) {
            const Scalar z = ((-(qt.row(s).array() - m(s)) / temperature).exp()).sum();
            out(s) = m(s) - temperature * std::log(z);
        }
        return out;
    };

    // The Bellman operator is a gamma-contraction; stop when the update is
    // below 1e-10 in sup norm (for gamma = 0 one sweep is exact).
    for (int iter = 0; iter < 1'000'000; ++iter) {
        q = mdp.cost + g * expected_next(mdp.transitions, v, A);
        const Vector<Scalar> next = backup(q);
        const Scalar diff = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (diff <= Scalar(1e-10)) break;
    }
    q = mdp.cost + g * expected_next(mdp.transitions, v, A);

    Policy<Scalar> pi{Table<Scalar>::Zero(S, A)};
    if (temperature == Scalar(0)) {
        // Converged Q carries ~1e-9 of noise; treat closer values as ties.
        const Scalar tie = Scalar(1e-9);
        for (Eigen::Index s = 0; s < S; ++s) {
            const Scalar best = q.row(s).minCoeff();
            Eigen::Index pick = 0;
            while (q(s, pick) > best + tie) ++pick;
            pi.probs(s, pick) = Scalar(1);
        }
    } else {
        for (Eigen::Index s = 0; s < S; ++s) {
            const Scalar m = q.row(s).minCoeff();
            pi.probs.row(s) = (-(q.row(s).array() - m) / temperature).exp().matrix();
            pi.probs.row(s) /= pi.probs.row(s).sum();
        }
    }
    return pi;
}

/// Occupancy samples from an expert: state indices (state_only) or flat
/// state-action indices s * A + a (state_action).
struct ExpertDataset {
    ImitationMode mode = ImitationMode::state_only;
    std::int64_t num_states = 0;
    std::int64_t num_actions = 0;
    std::vector<std::int64_t> states;
    std::vector<std::int64_t> actions;  // empty in state_only mode

    std::size_t size() const { return states.size(); }
    /// Length of the index space the empirical occupancy lives on.
    std::int64_t support_size() const {
        return mode == ImitationMode::state_only ? num_states : num_states * num_actions;
    }
};

/// Checks range and mode consistency; throws UsageError on the first problem.
void validate_dataset(const ExpertDataset& data);

/// n independent geometric-horizon rollouts of `expert`; each contributes its
/// final state (state_only) or final state-action pair (state_action).
template <class Scalar>
ExpertDataset collect_expert_dataset(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& expert,
                                     std::int64_t n, ImitationMode mode, Rng& rng) {
    if (n < 1) throw UsageError("collect_expert_dataset: n must be positive");
    ExpertDataset data;
    data.mode = mode;
    data.num_states = mdp.num_states();
    data.num_actions = mdp.num_actions();
    data.states.reserve(static_cast<std::size_t>(n));
    if (mode == ImitationMode::state_action) data.actions.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const Trajectory t = sample_trajectory(mdp, expert, rng);
        data.states.push_back(t.final_state);
        if (mode == ImitationMode::state_action) data.actions.push_back(t.final_action);
    }
    return data;
}

/// Exact sample-frequency vector of the dataset, over S (state_only) or over
/// flat state-action indices (state_action).
Vectord empirical_expert_occupancy(const ExpertDataset& data);

}  // namespace soaril
