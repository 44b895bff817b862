#pragma once

#include "soaril/mdp.hpp"
#include "soaril/sampling.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace soaril {

/// Learned cost, a point of the l-infinity ball of radius 1. Stored flat:
/// length S in state_only mode, length S*A (index s * A + a) otherwise.
template <class Scalar>
struct CostVector {
    ImitationMode mode = ImitationMode::state_only;
    Vector<Scalar> values;

    static CostVector zero(ImitationMode mode, Eigen::Index S, Eigen::Index A) {
        return {mode, Vector<Scalar>::Zero(mode == ImitationMode::state_only ? S : S * A)};
    }

    /// S x A view of the cost, broadcasting state costs over actions.
    Table<Scalar> as_table(Eigen::Index S, Eigen::Index A) const {
        if (mode == ImitationMode::state_only) return broadcast_state_cost(values, A);
        return Eigen::Map<const Table<Scalar>>(values.data(), S, A);
    }
};

/// Indicator of the trajectory's final state (state_only) or final pair.
template <class Scalar>
Vector<Scalar> learner_indicator(const Trajectory& traj, ImitationMode mode, Eigen::Index S, Eigen::Index A) {
    if (mode == ImitationMode::state_only) {
        Vector<Scalar> e = Vector<Scalar>::Zero(S);
        e(traj.final_state) = Scalar(1);
        return e;
    }
    Vector<Scalar> e = Vector<Scalar>::Zero(S * A);
    e(traj.final_state * A + traj.final_action) = Scalar(1);
    return e;
}

/// Projected online gradient step c <- clamp(c - alpha (d_E - d_pi), -1, 1).
/// Projection onto the l-infinity ball is componentwise clamping.
template <class Scalar>
CostVector<Scalar> cost_update(const CostVector<Scalar>& c, const Vector<Scalar>& expert_occupancy,
                               const Vector<Scalar>& learner_occupancy, Scalar alpha) {
    if (expert_occupancy.size() != c.values.size() || learner_occupancy.size() != c.values.size())
        throw UsageError("cost_update: occupancy estimates do not match the cost shape");
    CostVector<Scalar> out{c.mode, c.values - alpha * (expert_occupancy - learner_occupancy)};
    out.values = out.values.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
    return out;
}

/// Row-wise softmax of log-weights. Entries are floored at the smallest
/// normal number so rows stay strictly positive after extreme updates.
template <class Scalar>
Policy<Scalar> softmax_rows(const Table<Scalar>& logits) {
    Policy<Scalar> pi{Table<Scalar>(logits.rows(), logits.cols())};
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        const Scalar m = logits.row(s).maxCoeff();
        auto row = pi.probs.row(s);
        row = (logits.row(s).array() - m).exp().matrix();
        row /= row.sum();
        row = row.cwiseMax(std::numeric_limits<Scalar>::min());
    }
    return pi;
}

/// Multiplicative weights: pi'(a|s) proportional to pi(a|s) exp(-eta Q(s,a)),
/// evaluated in log space.
template <class Scalar>
Policy<Scalar> policy_update(const Policy<Scalar>& pi, const Table<Scalar>& q, Scalar eta) {
    if (q.rows() != pi.probs.rows() || q.cols() != pi.probs.cols())
        throw UsageError("policy_update: Q must match the policy shape");
    return softmax_rows<Scalar>(pi.probs.array().log().matrix() - eta * q);
}

struct Hyperparams {
    std::int64_t num_batches;
    double eta;
    double alpha;
};

/// L = ceil(36 ln(S A K / delta)), eta = sqrt(ln A (1-gamma)^3 / K),
/// alpha = 2 / sqrt(K).
inline Hyperparams default_hyperparams(std::int64_t K, std::int64_t S, std::int64_t A, double gamma,
                                       double delta) {
    if (K < 1 || S < 1 || A < 1) throw UsageError("default_hyperparams: K, S, A must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("default_hyperparams: delta must lie in (0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("default_hyperparams: gamma must lie in [0, 1)");
    const double kd = static_cast<double>(K);
    const double l = std::ceil(36.0 * std::log(static_cast<double>(S) * static_cast<double>(A) * kd / delta));
    return Hyperparams{
        std::max<std::int64_t>(1, static_cast<std::int64_t>(l)),
        std::sqrt(std::log(static_cast<double>(A)) * std::pow(1.0 - gamma, 3) / kd),
        2.0 / std::sqrt(kd),
    };
}

}  // namespace soaril
