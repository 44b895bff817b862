#pragma once

#include "soaril/ensemble.hpp"
#include "soaril/expert.hpp"
#include "soaril/mdp.hpp"
#include "soaril/sampling.hpp"
#include "soaril/updates.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace soaril {

struct SoarConfig {
    std::int64_t iterations = 1000;  // K
    std::int64_t num_batches = 1;    // L
    double eta = 0.1;
    double alpha = 0.1;
    double delta = 0.1;
    Aggregation aggregation = Aggregation::min;
    double std_scale = 1.0;
    double std_clip = std::numeric_limits<double>::infinity();
    ImitationMode mode = ImitationMode::state_only;
    std::uint64_t seed = 0;

    /// Throws UsageError naming the first invalid field.
    void validate() const;
};

/// Everything the learner produced at iteration k (1-based).
struct IterationRecord {
    std::int64_t k = 0;
    Policyd policy;           // pi^k, the policy rolled out at iteration k
    CostVector<double> cost;  // c^k
    Vectord value;            // V^k entering the optimistic backup
    Tabled q;                 // Q^{k+1}
    Trajectory trajectory;    // tau^k
    Tabled td_error;          // c^k + gamma P V^k - Q^{k+1}, true kernel
    double learner_return = 0.0;  // <nu0, V^{pi^k}> under the true cost
    double max_abs_q = 0.0;
    double policy_entropy = 0.0;  // mean over states, nats
    /// Pairs where the unscaled, unclipped Mean-Std aggregate exceeds the Min
    /// aggregate on this iteration's ensemble (always zero in exact arithmetic).
    std::int64_t dominance_violations = 0;
};

struct RunLog {
    SoarConfig config;
    std::vector<IterationRecord> records;
    Policyd final_policy;         // pi^{K+1}
    double mixture_return = 0.0;  // K^-1 sum_k <nu0, V^{pi^k}>
};

/// Tolerance used when counting Mean-Std > Min on identical ensembles.
inline constexpr double kDominanceTolerance = 1e-12;

/// Tabular SOAR-IL. Runs cfg.iterations rounds of: geometric rollout of
/// pi^k, count update, projected OGD cost step on the final state(-action),
/// per-batch transition estimates, optimistic aggregation, multiplicative
/// weights policy step and the clamped value update.
RunLog run_soar(const TabularMdpd& mdp, const ExpertDataset& expert, const SoarConfig& cfg, Rng& rng);

/// One episode of the mixture policy: an iterate index drawn uniformly, then a
/// geometric rollout of that iterate.
struct MixtureSample {
    std::int64_t k = 0;  // 1-based iterate index
    Trajectory trajectory;
};

MixtureSample mixture_rollout(const RunLog& log, const TabularMdpd& mdp, Rng& rng);

/// Mean over states of the action entropy of `pi`.
double mean_policy_entropy(const Policyd& pi);

}  // namespace soaril
