#include "soaril/soar.hpp"

#include <cmath>
#include <string>

namespace soaril {

void SoarConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw UsageError("soar." + field + ": " + why);
    };
    if (iterations < 1) fail("K", "must be >= 1");
    if (num_batches < 1) fail("L", "must be >= 1");
    if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta", "must be > 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha", "must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta", "must lie in (0, 1)");
    if (!(std_scale >= 0.0) || !std::isfinite(std_scale)) fail("std_scale", "must be >= 0");
    if (!(std_clip >= 0.0)) fail("std_clip", "must be >= 0");
}

double mean_policy_entropy(const Policyd& pi) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < pi.probs.rows(); ++s) {
        for (Eigen::Index a = 0; a < pi.probs.cols(); ++a) {
            const double p = pi.probs(s, a);
            if (p > 0.0) total -= p * std::log(p);
        }
    }
    return total / static_cast<double>(pi.probs.rows());
}

RunLog run_soar(const TabularMdpd& mdp, const ExpertDataset& expert, const SoarConfig& cfg, Rng& rng) {
    cfg.validate();
    if (const auto v = validate_mdp(mdp); !v.empty()) throw UsageError("run_soar: invalid MDP: " + describe(v.front()));
    validate_dataset(expert);
    if (expert.mode != cfg.mode) throw UsageError("run_soar: expert dataset mode does not match soar.mode");
    if (expert.num_states != mdp.num_states() || expert.num_actions != mdp.num_actions())
        throw UsageError("run_soar: expert dataset dimensions do not match the MDP");

    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    const double gamma = mdp.discount;
    const double v_max = mdp.value_bound();
    const Vectord expert_occupancy = empirical_expert_occupancy(expert);

    EnsembleCounts counts(S, A, cfg.num_batches);
    CostVector<double> cost = CostVector<double>::zero(cfg.mode, S, A);
    // Cumulative log-weights; pi^k = softmax of these rows, uniform at k = 1.
    Tabled logits = Tabled::Zero(S, A);
    Policyd policy = softmax_rows<double>(logits);
    Vectord value = Vectord::Zero(S);

    RunLog log;
    log.config = cfg;
    log.records.reserve(static_cast<std::size_t>(cfg.iterations));
    double return_sum = 0.0;

    for (std::int64_t k = 1; k <= cfg.iterations; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.policy = policy;
        rec.value = value;
        rec.learner_return = expected_return(mdp, policy, mdp.cost);
        rec.policy_entropy = mean_policy_entropy(policy);
        return_sum += rec.learner_return;

        rec.trajectory = sample_trajectory(mdp, policy, rng);
        counts.record(rec.trajectory);

        cost = cost_update(cost, expert_occupancy, learner_indicator<double>(rec.trajectory, cfg.mode, S, A), cfg.alpha);
        rec.cost = cost;
        const Tabled cost_table = cost.as_table(S, A);

        const std::vector<Tabled> backups = ensemble_backups(counts, value);
        const Tabled agg_min = aggregate_min(backups);
        const Tabled agg_mean_std = aggregate_mean_std(backups);
        rec.dominance_violations = ((agg_mean_std - agg_min).array() > kDominanceTolerance).count();

        Tabled q;
        if (cfg.aggregation == Aggregation::min) {
            q = cost_table + gamma * agg_min;
        } else {
            q = optimistic_q_mean_std(cost_table, backups, gamma, cfg.std_scale, cfg.std_clip);
        }

        rec.td_error = cost_table + gamma * expected_next(mdp.transitions, value, A) - q;
        rec.max_abs_q = q.cwiseAbs().maxCoeff();

        logits -= cfg.eta * q;
        policy = softmax_rows<double>(logits);
        value = policy.probs.cwiseProduct(q).rowwise().sum().cwiseMax(0.0).cwiseMin(v_max);

        rec.q = std::move(q);
        log.records.push_back(std::move(rec));
    }

    log.final_policy = policy;
    log.mixture_return = return_sum / static_cast<double>(cfg.iterations);
    return log;
}

MixtureSample mixture_rollout(const RunLog& log, const TabularMdpd& mdp, Rng& rng) {
    if (log.records.empty()) throw UsageError("mixture_rollout: run log is empty");
    const auto idx = rng.index(static_cast<std::int64_t>(log.records.size()));
    const IterationRecord& rec = log.records[static_cast<std::size_t>(idx)];
    return MixtureSample{rec.k, sample_trajectory(mdp, rec.policy, rng)};
}

}  // namespace soaril
