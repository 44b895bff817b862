#include "soaril/verify.hpp"

#include "soaril/analysis.hpp"
#include "soaril/binarize.hpp"
#include "soaril/envs.hpp"
#include "soaril/expert.hpp"
#include "soaril/soar.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace soaril {

namespace {

std::string fmt(double x) {
    std::ostringstream ss;
    ss << std::setprecision(3) << std::scientific << x;
    return ss.str();
}

Policyd random_policy(Eigen::Index S, Eigen::Index A, Rng& rng) {
    Tabled logits(S, A);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 3.0 * rng.uniform();
    return softmax_rows<double>(logits);
}

Tabled random_table(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
    Tabled t(rows, cols);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = lo + (hi - lo) * rng.uniform();
    return t;
}

/// Random MDP with 2..6 states, 2..4 actions and a discount in [0.5, 0.95].
TabularMdpd random_instance(Rng& rng, std::int64_t branching = 0) {
    const std::int64_t S = 2 + rng.index(5);
    const std::int64_t A = 2 + rng.index(3);
    const double gamma = 0.5 + 0.45 * rng.uniform();
    return random_mdp(S, A, branching > 0 ? std::min(branching, S) : S, gamma, rng);
}

CheckResult check(std::string suite, std::string name, bool ok, std::string detail) {
    return CheckResult{std::move(suite), std::move(name), ok, std::move(detail)};
}

void pdl_suite(std::vector<CheckResult>& out) {
    Rng rng(derive_seed(101, 0));
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const TabularMdpd mdp = random_instance(rng);
        const auto S = mdp.num_states(), A = mdp.num_actions();
        const Policyd pi = random_policy(S, A, rng), pi_prime = random_policy(S, A, rng);
        const Tabled q_hat = random_table(S, A, -5.0, 5.0, rng);
        worst = std::max(worst, extended_pdl_check(mdp, pi, pi_prime, q_hat, mdp.cost).gap);
    }
    out.push_back(check("pdl", "random_instances", worst < 1e-10, "100 instances, max gap " + fmt(worst)));

    double worst_exact = 0.0;
    for (int i = 0; i < 20; ++i) {
        const TabularMdpd mdp = random_instance(rng);
        const Policyd pi = random_policy(mdp.num_states(), mdp.num_actions(), rng);
        const Policyd pi_prime = random_policy(mdp.num_states(), mdp.num_actions(), rng);
        const Tabled q = exact_value(mdp, pi, mdp.cost).q;
        const PdlResult r = extended_pdl_check(mdp, pi, pi_prime, q, mdp.cost);
        worst_exact = std::max(worst_exact, r.gap);
    }
    out.push_back(check("pdl", "exact_q_reduces_to_standard", worst_exact < 1e-10,
                        "20 instances, max gap " + fmt(worst_exact)));
}

void samuelson_suite(std::vector<CheckResult>& out) {
    Rng rng(derive_seed(102, 0));
    std::int64_t failures = 0;
    std::vector<double> values;
    for (int i = 0; i < 100000; ++i) {
        const std::int64_t n = 1 + rng.index(12);
        values.assign(static_cast<std::size_t>(n), 0.0);
        const int kind = static_cast<int>(rng.index(3));
        for (double& x : values) {
            if (kind == 0)
                x = 20.0 * rng.uniform() - 10.0;
            else if (kind == 1)
                x = -std::log(1.0 - rng.uniform()) * 100.0;
            else
                x = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        if (!samuelson_check(values)) ++failures;
    }
    out.push_back(check("samuelson", "random_vectors", failures == 0,
                        "100000 vectors, " + std::to_string(failures) + " failures"));

    // Ensembles shaped like learner backups: nonnegative, some exactly zero.
    std::int64_t dominance = 0, envelope = 0;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t L = 1 + rng.index(10);
        std::vector<Tabled> backups;
        for (std::int64_t l = 0; l < L; ++l) {
            Tabled x = random_table(3, 2, 0.0, 10.0, rng);
            if (rng.uniform() < 0.2) x.setZero();
            backups.push_back(std::move(x));
        }
        const Tabled m = aggregate_min(backups);
        dominance += ((aggregate_mean_std(backups) - m).array() > kDominanceTolerance).count();
        Tabled lower = backups.front();
        for (const Tabled& x : backups) lower = lower.cwiseMin(x);
        envelope += ((m - lower).array().abs() > 0.0).count();
    }
    out.push_back(check("samuelson", "mean_std_below_min", dominance == 0,
                        "2000 ensembles, " + std::to_string(dominance) + " violating entries"));
    out.push_back(check("samuelson", "min_is_lower_envelope", envelope == 0,
                        "2000 ensembles, " + std::to_string(envelope) + " mismatching entries"));
}

void optimism_suite(std::vector<CheckResult>& out) {
    double worst = 0.0;
    std::int64_t first_step_nonzero = 0, dominance = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng env_rng(derive_seed(seed, 1));
        const TabularMdpd mdp = random_mdp(8, 3, 2, 0.9, env_rng);
        const Policyd expert = compute_expert_policy(mdp);
        Rng data_rng(derive_seed(seed, 2));
        const ExpertDataset data = collect_expert_dataset(mdp, expert, 1000, ImitationMode::state_action, data_rng);
        const Hyperparams hp = default_hyperparams(500, 8, 3, 0.9, 0.1);
        SoarConfig cfg;
        cfg.iterations = 500;
        cfg.num_batches = hp.num_batches;
        cfg.eta = hp.eta;
        cfg.alpha = hp.alpha;
        cfg.mode = ImitationMode::state_action;
        Rng rng(derive_seed(seed, 3));
        const RunLog log = run_soar(mdp, data, cfg, rng);
        const OptimismAudit audit = optimism_audit(log, mdp);
        worst = std::max(worst, audit.violation_fraction);
        first_step_nonzero += (log.records.front().td_error.array() != 0.0).count();
        dominance += dominance_violations(log);
    }
    out.push_back(check("optimism", "default_L_violation_fraction", worst <= 0.1,
                        "5 seeds, worst fraction " + fmt(worst) + " (limit 0.1)"));
    out.push_back(check("optimism", "zero_count_start", first_step_nonzero == 0,
                        std::to_string(first_step_nonzero) + " nonzero TD errors at k = 1"));
    out.push_back(check("optimism", "mean_std_dominance_in_runs", dominance == 0,
                        std::to_string(dominance) + " violating entries"));
}

void occupancy_suite(std::vector<CheckResult>& out) {
    Rng rng(derive_seed(104, 0));
    double flow = 0.0, norm = 0.0, duality = 0.0;
    for (int i = 0; i < 100; ++i) {
        const TabularMdpd mdp = random_instance(rng);
        const Policyd pi = random_policy(mdp.num_states(), mdp.num_actions(), rng);
        const OccupancyMeasure<double> occ = exact_occupancy(mdp, pi);
        flow = std::max(flow, flow_residual(mdp, occ));
        norm = std::max(norm, std::abs(occ.d.sum() - 1.0));
        const Tabled c = random_table(mdp.num_states(), mdp.num_actions(), -1.0, 1.0, rng);
        const double lhs = occ.d.cwiseProduct(c).sum();
        const double rhs = (1.0 - mdp.discount) * mdp.init.dot(exact_value(mdp, pi, c).v);
        duality = std::max(duality, std::abs(lhs - rhs));
    }
    out.push_back(check("occupancy", "flow_constraint", flow < 1e-8 && norm < 1e-10,
                        "100 instances, max residual " + fmt(flow) + ", max |sum - 1| " + fmt(norm)));
    out.push_back(check("occupancy", "duality_identity", duality < 1e-8, "max gap " + fmt(duality)));

    {
        Rng env_rng(derive_seed(104, 1));
        const TabularMdpd mdp = random_mdp(3, 2, 3, 0.8, env_rng);
        const Policyd pi = random_policy(3, 2, env_rng);
        const Tabled exact = exact_occupancy(mdp, pi).d;
        Tabled freq = Tabled::Zero(3, 2);
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const Trajectory t = sample_trajectory(mdp, pi, env_rng);
            freq(t.final_state, t.final_action) += 1.0;
        }
        const double l1 = (freq / n - exact).cwiseAbs().sum();
        out.push_back(check("occupancy", "monte_carlo_final_pair", l1 < 0.02, "200000 rollouts, L1 " + fmt(l1)));
    }

    {
        const TabularMdpd mdp = hard_exploration_mdp(HardExplorationSpec{});
        const Policyd expert = compute_expert_policy(mdp);
        Rng data_rng(derive_seed(104, 2));
        const ExpertDataset data = collect_expert_dataset(mdp, expert, 100, ImitationMode::state_only, data_rng);
        SoarConfig cfg;
        cfg.iterations = 300;
        cfg.num_batches = 3;
        cfg.eta = 4.0;
        cfg.alpha = 0.5;
        cfg.aggregation = Aggregation::mean_std;
        cfg.std_scale = 0.001;
        Rng rng(derive_seed(104, 3));
        const ShiftAudit audit = occupancy_shift_audit(run_soar(mdp, data, cfg, rng), mdp);
        out.push_back(check("occupancy", "slow_change_bound", audit.violations == 0,
                            "300 iterations, " + std::to_string(audit.violations) + " violations"));
    }

    double bin_err = 0.0;
    Rng bin_rng(derive_seed(104, 4));
    for (int i = 0; i < 20; ++i) {
        const TabularMdpd mdp = random_instance(bin_rng);
        const Policyd pi = random_policy(mdp.num_states(), mdp.num_actions(), bin_rng);
        const Vectord v = exact_value(mdp, pi, mdp.cost).v;
        const Vectord vb = binarized_root_values(binarize(mdp), pi);
        bin_err = std::max(bin_err, (v - vb).cwiseAbs().maxCoeff() / std::max(1.0, v.cwiseAbs().maxCoeff()));
    }
    out.push_back(check("occupancy", "binarization_preserves_values", bin_err < 1e-8,
                        "20 instances, max relative error " + fmt(bin_err)));
}

void regret_suite(std::vector<CheckResult>& out) {
    Rng env_rng(derive_seed(105, 0));
    const TabularMdpd mdp = random_mdp(5, 3, 2, 0.9, env_rng);
    const Policyd expert = compute_expert_policy(mdp);
    Rng data_rng(derive_seed(105, 1));
    const ExpertDataset data = collect_expert_dataset(mdp, expert, 2000, ImitationMode::state_action, data_rng);
    const Hyperparams hp = default_hyperparams(1000, 5, 3, 0.9, 0.1);
    SoarConfig cfg;
    cfg.iterations = 1000;
    cfg.num_batches = hp.num_batches;
    cfg.eta = hp.eta;
    cfg.alpha = hp.alpha;
    cfg.mode = ImitationMode::state_action;
    Rng rng(derive_seed(105, 2));
    const RunLog log = run_soar(mdp, data, cfg, rng);
    const RegretReport rep = compute_regret(log, mdp, expert);

    double identity = 0.0;
    for (std::size_t i = 0; i < rep.regret_total.size(); ++i)
        identity = std::max(identity, std::abs(rep.regret_total[i] - rep.regret_pi[i] - rep.regret_c[i]));
    out.push_back(check("regret", "decomposition_identity", identity < 1e-8, "max gap " + fmt(identity)));

    // K = 1 through value functions instead of occupancies.
    const Policyd& pi1 = log.records.front().policy;
    const Tabled c1 = log.records.front().cost.as_table(5, 3);
    const double total = expected_return(mdp, pi1, mdp.cost) - expected_return(mdp, expert, mdp.cost);
    const double pi_part = expected_return(mdp, pi1, c1) - expected_return(mdp, expert, c1);
    const double gap = std::max({std::abs(total - rep.regret_total[0]), std::abs(pi_part - rep.regret_pi[0]),
                                 std::abs(total - pi_part - rep.regret_c[0])});
    out.push_back(check("regret", "first_iterate_recomputed", gap < 1e-10, "max gap " + fmt(gap)));

    RunLog expert_log = log;
    for (IterationRecord& r : expert_log.records) r.policy = expert;
    const RegretReport zero = compute_regret(expert_log, mdp, expert);
    const double zmax = std::abs(zero.regret_total.back());
    out.push_back(check("regret", "expert_learner_zero_regret", zmax < 1e-10, "|regret| " + fmt(zmax)));

    const std::vector<double> ogd = cost_ogd_term(log, mdp, data);
    const double bound = 2.0 * std::sqrt(static_cast<double>(ogd.size()));
    out.push_back(check("regret", "cost_ogd_term", ogd.back() <= bound,
                        "term " + fmt(ogd.back()) + " vs 2 sqrt(K) " + fmt(bound)));
}

const std::vector<std::pair<std::string, std::function<void(std::vector<CheckResult>&)>>>& suites() {
    static const std::vector<std::pair<std::string, std::function<void(std::vector<CheckResult>&)>>> table = {
        {"pdl", pdl_suite},           {"samuelson", samuelson_suite}, {"optimism", optimism_suite},
        {"occupancy", occupancy_suite}, {"regret", regret_suite},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& verification_scopes() {
    static const std::vector<std::string> scopes = {"all", "pdl", "samuelson", "optimism", "occupancy", "regret"};
    return scopes;
}

std::vector<CheckResult> run_verification(std::string_view scope) {
    const auto& scopes = verification_scopes();
    if (std::find(scopes.begin(), scopes.end(), scope) == scopes.end())
        throw UsageError("verify: unknown scope '" + std::string(scope) + "'");
    std::vector<CheckResult> out;
    for (const auto& [name, run] : suites()) {
        if (scope != "all" && scope != name) continue;
        spdlog::info("verify: running {}", name);
        run(out);
    }
    return out;
}

void print_check_table(std::ostream& out, const std::vector<CheckResult>& results) {
    std::size_t w_suite = 5, w_name = 5;
    for (const auto& r : results) {
        w_suite = std::max(w_suite, r.suite.size());
        w_name = std::max(w_name, r.name.size());
    }
    out << std::left << std::setw(static_cast<int>(w_suite)) << "suite" << "  " << std::setw(static_cast<int>(w_name))
        << "check" << "  result  detail\n";
    for (const auto& r : results) {
        out << std::left << std::setw(static_cast<int>(w_suite)) << r.suite << "  "
            << std::setw(static_cast<int>(w_name)) << r.name << "  " << (r.passed ? "PASS  " : "FAIL  ") << "  "
            << r.detail << '\n';
    }
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace soaril
