#pragma once

#include "soaril/expert.hpp"
#include "soaril/mdp.hpp"
#include "soaril/soar.hpp"

#include <cstdint>
#include <vector>

namespace soaril {

/// Regret(k) = (1-gamma)^-1 sum_{j<=k} <c_true, d^{pi^j} - d^{pi_E}> and its
/// split into the policy term (learned costs c^j) and the cost term
/// (c_true - c^j). All series are cumulative and indexed by k - 1.
struct RegretReport {
    std::vector<double> regret_total;
    std::vector<double> regret_pi;
    std::vector<double> regret_c;
    std::vector<double> normalized;  // Regret(k) / k
    double expert_return = 0.0;      // <nu0, V^{pi_E}> under the true cost
};

/// Uses exact occupancies of every iterate; the expert policy is oracle-side
/// information the learner never sees.
RegretReport compute_regret(const RunLog& log, const TabularMdpd& mdp, const Policyd& expert_policy);

/// Cumulative sum_k <c_true - c^k, dhat^{pi^k} - dhat^{pi_E}>, the online
/// gradient descent term of the cost regret (no 1/(1-gamma) factor). In
/// state_only mode the true cost must not depend on the action.
std::vector<double> cost_ogd_term(const RunLog& log, const TabularMdpd& mdp, const ExpertDataset& expert);

struct PdlResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

/// Performance difference with an arbitrary Q estimate:
/// lhs = (1-gamma) <nu0, Vhat^pi - V^{pi'}>, Vhat^pi(s) = <pi(.|s), Qhat(s,.)>;
/// rhs = <d^{pi'}, Qhat - c - gamma P Vhat^pi> + E_{s~d^{pi'}} <Qhat(s,.), pi(.|s) - pi'(.|s)>.
PdlResult extended_pdl_check(const TabularMdpd& mdp, const Policyd& pi, const Policyd& pi_prime,
                             const Tabled& q_hat, const Tabled& cost);

struct SamuelsonBounds {
    double mean = 0.0;
    double half_width = 0.0;  // sqrt(L-1) * sample deviation
    double lower = 0.0;
    double upper = 0.0;
};

SamuelsonBounds samuelson_bounds(const std::vector<double>& values);

/// True when every value lies within sqrt(L-1) sample deviations of the mean.
bool samuelson_check(const std::vector<double>& values);

struct OptimismAudit {
    std::vector<std::int64_t> violations;  // per k: pairs with delta^k < 0
    std::int64_t total_violations = 0;
    std::int64_t total_pairs = 0;
    double violation_fraction = 0.0;
    double on_policy_td_sum = 0.0;  // sum_k <d^{pi^k}, delta^k>
    double max_td = 0.0;
};

/// Tolerance below zero before a TD error counts as a violation.
inline constexpr double kTdTolerance = 1e-12;

/// Recomputes delta^k = c^k + gamma P V^k - Q^{k+1} with the true kernel.
OptimismAudit optimism_audit(const RunLog& log, const TabularMdpd& mdp);

struct ShiftAudit {
    std::vector<double> distance;  // ||d^{pi^k} - d^{pi^{k+1}}||_1
    std::vector<double> bound;     // eta max|Q^{k+1}| / (1-gamma)
    std::int64_t violations = 0;
};

ShiftAudit occupancy_shift_audit(const RunLog& log, const TabularMdpd& mdp);

/// Total pairs, over all iterations, where Mean-Std exceeded Min.
std::int64_t dominance_violations(const RunLog& log);

struct SublinearityFit {
    double exponent = 0.0;
    bool shifted = false;  // series had nonpositive entries and was shifted
};

/// Least-squares slope of log R(k) against log k over the second half of the
/// series (k = 1 .. K maps to index k - 1). Requires K >= 100.
SublinearityFit sublinearity_fit(const std::vector<double>& series);

}  // namespace soaril
