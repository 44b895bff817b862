#include "soaril/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace soaril {

namespace {

Vectord flat(const Tabled& t) { return Eigen::Map<const Vectord>(t.data(), t.size()); }

}  // namespace

RegretReport compute_regret(const RunLog& log, const TabularMdpd& mdp, const Policyd& expert_policy) {
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    if (expert_policy.probs.rows() != S || expert_policy.probs.cols() != A)
        throw UsageError("compute_regret: expert policy shape does not match the MDP");
    const double scale = 1.0 / (1.0 - mdp.discount);
    const Tabled d_expert = exact_occupancy(mdp, expert_policy).d;

    RegretReport rep;
    rep.expert_return = expected_return(mdp, expert_policy, mdp.cost);
    double total = 0.0, pi_part = 0.0, c_part = 0.0;
    for (const IterationRecord& rec : log.records) {
        if (rec.policy.probs.rows() != S || rec.policy.probs.cols() != A)
            throw UsageError("compute_regret: run log does not match the MDP");
        const Tabled diff = exact_occupancy(mdp, rec.policy).d - d_expert;
        const Tabled learned = rec.cost.as_table(S, A);
        pi_part += scale * learned.cwiseProduct(diff).sum();
        c_part += scale * (mdp.cost - learned).cwiseProduct(diff).sum();
        total += scale * mdp.cost.cwiseProduct(diff).sum();
        rep.regret_total.push_back(total);
        rep.regret_pi.push_back(pi_part);
        rep.regret_c.push_back(c_part);
        rep.normalized.push_back(total / static_cast<double>(rec.k));
    }
    return rep;
}

std::vector<double> cost_ogd_term(const RunLog& log, const TabularMdpd& mdp, const ExpertDataset& expert) {
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    Vectord c_true;
    if (expert.mode == ImitationMode::state_only) {
        for (Eigen::Index s = 0; s < S; ++s)
            if ((mdp.cost.row(s).array() != mdp.cost(s, 0)).any())
                throw UsageError("cost_ogd_term: state_only mode needs action-independent true costs");
        c_true = mdp.cost.col(0);
    } else {
        c_true = flat(mdp.cost);
    }
    const Vectord d_expert = empirical_expert_occupancy(expert);
    std::vector<double> out;
    out.reserve(log.records.size());
    double acc = 0.0;
    for (const IterationRecord& rec : log.records) {
        const Vectord d_learner = learner_indicator<double>(rec.trajectory, expert.mode, S, A);
        acc += (c_true - rec.cost.values).dot(d_learner - d_expert);
        out.push_back(acc);
    }
    return out;
}

PdlResult extended_pdl_check(const TabularMdpd& mdp, const Policyd& pi, const Policyd& pi_prime,
                             const Tabled& q_hat, const Tabled& cost) {
    const Eigen::Index A = mdp.num_actions();
    const double g = mdp.discount;
    const Vectord v_hat = pi.probs.cwiseProduct(q_hat).rowwise().sum();
    const Vectord v_prime = exact_value(mdp, pi_prime, cost).v;

    PdlResult r;
    r.lhs = (1.0 - g) * mdp.init.dot(v_hat - v_prime);

    const OccupancyMeasure<double> occ = exact_occupancy(mdp, pi_prime);
    const Tabled td = q_hat - cost - g * expected_next(mdp.transitions, v_hat, A);
    const Vectord ds = occ.state_marginal();
    const Vectord policy_gap = q_hat.cwiseProduct(pi.probs - pi_prime.probs).rowwise().sum();
    r.rhs = occ.d.cwiseProduct(td).sum() + ds.dot(policy_gap);
    r.gap = std::abs(r.lhs - r.rhs);
    return r;
}

SamuelsonBounds samuelson_bounds(const std::vector<double>& values) {
    if (values.empty()) throw UsageError("samuelson_bounds: need at least one value");
    const double n = static_cast<double>(values.size());
    SamuelsonBounds b;
    b.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double x : values) ss += (x - b.mean) * (x - b.mean);
        const double sample_sd = std::sqrt(ss / (n - 1.0));
        b.half_width = std::sqrt(n - 1.0) * sample_sd;
    }
    b.lower = b.mean - b.half_width;
    b.upper = b.mean + b.half_width;
    return b;
}

bool samuelson_check(const std::vector<double>& values) {
    const SamuelsonBounds b = samuelson_bounds(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double tol = 1e-12 * (1.0 + std::max(std::abs(*lo), std::abs(*hi)));
    return b.lower <= *lo + tol && *hi <= b.upper + tol;
}

OptimismAudit optimism_audit(const RunLog& log, const TabularMdpd& mdp) {
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    OptimismAudit audit;
    audit.max_td = -std::numeric_limits<double>::infinity();
    for (const IterationRecord& rec : log.records) {
        const Tabled td = rec.cost.as_table(S, A) + mdp.discount * expected_next(mdp.transitions, rec.value, A) - rec.q;
        const std::int64_t bad = (td.array() < -kTdTolerance).count();
        audit.violations.push_back(bad);
        audit.total_violations += bad;
        audit.total_pairs += td.size();
        audit.on_policy_td_sum += exact_occupancy(mdp, rec.policy).d.cwiseProduct(td).sum();
        audit.max_td = std::max(audit.max_td, td.maxCoeff());
    }
    if (audit.total_pairs > 0)
        audit.violation_fraction = static_cast<double>(audit.total_violations) / static_cast<double>(audit.total_pairs);
    return audit;
}

ShiftAudit occupancy_shift_audit(const RunLog& log, const TabularMdpd& mdp) {
    ShiftAudit audit;
    const double eta = log.config.eta;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const Policyd& next = i + 1 < log.records.size() ? log.records[i + 1].policy : log.final_policy;
        const double dist = (exact_occupancy(mdp, log.records[i].policy).d - exact_occupancy(mdp, next).d)
                                .cwiseAbs()
                                .sum();
        const double bound = eta * log.records[i].q.cwiseAbs().maxCoeff() / (1.0 - mdp.discount);
        audit.distance.push_back(dist);
        audit.bound.push_back(bound);
        if (dist > bound + 1e-12) ++audit.violations;
    }
    return audit;
}

std::int64_t dominance_violations(const RunLog& log) {
    std::int64_t n = 0;
    for (const IterationRecord& rec : log.records) n += rec.dominance_violations;
    return n;
}

SublinearityFit sublinearity_fit(const std::vector<double>& series) {
    const std::size_t K = series.size();
    if (K < 100) throw UsageError("sublinearity_fit: need at least 100 points");
    const std::size_t first = K / 2;  // k = K/2 + 1 .. K
    SublinearityFit fit;
    const double lowest = *std::min_element(series.begin() + static_cast<std::ptrdiff_t>(first), series.end());
    double shift = 0.0;
    if (lowest <= 0.0) {
        fit.shifted = true;
        shift = 1.0 - lowest;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(K - first);
    for (std::size_t i = first; i < K; ++i) {
        const double x = std::log(static_cast<double>(i + 1));
        const double y = std::log(series[i] + shift);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

}  // namespace soaril
