#include "soaril/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace soaril {

void HardExplorationSpec::validate() const {
    auto fail = [](const std::string& why) { throw UsageError("hard_exploration: " + why); };
    if (num_actions < 1) fail("num_actions must be >= 1");
    if (!(p_base >= 0.0 && p_gap >= 0.0 && p_base + p_gap <= 1.0))
        fail("need 0 <= p_base, 0 <= p_gap and p_base + p_gap <= 1");
    if (!(p_fall >= 0.0 && p_fall <= 1.0)) fail("p_fall must lie in [0, 1]");
    if (!(cost_low >= 0.0 && cost_low <= 1.0 && cost_high >= 0.0 && cost_high <= 1.0))
        fail("costs must lie in [0, 1]");
    if (!(cost_low > cost_high)) fail("cost_low must exceed cost_high");
    if (!(discount >= 0.0 && discount < 1.0)) fail("discount must lie in [0, 1)");
}

TabularMdpd hard_exploration_mdp(const HardExplorationSpec& spec) {
    spec.validate();
    const Eigen::Index A = spec.num_actions;
    TabularMdpd mdp;
    mdp.transitions = Tabled::Zero(2 * A, 2);
    mdp.cost = Tabled(2, A);
    mdp.cost.row(0).setConstant(spec.cost_low);
    mdp.cost.row(1).setConstant(spec.cost_high);
    for (Eigen::Index a = 0; a < A; ++a) {
        const double up = spec.p_base + (a == 0 ? spec.p_gap : 0.0);
        mdp.transitions(a, 0) = 1.0 - up;
        mdp.transitions(a, 1) = up;
        mdp.transitions(A + a, 0) = spec.p_fall;
        mdp.transitions(A + a, 1) = 1.0 - spec.p_fall;
    }
    mdp.init = Vectord::Zero(2);
    mdp.init(0) = 1.0;
    mdp.discount = spec.discount;
    return mdp;
}

TabularMdpd random_mdp(std::int64_t num_states, std::int64_t num_actions, std::int64_t branching, double discount,
                       Rng& rng) {
    if (num_states < 1 || num_actions < 1) throw UsageError("random_mdp: S and A must be positive");
    if (branching < 1 || branching > num_states) throw UsageError("random_mdp: need 1 <= branching <= S");
    if (!(discount >= 0.0 && discount < 1.0)) throw UsageError("random_mdp: discount must lie in [0, 1)");
    const Eigen::Index S = num_states;
    const Eigen::Index A = num_actions;
    TabularMdpd mdp;
    mdp.transitions = Tabled::Zero(S * A, S);
    mdp.cost = Tabled(S, A);
    std::vector<std::int64_t> states(static_cast<std::size_t>(S));
    for (Eigen::Index s = 0; s < S; ++s) {
        for (Eigen::Index a = 0; a < A; ++a) {
            // Partial Fisher-Yates picks `branching` distinct successors.
            std::iota(states.begin(), states.end(), 0);
            for (std::int64_t i = 0; i < branching; ++i) {
                const std::int64_t j = i + rng.index(S - i);
                std::swap(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
            }
            // Normalized unit exponentials are Dirichlet(1, ..., 1).
            Vectord w(branching);
            for (std::int64_t i = 0; i < branching; ++i) w(i) = -std::log(1.0 - rng.uniform());
            if (w.sum() <= 0.0) w.setOnes();
            w /= w.sum();
            for (std::int64_t i = 0; i < branching; ++i)
                mdp.transitions(s * A + a, states[static_cast<std::size_t>(i)]) = w(i);
            mdp.cost(s, a) = rng.uniform();
        }
    }
    mdp.init = Vectord::Constant(S, 1.0 / static_cast<double>(S));
    mdp.discount = discount;
    return mdp;
}

TabularMdpd chain_mdp(std::int64_t length, double slip_prob, double discount) {
    if (length < 2) throw UsageError("chain_mdp: length must be >= 2");
    if (!(slip_prob >= 0.0 && slip_prob < 1.0)) throw UsageError("chain_mdp: slip_prob must lie in [0, 1)");
    if (!(discount >= 0.0 && discount < 1.0)) throw UsageError("chain_mdp: discount must lie in [0, 1)");
    const Eigen::Index S = length;
    TabularMdpd mdp;
    mdp.transitions = Tabled::Zero(S * 2, S);
    mdp.cost = Tabled::Ones(S, 2);
    mdp.cost.row(S - 1).setZero();
    for (Eigen::Index s = 0; s < S; ++s) {
        const Eigen::Index fwd = std::min(s + 1, S - 1);
        const Eigen::Index back = std::max<Eigen::Index>(s - 1, 0);
        mdp.transitions(s * 2 + 0, fwd) += 1.0 - slip_prob;
        mdp.transitions(s * 2 + 0, back) += slip_prob;
        mdp.transitions(s * 2 + 1, back) += 1.0 - slip_prob;
        mdp.transitions(s * 2 + 1, fwd) += slip_prob;
    }
    mdp.init = Vectord::Zero(S);
    mdp.init(0) = 1.0;
    mdp.discount = discount;
    return mdp;
}

}  // namespace soaril
