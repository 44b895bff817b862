#pragma once

#include "soaril/envs.hpp"
#include "soaril/mdp.hpp"
#include "soaril/updates.hpp"

#include <vector>

namespace soaril::test {

inline Policyd random_policy(Eigen::Index S, Eigen::Index A, Rng& rng, double spread = 3.0) {
    Tabled logits(S, A);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = spread * rng.uniform();
    return softmax_rows<double>(logits);
}

inline Tabled random_table(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
    Tabled t(rows, cols);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = lo + (hi - lo) * rng.uniform();
    return t;
}

/// Two states that swap deterministically under the single action.
inline TabularMdpd two_state_cycle(double gamma) {
    TabularMdpd m;
    m.transitions = Tabled(2, 2);
    m.transitions << 0, 1, 1, 0;
    m.cost = Tabled(2, 1);
    m.cost << 1, 0;
    m.init = Vectord(2);
    m.init << 1, 0;
    m.discount = gamma;
    return m;
}

inline TabularMdpd single_state(double cost, double gamma) {
    TabularMdpd m;
    m.transitions = Tabled::Ones(1, 1);
    m.cost = Tabled::Constant(1, 1, cost);
    m.init = Vectord::Ones(1);
    m.discount = gamma;
    return m;
}

/// Every deterministic policy of a small MDP.
inline std::vector<Policyd> all_deterministic(Eigen::Index S, Eigen::Index A) {
    std::vector<Policyd> out;
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(S), 0);
    while (true) {
        out.push_back(Policyd::deterministic(pick, A));
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == A) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

}  // namespace soaril::test
