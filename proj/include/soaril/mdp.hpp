#pragma once

#include "soaril/common.hpp"

#include <Eigen/LU>

#include <sstream>
#include <string>
#include <vector>

namespace soaril {

/// Discounted, cost-minimizing tabular MDP (S, A, P, c, nu0, gamma).
///
/// `transitions` stores P(s' | s, a) in row s * A + a, so the whole kernel is
/// an (S*A) x S row-stochastic matrix and P V is a single matrix-vector product.
template <class Scalar>
struct TabularMdp {
    Table<Scalar> transitions;
    Table<Scalar> cost;
    Vector<Scalar> init;
    Scalar discount = Scalar(0);

    Eigen::Index num_states() const { return cost.rows(); }
    Eigen::Index num_actions() const { return cost.cols(); }
    Eigen::Index pair_index(Eigen::Index s, Eigen::Index a) const { return s * num_actions() + a; }
    auto successors(Eigen::Index s, Eigen::Index a) const { return transitions.row(pair_index(s, a)); }

    /// Largest value any cost in [0, 1] can produce, 1 / (1 - gamma).
    Scalar value_bound() const { return Scalar(1) / (Scalar(1) - discount); }
};

using TabularMdpd = TabularMdp<double>;

/// Row-stochastic state -> action-distribution table (S x A).
template <class Scalar>
struct Policy {
    Table<Scalar> probs;

    static Policy uniform(Eigen::Index num_states, Eigen::Index num_actions) {
        return Policy{Table<Scalar>::Constant(num_states, num_actions,
                                              Scalar(1) / static_cast<Scalar>(num_actions))};
    }

    static Policy deterministic(const std::vector<Eigen::Index>& actions, Eigen::Index num_actions) {
        Policy p{Table<Scalar>::Zero(static_cast<Eigen::Index>(actions.size()), num_actions)};
        for (std::size_t s = 0; s < actions.size(); ++s) p.probs(static_cast<Eigen::Index>(s), actions[s]) = Scalar(1);
        return p;
    }

    Eigen::Index num_states() const { return probs.rows(); }
    Eigen::Index num_actions() const { return probs.cols(); }
};

using Policyd = Policy<double>;

/// State values and state-action values of one policy under one cost.
template <class Scalar>
struct ValueTable {
    Vector<Scalar> v;
    Table<Scalar> q;
};

/// Discounted state-action visitation distribution d^pi (S x A).
template <class Scalar>
struct OccupancyMeasure {
    Table<Scalar> d;

    Vector<Scalar> state_marginal() const { return d.rowwise().sum(); }
};

struct Violation {
    std::string field;
    std::vector<Eigen::Index> index;
    std::string message;
};

inline std::string describe(const Violation& v) {
    std::ostringstream os;
    os << v.field;
    if (!v.index.empty()) {
        os << '[';
        for (std::size_t i = 0; i < v.index.size(); ++i) os << (i ? "," : "") << v.index[i];
        os << ']';
    }
    os << ": " << v.message;
    return os.str();
}

/// Checks every structural invariant of a TabularMdp. Returns one entry per
/// offending field/index; an empty result means the MDP is well formed.
template <class Scalar>
std::vector<Violation> validate_mdp(const TabularMdp<Scalar>& mdp, double tol = 1e-12) {
    std::vector<Violation> out;
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    if (S < 1 || A < 1) {
        out.push_back({"true_cost", {}, "needs at least one state and one action"});
        return out;
    }
    if (mdp.transitions.rows() != S * A || mdp.transitions.cols() != S) {
        out.push_back({"transitions", {}, "shape must be (S*A) x S"});
        return out;
    }
    if (mdp.init.size() != S) {
        out.push_back({"init_dist", {}, "length must equal S"});
        return out;
    }
    for (Eigen::Index s = 0; s < S; ++s) {
        for (Eigen::Index a = 0; a < A; ++a) {
            const auto row = mdp.successors(s, a);
            if (!row.allFinite() || (row.array() < Scalar(0)).any()) {
                out.push_back({"transitions", {s, a}, "entries must be finite and nonnegative"});
                continue;
            }
            const double sum = static_cast<double>(row.sum());
            if (std::abs(sum - 1.0) > tol) {
                std::ostringstream os;
                os << "row sums to " << sum;
                out.push_back({"transitions", {s, a}, os.str()});
            }
            const double c = static_cast<double>(mdp.cost(s, a));
            if (!(c >= 0.0 && c <= 1.0)) {
                std::ostringstream os;
                os << "cost " << c << " outside [0,1]";
                out.push_back({"true_cost", {s, a}, os.str()});
            }
        }
    }
    if (!mdp.init.allFinite() || (mdp.init.array() < Scalar(0)).any()) {
        out.push_back({"init_dist", {}, "entries must be finite and nonnegative"});
    } else if (std::abs(static_cast<double>(mdp.init.sum()) - 1.0) > tol) {
        out.push_back({"init_dist", {}, "does not sum to 1"});
    }
    const double g = static_cast<double>(mdp.discount);
    if (!(g >= 0.0 && g < 1.0)) out.push_back({"discount", {}, "must lie in [0, 1)"});
    return out;
}

template <class Scalar>
std::vector<Violation> validate_policy(const Policy<Scalar>& pi, Eigen::Index S, Eigen::Index A,
                                       double tol = 1e-12) {
    std::vector<Violation> out;
    if (pi.probs.rows() != S || pi.probs.cols() != A) {
        out.push_back({"policy", {}, "shape must be S x A"});
        return out;
    }
    for (Eigen::Index s = 0; s < S; ++s) {
        const auto row = pi.probs.row(s);
        if (!row.allFinite() || (row.array() < Scalar(0)).any() ||
            std::abs(static_cast<double>(row.sum()) - 1.0) > tol) {
            out.push_back({"policy", {s}, "row is not a probability distribution"});
        }
    }
    return out;
}

/// Broadcasts a state-indexed cost over actions.
template <class Scalar>
Table<Scalar> broadcast_state_cost(const Vector<Scalar>& c, Eigen::Index num_actions) {
    return c.replicate(1, num_actions);
}

/// Policy-averaged kernel P_pi (S x S).
template <class Scalar>
Table<Scalar> policy_kernel(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& pi) {
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    Table<Scalar> p = Table<Scalar>::Zero(S, S);
    for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index a = 0; a < A; ++a) p.row(s) += pi.probs(s, a) * mdp.successors(s, a);
    return p;
}

/// (P V)(s, a) as an S x A table.
template <class Scalar>
Table<Scalar> expected_next(const Table<Scalar>& transitions, const Vector<Scalar>& v,
                            Eigen::Index num_actions) {
    const Vector<Scalar> flat = transitions * v;
    return Eigen::Map<const Table<Scalar>>(flat.data(), flat.size() / num_actions, num_actions);
}

/// Exact policy evaluation: solves (I - gamma P_pi) V = c_pi by dense LU and
/// forms Q = c + gamma P V.
template <class Scalar>
ValueTable<Scalar> exact_value(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& pi,
                               const Table<Scalar>& cost) {
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    if (cost.rows() != S || cost.cols() != A) throw UsageError("exact_value: cost must be S x A");
    if (pi.probs.rows() != S || pi.probs.cols() != A) throw UsageError("exact_value: policy must be S x A");

    const Table<Scalar> p_pi = policy_kernel(mdp, pi);
    const Vector<Scalar> c_pi = pi.probs.cwiseProduct(cost).rowwise().sum();
    const Table<Scalar> system = Table<Scalar>::Identity(S, S) - mdp.discount * p_pi;
    Vector<Scalar> v = Eigen::PartialPivLU<Table<Scalar>>(system).solve(c_pi);
    if (!v.allFinite()) throw InternalError("exact_value: singular Bellman system");

    ValueTable<Scalar> out;
    out.q = cost + mdp.discount * expected_next(mdp.transitions, v, A);
    out.v = std::move(v);
    return out;
}

template <class Scalar>
ValueTable<Scalar> exact_value(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& pi,
                               const Vector<Scalar>& state_cost) {
    return exact_value(mdp, pi, broadcast_state_cost(state_cost, mdp.num_actions()));
}

/// <nu0, V^pi_c>, the expected discounted cost from the initial distribution.
template <class Scalar>
Scalar expected_return(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& pi, const Table<Scalar>& cost) {
    return mdp.init.dot(exact_value(mdp, pi, cost).v);
}

/// Exact occupancy: the state marginal solves (I - gamma P_pi^T) d = (1-gamma) nu0
/// and d(s, a) = d(s) pi(a | s).
template <class Scalar>
OccupancyMeasure<Scalar> exact_occupancy(const TabularMdp<Scalar>& mdp, const Policy<Scalar>& pi) {
    const Eigen::Index S = mdp.num_states();
    if (pi.probs.rows() != S || pi.probs.cols() != mdp.num_actions())
        throw UsageError("exact_occupancy: policy must be S x A");
    const Table<Scalar> system =
        Table<Scalar>::Identity(S, S) - mdp.discount * policy_kernel(mdp, pi).transpose();
    const Vector<Scalar> rhs = (Scalar(1) - mdp.discount) * mdp.init;
    const Vector<Scalar> ds = Eigen::PartialPivLU<Table<Scalar>>(system).solve(rhs);
    if (!ds.allFinite()) throw InternalError("exact_occupancy: singular flow system");
    return OccupancyMeasure<Scalar>{(pi.probs.array().colwise() * ds.array()).matrix()};
}

/// Largest absolute violation of the flow constraint
/// sum_a d(s,a) = (1-gamma) nu0(s) + gamma sum_{s',a'} P(s | s',a') d(s',a').
template <class Scalar>
Scalar flow_residual(const TabularMdp<Scalar>& mdp, const OccupancyMeasure<Scalar>& occ) {
    const Eigen::Map<const Vector<Scalar>> flat(occ.d.data(), occ.d.size());
    const Vector<Scalar> inflow = (Scalar(1) - mdp.discount) * mdp.init +
                                  mdp.discount * (mdp.transitions.transpose() * flat);
    return (occ.state_marginal() - inflow).cwiseAbs().maxCoeff();
}

}  // namespace soaril
