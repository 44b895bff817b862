#pragma once

#include "soaril/mdp.hpp"

#include <cmath>
#include <vector>

namespace soaril {

/// An MDP whose rows all have support size <= 2, equivalent to an original MDP.
///
/// Each original (s, a) fans out through a balanced binary tree of depth
/// `depth` whose leaves are the original states. Original states keep their
/// indices (root_map embeds them as the first S states); internal tree nodes
/// follow, carry zero cost and route identically under every action.
template <class Scalar>
struct BinarizedMdp {
    TabularMdp<Scalar> inner;
    std::vector<Eigen::Index> root_map;
    int depth = 1;
    Scalar discount_bin = Scalar(0);
};

/// ceil(log2 S), at least 1.
inline int binary_depth(Eigen::Index num_states) {
    int depth = 1;
    while ((Eigen::Index{1} << depth) < num_states) ++depth;
    return depth;
}

/// Binarizes `mdp`: every (s, a) becomes a balanced tree over the successors
/// in state-index order, with branch probabilities chosen by recursive mass
/// splitting so leaf-reach products equal P(s' | s, a). The discount becomes
/// gamma^(1/depth), so one full traversal discounts by gamma.
template <class Scalar>
BinarizedMdp<Scalar> binarize(const TabularMdp<Scalar>& mdp) {
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    const int depth = binary_depth(S);
    const Eigen::Index slots = Eigen::Index{1} << depth;
    const Eigen::Index per_pair = slots - 2;
    const Eigen::Index total = S + S * A * per_pair;

    Table<Scalar> transitions = Table<Scalar>::Zero(total * A, total);
    Table<Scalar> cost = Table<Scalar>::Zero(total, A);
    cost.topRows(S) = mdp.cost;

    // Trees are laid out in heap order: node h (root h = 1) sits at level
    // floor(log2 h) and covers a contiguous block of leaf slots. Heap nodes
    // 2 .. slots-1 are internal states; nodes >= slots are leaves, i.e.
    // original states (padding leaves carry no mass).
    for (Eigen::Index s = 0; s < S; ++s) {
        for (Eigen::Index a = 0; a < A; ++a) {
            Vector<Scalar> leaf_mass = Vector<Scalar>::Zero(slots);
            leaf_mass.head(S) = mdp.successors(s, a).transpose();
            const Eigen::Index pair_base = S + (s * A + a) * per_pair;

            auto global_id = [&](Eigen::Index h) -> Eigen::Index {
                if (h >= slots) {
                    const Eigen::Index leaf = h - slots;
                    return leaf < S ? leaf : 0;
                }
                return pair_base + h - 2;
            };
            auto mass = [&](Eigen::Index h) -> Scalar {
                int level = 0;
                while ((Eigen::Index{2} << level) <= h) ++level;
                const Eigen::Index width = slots >> level;
                const Eigen::Index lo = (h - (Eigen::Index{1} << level)) * width;
                return leaf_mass.segment(lo, width).sum();
            };

            for (Eigen::Index h = 1; h < slots; ++h) {
                const Scalar left = mass(2 * h);
                const Scalar right = mass(2 * h + 1);
                const Scalar both = left + right;
                // Unreachable subtrees still need a valid distribution.
                const Scalar p_left = both > Scalar(0) ? left / both : Scalar(0.5);
                const Scalar p_right = both > Scalar(0) ? right / both : Scalar(0.5);
                const Eigen::Index lchild = global_id(2 * h);
                const Eigen::Index rchild = global_id(2 * h + 1);
                if (h == 1) {
                    const Eigen::Index row = s * A + a;
                    transitions(row, lchild) += p_left;
                    transitions(row, rchild) += p_right;
                } else {
                    const Eigen::Index node = global_id(h);
                    for (Eigen::Index b = 0; b < A; ++b) {
                        transitions(node * A + b, lchild) += p_left;
                        transitions(node * A + b, rchild) += p_right;
                    }
                }
            }
        }
    }

    BinarizedMdp<Scalar> out;
    out.depth = depth;
    out.discount_bin = std::pow(mdp.discount, Scalar(1) / static_cast<Scalar>(depth));
    out.inner.transitions = std::move(transitions);
    out.inner.cost = std::move(cost);
    out.inner.init = Vector<Scalar>::Zero(total);
    out.inner.init.head(S) = mdp.init;
    out.inner.discount = out.discount_bin;
    out.root_map.resize(static_cast<std::size_t>(S));
    for (Eigen::Index s = 0; s < S; ++s) out.root_map[static_cast<std::size_t>(s)] = s;
    return out;
}

/// Extends a policy on the original states to the binarized MDP. Internal
/// nodes route identically under every action, so they get the uniform row.
template <class Scalar>
Policy<Scalar> lift_policy(const BinarizedMdp<Scalar>& bin, const Policy<Scalar>& pi) {
    Policy<Scalar> out = Policy<Scalar>::uniform(bin.inner.num_states(), bin.inner.num_actions());
    for (std::size_t s = 0; s < bin.root_map.size(); ++s)
        out.probs.row(bin.root_map[s]) = pi.probs.row(static_cast<Eigen::Index>(s));
    return out;
}

/// Value of the root states of the binarized MDP under the lifted policy,
/// indexed like the original states.
template <class Scalar>
Vector<Scalar> binarized_root_values(const BinarizedMdp<Scalar>& bin, const Policy<Scalar>& pi) {
    const Vector<Scalar> v = exact_value(bin.inner, lift_policy(bin, pi), bin.inner.cost).v;
    Vector<Scalar> out(static_cast<Eigen::Index>(bin.root_map.size()));
    for (std::size_t s = 0; s < bin.root_map.size(); ++s) out(static_cast<Eigen::Index>(s)) = v(bin.root_map[s]);
    return out;
}

}  // namespace soaril
