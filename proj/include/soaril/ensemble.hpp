#pragma once

#include "soaril/mdp.hpp"
#include "soaril/sampling.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace soaril {

/// Batch receiving the visit that brings a pair's total count to `visit_count`.
inline std::int64_t assign_batch(std::int64_t visit_count, std::int64_t num_batches) {
    if (num_batches < 1) throw UsageError("assign_batch: need at least one batch");
    return visit_count % num_batches;
}

/// Visit counters N(s,a), and per batch N_l(s,a) and N_l(s,a,s').
///
/// Visits are dealt round-robin: the n-th visit of (s, a) goes to batch
/// n mod L, so batch counts of a pair never differ by more than one.
class EnsembleCounts {
public:
    EnsembleCounts(Eigen::Index num_states, Eigen::Index num_actions, std::int64_t num_batches)
        : num_states_(num_states),
          num_actions_(num_actions),
          total_(CountTable::Zero(num_states, num_actions)),
          batch_(static_cast<std::size_t>(num_batches), CountTable::Zero(num_states, num_actions)),
          batch_next_(static_cast<std::size_t>(num_batches),
                      CountTable::Zero(num_states * num_actions, num_states)) {
        if (num_batches < 1) throw UsageError("EnsembleCounts: need at least one batch");
    }

    void record(const Transition& t) {
        std::int64_t& n = total_(t.state, t.action);
        ++n;
        const auto l = static_cast<std::size_t>(assign_batch(n, num_batches()));
        ++batch_[l](t.state, t.action);
        ++batch_next_[l](t.state * num_actions_ + t.action, t.next_state);
    }

    void record(const Trajectory& traj) {
        for (const Transition& t : traj.steps) record(t);
    }

    std::int64_t num_batches() const { return static_cast<std::int64_t>(batch_.size()); }
    Eigen::Index num_states() const { return num_states_; }
    Eigen::Index num_actions() const { return num_actions_; }
    const CountTable& total() const { return total_; }
    const CountTable& batch(std::int64_t l) const { return batch_[static_cast<std::size_t>(l)]; }
    const CountTable& batch_next(std::int64_t l) const { return batch_next_[static_cast<std::size_t>(l)]; }

    /// Batch sums equal totals, successor sums equal batch counts, and the
    /// round-robin balance holds for every pair.
    bool consistent() const {
        CountTable sum = CountTable::Zero(num_states_, num_actions_);
        CountTable lo = CountTable::Constant(num_states_, num_actions_, std::numeric_limits<std::int64_t>::max());
        CountTable hi = CountTable::Zero(num_states_, num_actions_);
        for (std::size_t l = 0; l < batch_.size(); ++l) {
            sum += batch_[l];
            lo = lo.cwiseMin(batch_[l]);
            hi = hi.cwiseMax(batch_[l]);
            const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> row_sums = batch_next_[l].rowwise().sum();
            for (Eigen::Index s = 0; s < num_states_; ++s)
                for (Eigen::Index a = 0; a < num_actions_; ++a)
                    if (row_sums(s * num_actions_ + a) != batch_[l](s, a)) return false;
        }
        return sum == total_ && ((hi - lo).array() <= 1).all();
    }

private:
    Eigen::Index num_states_;
    Eigen::Index num_actions_;
    CountTable total_;
    std::vector<CountTable> batch_;
    std::vector<CountTable> batch_next_;
};

/// P_l(s' | s, a) = N_l(s, a, s') / (N_l(s, a) + 2). Rows are deliberately
/// substochastic, summing to n / (n + 2) < 1.
template <class Scalar>
Table<Scalar> estimate_transitions(const EnsembleCounts& counts, std::int64_t l) {
    const CountTable& n = counts.batch(l);
    Table<Scalar> p = counts.batch_next(l).template cast<Scalar>();
    const Eigen::Map<const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>> flat(n.data(), n.size());
    for (Eigen::Index row = 0; row < p.rows(); ++row) p.row(row) /= static_cast<Scalar>(flat(row) + 2);
    return p;
}

/// Per-batch backups (P_l V)(s, a), one S x A table per batch, computed
/// directly from the counts.
template <class Scalar>
std::vector<Table<Scalar>> ensemble_backups(const EnsembleCounts& counts, const Vector<Scalar>& v) {
    const Eigen::Index S = counts.num_states();
    const Eigen::Index A = counts.num_actions();
    std::vector<Table<Scalar>> out;
    out.reserve(static_cast<std::size_t>(counts.num_batches()));
    for (std::int64_t l = 0; l < counts.num_batches(); ++l) {
        const CountTable& n = counts.batch(l);
        const CountTable& next = counts.batch_next(l);
        Table<Scalar> x(S, A);
        for (Eigen::Index s = 0; s < S; ++s) {
            for (Eigen::Index a = 0; a < A; ++a) {
                const std::int64_t visits = n(s, a);
                if (visits == 0) {
                    x(s, a) = Scalar(0);
                    continue;
                }
                Scalar acc = Scalar(0);
                const auto row = next.row(s * A + a);
                for (Eigen::Index sp = 0; sp < S; ++sp)
                    if (row(sp) != 0) acc += static_cast<Scalar>(row(sp)) * v(sp);
                x(s, a) = acc / static_cast<Scalar>(visits + 2);
            }
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// Backups (P_l V) from explicit kernels.
template <class Scalar>
std::vector<Table<Scalar>> kernel_backups(const std::vector<Table<Scalar>>& kernels, const Vector<Scalar>& v,
                                          Eigen::Index num_actions) {
    std::vector<Table<Scalar>> out;
    out.reserve(kernels.size());
    for (const auto& k : kernels) out.push_back(expected_next(k, v, num_actions));
    return out;
}

/// Elementwise minimum over the ensemble.
template <class Scalar>
Table<Scalar> aggregate_min(const std::vector<Table<Scalar>>& backups) {
    if (backups.empty()) throw UsageError("aggregate_min: empty ensemble");
    Table<Scalar> m = backups.front();
#ifdef SOARIL_CORRUPT_MIN_AGGREGATION
    // Negative-control build: the verify suite must detect this.
    for (std::size_t l = 1; l < backups.size(); ++l) m = m.cwiseMax(backups[l]);
#else
    for (std::size_t l = 1; l < backups.size(); ++l) m = m.cwiseMin(backups[l]);
#endif
    return m;
}

/// max(mean_l X_l - min(scale * sigma, clip), 0) with the unnormalized
/// deviation sigma = sqrt(sum_l (X_l - mean)^2).
template <class Scalar>
Table<Scalar> aggregate_mean_std(const std::vector<Table<Scalar>>& backups, Scalar std_scale = Scalar(1),
                                 Scalar std_clip = std::numeric_limits<Scalar>::infinity()) {
    if (backups.empty()) throw UsageError("aggregate_mean_std: empty ensemble");
    const Scalar count = static_cast<Scalar>(backups.size());
    Table<Scalar> mean = Table<Scalar>::Zero(backups.front().rows(), backups.front().cols());
    for (const auto& x : backups) mean += x;
    mean /= count;
    Table<Scalar> sq = Table<Scalar>::Zero(mean.rows(), mean.cols());
    for (const auto& x : backups) sq += (x - mean).cwiseAbs2();
    const Table<Scalar> bonus = (std_scale * sq.cwiseSqrt()).cwiseMin(std_clip);
    return (mean - bonus).cwiseMax(Scalar(0));
}

/// Q = c + gamma * min_l (P_l V). `cost` is S x A (state costs already broadcast).
template <class Scalar>
Table<Scalar> optimistic_q_min(const Table<Scalar>& cost, const std::vector<Table<Scalar>>& backups, Scalar gamma) {
    return cost + gamma * aggregate_min(backups);
}

template <class Scalar>
Table<Scalar> optimistic_q_min(const Table<Scalar>& cost, const Vector<Scalar>& v,
                               const std::vector<Table<Scalar>>& kernels, Scalar gamma) {
    const auto backups = kernel_backups(kernels, v, cost.cols());
    return optimistic_q_min<Scalar>(cost, backups, gamma);
}

/// Q = c + gamma * max(mean_l (P_l V) - min(scale * sigma, clip), 0).
template <class Scalar>
Table<Scalar> optimistic_q_mean_std(const Table<Scalar>& cost, const std::vector<Table<Scalar>>& backups, Scalar gamma,
                                    Scalar std_scale = Scalar(1),
                                    Scalar std_clip = std::numeric_limits<Scalar>::infinity()) {
    return cost + gamma * aggregate_mean_std(backups, std_scale, std_clip);
}

template <class Scalar>
Table<Scalar> optimistic_q_mean_std(const Table<Scalar>& cost, const Vector<Scalar>& v,
                                    const std::vector<Table<Scalar>>& kernels, Scalar gamma,
                                    Scalar std_scale = Scalar(1),
                                    Scalar std_clip = std::numeric_limits<Scalar>::infinity()) {
    const auto backups = kernel_backups(kernels, v, cost.cols());
    return optimistic_q_mean_std<Scalar>(cost, backups, gamma, std_scale, std_clip);
}

}  // namespace soaril
