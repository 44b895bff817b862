#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace soaril {

/// Row-major dynamic table. State-action tables are S x A, so the flat index
/// of (s, a) is s * A + a, which is also the row index of the transition table.
template <class Scalar>
using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Tabled = Table<double>;
using Vectord = Vector<double>;
using CountTable = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown for malformed arguments, inconsistent configurations and bad files.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine fails in a way valid inputs never cause.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ImitationMode { state_only, state_action };
enum class Aggregation { min, mean_std };

inline std::string_view to_string(ImitationMode m) {
    return m == ImitationMode::state_only ? "state_only" : "state_action";
}

inline std::string_view to_string(Aggregation a) {
    return a == Aggregation::min ? "min" : "mean_std";
}

inline ImitationMode parse_mode(std::string_view s) {
    if (s == "state_only") return ImitationMode::state_only;
    if (s == "state_action") return ImitationMode::state_action;
    throw UsageError("unknown imitation mode '" + std::string(s) + "'");
}

inline Aggregation parse_aggregation(std::string_view s) {
    if (s == "min") return Aggregation::min;
    if (s == "mean_std") return Aggregation::mean_std;
    throw UsageError("unknown aggregation rule '" + std::string(s) + "'");
}

/// Seeded random source. Sampling is implemented on top of the raw 64-bit
/// engine output so draws are identical across standard library vendors.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n-1}.
    std::int64_t index(std::int64_t n) {
        return static_cast<std::int64_t>(uniform() * static_cast<double>(n));
    }

    /// Number of failures before the first success, P(H = h) = (1-g) g^h.
    std::int64_t geometric(double g) {
        if (g <= 0.0) return 0;
        // 1 - uniform() lies in (0, 1], so the log is finite.
        return static_cast<std::int64_t>(std::floor(std::log(1.0 - uniform()) / std::log(g)));
    }

    /// Draws an index from a nonnegative weight vector summing to one.
    template <class Derived>
    std::int64_t categorical(const Eigen::DenseBase<Derived>& probs) {
        const double u = uniform();
        double acc = 0.0;
        const Eigen::Index n = probs.size();
        Eigen::Index last_positive = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = static_cast<double>(probs(i));
            if (p <= 0.0) continue;
            last_positive = i;
            acc += p;
            if (u < acc) return i;
        }
        // Rounding left u above the accumulated mass.
        return last_positive;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace soaril
