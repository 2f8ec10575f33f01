#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ensde {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using RealVector = Vector<double>;
using RealMatrix = Matrix<double>;

/// Thrown when a precondition on an argument or configuration value fails.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Box applied uniformly to every coordinate.
template <typename Scalar = double>
struct Bounds {
    Scalar lower{-1};
    Scalar upper{1};

    Bounds() = default;
    Bounds(Scalar lo, Scalar hi) : lower(lo), upper(hi)
    {
        if (!(lo < hi))
            throw InvalidArgument("bounds: lower must be strictly less than upper");
    }

    Scalar width() const { return upper - lower; }

    template <typename Derived>
    bool contains(const Eigen::MatrixBase<Derived>& v) const
    {
        return (v.array() >= lower).all() && (v.array() <= upper).all();
    }
};

/// Component-wise min(upper, max(lower, c)).
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> clamp_to_bounds(const Eigen::MatrixBase<Derived>& v, const Bounds<Scalar>& bounds)
{
    return v.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

/// Control parameters of a DE run.
struct DeParams {
    double amplification_f = 0.5;
    double crossover_cr = 0.9;
    int population_np = 10;
    int dimension_d = 10;
    int max_generations = 1000;

    // Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// Seedable stream of uniform draws backed by std::mt19937_64.
///
/// The mapping from raw 64-bit words to reals and bounded integers is done here
/// rather than through <random> distributions, whose output is
/// implementation-defined; this keeps runs reproducible across standard
/// libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Unbiased (rejection sampling).
    int index(int n);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

struct Individual {
    RealVector position;
    std::optional<double> fitness;

    bool evaluated() const { return fitness.has_value(); }
};

struct Population {
    std::vector<Individual> members;
    int generation = 0;

    int size() const { return static_cast<int>(members.size()); }
    int dimension() const { return members.empty() ? 0 : static_cast<int>(members.front().position.size()); }
    const RealVector& position(int i) const { return members[static_cast<std::size_t>(i)].position; }

    /// Index of the lowest-fitness member (lowest index on ties).
    /// Throws if any member is unevaluated.
    int best_index() const;
};

/// NP members drawn uniformly from the box, unevaluated, generation 0.
Population init_population(const DeParams& params, const Bounds<double>& bounds, RngStream& rng);

/// `count` pairwise distinct indices in [0, np), none equal to `exclude`.
std::vector<int> sample_distinct_indices(int count, int exclude, int np, RngStream& rng);

} // namespace ensde
