#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ensde/core.hpp"

namespace ensde {

enum class MutationRule { best1, rand1, rand_to_best1, best2, rand2 };
enum class CrossoverKind { exponential, binomial };

/// Number of donor members (distinct from the target) a rule consumes.
int donor_count(MutationRule rule);

/// One member of the ten-strategy ensemble.
///
/// Ordinals 1-5 pair the mutation rules (Best/1, Rand/1, RandToBest/1,
/// Best/2, Rand/2) with exponential crossover; ordinals 6-10 repeat the
/// same rules with binomial crossover.
struct StrategyId {
    MutationRule mutation;
    CrossoverKind crossover;
    int ordinal;

    static StrategyId from_ordinal(int ordinal);
    std::string name() const; // e.g. "Rand/1/Bin"

    friend bool operator==(const StrategyId&, const StrategyId&) = default;
};

inline constexpr int kEnsembleSize = 10;
inline constexpr int kRand1BinOrdinal = 7;

/// The ensemble in ordinal order.
std::array<StrategyId, kEnsembleSize> strategy_ensemble();

/// Mutant for explicit donors (donors[0] is r1, donors[1] is r2, ...).
RealVector mutate_with_donors(MutationRule rule, const Population& population, int target_index, int best_index,
                              std::span<const int> donors, double f);

/// Mutant with freshly sampled donors; `best` is the lowest-fitness member.
RealVector mutate(StrategyId strategy, const Population& population, int target_index, double f, RngStream& rng);

/// Takes mutant[j] iff rand_j <= cr or j == j_rand.
RealVector binomial_crossover(const RealVector& target, const RealVector& mutant, double cr, RngStream& rng);

/// Copies a circular block of `length` mutant components starting at `start`.
RealVector exponential_block(const RealVector& target, const RealVector& mutant, int start, int length);

/// Circular block starting at a uniform position, grown while rand < cr.
RealVector exponential_crossover(const RealVector& target, const RealVector& mutant, double cr, RngStream& rng);

/// mutate -> crossover -> clamp. Result is unevaluated.
RealVector apply_strategy(StrategyId strategy, const Population& population, int target_index,
                          const DeParams& params, const Bounds<double>& bounds, RngStream& rng);

/// One trial vector per ensemble strategy, in ordinal order.
std::vector<RealVector> create_test_set(const Population& population, int target_index, const DeParams& params,
                                        const Bounds<double>& bounds, RngStream& rng);

/// The Rand/1/Bin trial for the target.
RealVector create_validation_vector(const Population& population, int target_index, const DeParams& params,
                                    const Bounds<double>& bounds, RngStream& rng);

} // namespace ensde
