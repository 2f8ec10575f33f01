#include "ensde/strategies.hpp"

namespace ensde {

namespace {

void require_same_length(const RealVector& a, const RealVector& b, const char* what)
{
    if (a.size() != b.size())
        throw InvalidArgument(std::string(what) + ": length mismatch");
    if (a.size() == 0)
        throw InvalidArgument(std::string(what) + ": empty vectors");
}

} // namespace

int donor_count(MutationRule rule)
{
    switch (rule) {
    case MutationRule::best1: return 2;
    case MutationRule::rand1: return 3;
    case MutationRule::rand_to_best1: return 2;
    case MutationRule::best2: return 4;
    case MutationRule::rand2: return 5;
    }
    return 0;
}

StrategyId StrategyId::from_ordinal(int ordinal)
{
    static constexpr std::array<MutationRule, 5> rules = {MutationRule::best1, MutationRule::rand1,
                                                          MutationRule::rand_to_best1, MutationRule::best2,
                                                          MutationRule::rand2};
    if (ordinal < 1 || ordinal > kEnsembleSize)
        throw InvalidArgument("strategy ordinal must lie in 1..10, got " + std::to_string(ordinal));
    const int k = (ordinal - 1) % 5;
    const CrossoverKind kind = ordinal <= 5 ? CrossoverKind::exponential : CrossoverKind::binomial;
    return {rules[static_cast<std::size_t>(k)], kind, ordinal};
}

std::string StrategyId::name() const
{
    std::string base;
    switch (mutation) {
    case MutationRule::best1: base = "Best/1"; break;
    case MutationRule::rand1: base = "Rand/1"; break;
    case MutationRule::rand_to_best1: base = "RandToBest/1"; break;
    case MutationRule::best2: base = "Best/2"; break;
    case MutationRule::rand2: base = "Rand/2"; break;
    }
    return base + (crossover == CrossoverKind::exponential ? "/Exp" : "/Bin");
}

std::array<StrategyId, kEnsembleSize> strategy_ensemble()
{
    std::array<StrategyId, kEnsembleSize> out{};
    for (int k = 0; k < kEnsembleSize; ++k)
        out[static_cast<std::size_t>(k)] = StrategyId::from_ordinal(k + 1);
    return out;
}

RealVector mutate_with_donors(MutationRule rule, const Population& population, int target_index, int best_index,
                              std::span<const int> donors, double f)
{
    if (static_cast<int>(donors.size()) < donor_count(rule))
        throw InvalidArgument("mutate: not enough donor indices");
    auto x = [&](std::size_t k) -> const RealVector& { return population.position(donors[k]); };
    const RealVector& target = population.position(target_index);
    const RealVector& best = population.position(best_index);

    switch (rule) {
    case MutationRule::best1: return best + f * (x(0) - x(1));
    case MutationRule::rand1: return x(0) + f * (x(1) - x(2));
    case MutationRule::rand_to_best1: return target + f * (best - target) + f * (x(0) - x(1));
    case MutationRule::best2: return best + f * (x(0) + x(1) - x(2) - x(3));
    case MutationRule::rand2: return x(0) + f * (x(1) + x(2) - x(3) - x(4));
    }
    throw InvalidArgument("mutate: unknown rule");
}

RealVector mutate(StrategyId strategy, const Population& population, int target_index, double f, RngStream& rng)
{
    const auto donors = sample_distinct_indices(donor_count(strategy.mutation), target_index, population.size(), rng);
    int best = target_index;
    if (strategy.mutation == MutationRule::best1 || strategy.mutation == MutationRule::best2 ||
        strategy.mutation == MutationRule::rand_to_best1)
        best = population.best_index();
    return mutate_with_donors(strategy.mutation, population, target_index, best, donors, f);
}

RealVector binomial_crossover(const RealVector& target, const RealVector& mutant, double cr, RngStream& rng)
{
    require_same_length(target, mutant, "binomial_crossover");
    const auto d = static_cast<int>(target.size());
    const int j_rand = rng.index(d);
    RealVector trial = target;
    for (int j = 0; j < d; ++j) {
        if (rng.uniform() <= cr || j == j_rand)
            trial[j] = mutant[j];
    }
    return trial;
}

RealVector exponential_block(const RealVector& target, const RealVector& mutant, int start, int length)
{
    require_same_length(target, mutant, "exponential_crossover");
    const auto d = static_cast<int>(target.size());
    if (start < 0 || start >= d || length < 1 || length > d)
        throw InvalidArgument("exponential_crossover: block out of range");
    RealVector trial = target;
    for (int k = 0; k < length; ++k) {
        const int j = (start + k) % d;
        trial[j] = mutant[j];
    }
    return trial;
}

RealVector exponential_crossover(const RealVector& target, const RealVector& mutant, double cr, RngStream& rng)
{
    require_same_length(target, mutant, "exponential_crossover");
    const auto d = static_cast<int>(target.size());
    const int start = rng.index(d);
    int length = 0;
    do {
        ++length;
    } while (length < d && rng.uniform() < cr);
    return exponential_block(target, mutant, start, length);
}

RealVector apply_strategy(StrategyId strategy, const Population& population, int target_index,
                          const DeParams& params, const Bounds<double>& bounds, RngStream& rng)
{
    const RealVector mutant = mutate(strategy, population, target_index, params.amplification_f, rng);
    const RealVector& target = population.position(target_index);
    RealVector trial = strategy.crossover == CrossoverKind::binomial
                           ? binomial_crossover(target, mutant, params.crossover_cr, rng)
                           : exponential_crossover(target, mutant, params.crossover_cr, rng);
    return clamp_to_bounds(trial, bounds);
}

std::vector<RealVector> create_test_set(const Population& population, int target_index, const DeParams& params,
                                        const Bounds<double>& bounds, RngStream& rng)
{
    std::vector<RealVector> test_set;
    test_set.reserve(kEnsembleSize);
    for (const StrategyId& s : strategy_ensemble())
        test_set.push_back(apply_strategy(s, population, target_index, params, bounds, rng));
    return test_set;
}

RealVector create_validation_vector(const Population& population, int target_index, const DeParams& params,
                                    const Bounds<double>& bounds, RngStream& rng)
{
    return apply_strategy(StrategyId::from_ordinal(kRand1BinOrdinal), population, target_index, params, bounds, rng);
}

} // namespace ensde
