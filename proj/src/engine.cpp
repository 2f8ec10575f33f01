#include "ensde/engine.hpp"

#include <limits>
#include <string>

#include "ensde/strategies.hpp"

namespace ensde {

std::string_view to_token(Algorithm algorithm)
{
    switch (algorithm) {
    case Algorithm::de: return "de";
    case Algorithm::de_rf: return "de+rf";
    case Algorithm::de_ext: return "de+ext";
    case Algorithm::de_gb: return "de+gb";
    case Algorithm::de_dt: return "de+dt";
    case Algorithm::de_lm: return "de+lm";
    }
    return "unknown";
}

Algorithm algorithm_from_token(std::string_view token)
{
    for (Algorithm a : kAllAlgorithms)
        if (to_token(a) == token)
            return a;
    throw InvalidArgument("algorithm: unknown token '" + std::string(token) + "'");
}

std::optional<RegressorType> regressor_for(Algorithm algorithm)
{
    switch (algorithm) {
    case Algorithm::de: return std::nullopt;
    case Algorithm::de_rf: return RegressorType::rf;
    case Algorithm::de_ext: return RegressorType::ext;
    case Algorithm::de_gb: return RegressorType::gb;
    case Algorithm::de_dt: return RegressorType::dt;
    case Algorithm::de_lm: return RegressorType::lm;
    }
    return std::nullopt;
}

RunConfig RunConfig::make(Algorithm algorithm, FunctionId function, const DeParams& params, std::uint64_t seed)
{
    RunConfig config;
    config.params = params;
    config.function = make_function(function, params.dimension_d);
    config.algorithm = algorithm;
    if (auto type = regressor_for(algorithm))
        config.regressor = RegressorSpec::defaults(*type);
    config.seed = seed;
    config.budget = static_cast<long>(params.population_np) * params.max_generations;
    return config;
}

void RunConfig::validate() const
{
    params.validate();
    if (function.dimension != params.dimension_d)
        throw InvalidArgument("dim: function dimension differs from DE dimension");
    if (budget < params.population_np)
        throw InvalidArgument("budget: must cover at least the initial population (" +
                              std::to_string(params.population_np) + " evaluations)");
    if (algorithm != Algorithm::de) {
        if (!regressor)
            throw InvalidArgument("regressor: required for algorithm " + std::string(to_token(algorithm)));
        if (regressor->type != *regressor_for(algorithm))
            throw InvalidArgument("regressor: kind does not match algorithm " + std::string(to_token(algorithm)));
        regressor->validate();
    }
}

const Individual& select(const Individual& candidate, const Individual& trial)
{
    if (!candidate.fitness || !trial.fitness)
        throw InvalidArgument("select: both individuals must be evaluated");
    return *trial.fitness <= *candidate.fitness ? trial : candidate;
}

namespace {

// Shared generational loop. `make_trial(population, i)` returns the single
// vector that is evaluated and competes against member i.
template <typename MakeTrial>
RunResult evolve(const RunConfig& config, RngStream& rng, MakeTrial&& make_trial)
{
    config.validate();
    const BenchmarkFunction& f = config.function;
    EvalCounter counter(config.budget);
    RunResult result;
    result.best_fitness = std::numeric_limits<double>::infinity();

    auto record = [&](const Individual& ind) {
        if (*ind.fitness < result.best_fitness) {
            result.best_fitness = *ind.fitness;
            result.best_position = ind.position;
        }
    };

    Population population = init_population(config.params, f.bounds, rng);
    for (auto& member : population.members) {
        member.fitness = evaluate(f, member.position, counter);
        record(member);
    }
    result.per_generation_best.push_back(result.best_fitness);

    for (int gen = 1; gen <= config.params.max_generations && !counter.exhausted(); ++gen) {
        Population next = population;
        for (int i = 0; i < population.size() && !counter.exhausted(); ++i) {
            Individual trial{make_trial(population, i), std::nullopt};
            trial.fitness = evaluate(f, trial.position, counter);
            record(trial);
            next.members[static_cast<std::size_t>(i)] = select(population.members[static_cast<std::size_t>(i)], trial);
        }
        next.generation = gen;
        population = std::move(next);
        result.generations_completed = gen;
        result.per_generation_best.push_back(result.best_fitness);
    }

    result.evaluations_used = counter.used();
    return result;
}

} // namespace

RunResult run_classic_de(const RunConfig& config, RngStream& rng)
{
    if (config.algorithm != Algorithm::de)
        throw InvalidArgument("run_classic_de: algorithm must be 'de'");
    const auto strategy = StrategyId::from_ordinal(kRand1BinOrdinal);
    return evolve(config, rng, [&](const Population& population, int i) {
        return apply_strategy(strategy, population, i, config.params, config.function.bounds, rng);
    });
}

RunResult run_regression_de(const RunConfig& config, RngStream& rng)
{
    if (config.algorithm == Algorithm::de || !config.regressor)
        throw InvalidArgument("run_regression_de: a regression algorithm and regressor are required");
    const Bounds<double>& bounds = config.function.bounds;
    long fallbacks = 0;
    RunResult result = evolve(config, rng, [&](const Population& population, int i) {
        const auto test_set = create_test_set(population, i, config.params, bounds, rng);
        RealVector validation = create_validation_vector(population, i, config.params, bounds, rng);
        try {
            return build_regression_vector(test_set, validation, *config.regressor, bounds, rng);
        } catch (const RegressionError&) {
            ++fallbacks;
            return validation;
        }
    });
    result.regression_fallbacks = fallbacks;
    return result;
}

RunResult run(const RunConfig& config)
{
    RngStream rng(config.seed);
    return config.algorithm == Algorithm::de ? run_classic_de(config, rng) : run_regression_de(config, rng);
}

} // namespace ensde
