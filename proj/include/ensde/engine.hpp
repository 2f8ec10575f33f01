#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ensde/core.hpp"
#include "ensde/problems.hpp"
#include "ensde/regression.hpp"

namespace ensde {

enum class Algorithm { de, de_rf, de_ext, de_gb, de_dt, de_lm };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms = {Algorithm::de,    Algorithm::de_rf, Algorithm::de_ext,
                                                            Algorithm::de_gb, Algorithm::de_dt, Algorithm::de_lm};

std::string_view to_token(Algorithm algorithm);
Algorithm algorithm_from_token(std::string_view token);

/// Regressor backing a hybrid algorithm; empty for plain DE.
std::optional<RegressorType> regressor_for(Algorithm algorithm);

struct RunConfig {
    DeParams params;
    BenchmarkFunction function;
    Algorithm algorithm = Algorithm::de;
    std::optional<RegressorSpec> regressor;
    std::uint64_t seed = 0;
    long budget = 10000;

    /// Reference configuration for one (algorithm, function) cell.
    static RunConfig make(Algorithm algorithm, FunctionId function, const DeParams& params, std::uint64_t seed);

    void validate() const;
};

struct RunResult {
    double best_fitness = 0.0;
    RealVector best_position;
    long evaluations_used = 0;
    int generations_completed = 0;
    /// Best fitness after initialization, then after each generation.
    std::vector<double> per_generation_best;
    /// Individuals whose regression fit failed and fell back to the validation vector.
    long regression_fallbacks = 0;
};

/// Greedy one-to-one selection: the trial wins ties.
const Individual& select(const Individual& candidate, const Individual& trial);

/// Classic DE with Rand/1/Bin and synchronous replacement.
RunResult run_classic_de(const RunConfig& config, RngStream& rng);

/// Ensemble-strategy DE where a regression model blends the ten strategy
/// trials into the single vector that competes in selection.
RunResult run_regression_de(const RunConfig& config, RngStream& rng);

/// Dispatches on config.algorithm with a fresh stream seeded from config.seed.
RunResult run(const RunConfig& config);

} // namespace ensde
