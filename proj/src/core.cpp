#include "ensde/core.hpp"

#include <algorithm>
#include <limits>

namespace ensde {

void DeParams::validate() const
{
    if (!(amplification_f >= 0.1 && amplification_f <= 1.0))
        throw InvalidArgument("f: amplification factor must lie in [0.1, 1.0], got " + std::to_string(amplification_f));
    if (!(crossover_cr >= 0.0 && crossover_cr <= 1.0))
        throw InvalidArgument("cr: crossover rate must lie in [0.0, 1.0], got " + std::to_string(crossover_cr));
    // Rand/2 needs five donors distinct from the target.
    if (population_np < 6)
        throw InvalidArgument("np: population size must be at least 6, got " + std::to_string(population_np));
    if (dimension_d < 1)
        throw InvalidArgument("dim: dimension must be positive, got " + std::to_string(dimension_d));
    if (max_generations < 1)
        throw InvalidArgument("tmax: max generations must be positive, got " + std::to_string(max_generations));
}

int RngStream::index(int n)
{
    if (n <= 0)
        throw InvalidArgument("RngStream::index: n must be positive");
    const auto range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t word = engine_();
    while (word >= limit)
        word = engine_();
    return static_cast<int>(word % range);
}

int Population::best_index() const
{
    if (members.empty())
        throw InvalidArgument("best_index: empty population");
    int best = -1;
    double best_fit = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
        const auto& m = members[static_cast<std::size_t>(i)];
        if (!m.fitness)
            throw InvalidArgument("best_index: population contains unevaluated members");
        if (best < 0 || *m.fitness < best_fit) {
            best = i;
            best_fit = *m.fitness;
        }
    }
    return best;
}

Population init_population(const DeParams& params, const Bounds<double>& bounds, RngStream& rng)
{
    params.validate();
    if (!(bounds.lower < bounds.upper))
        throw InvalidArgument("bounds: lower must be strictly less than upper");

    Population pop;
    pop.members.reserve(static_cast<std::size_t>(params.population_np));
    for (int i = 0; i < params.population_np; ++i) {
        RealVector x(params.dimension_d);
        for (int j = 0; j < params.dimension_d; ++j)
            x[j] = rng.uniform(bounds.lower, bounds.upper);
        pop.members.push_back({std::move(x), std::nullopt});
    }
    return pop;
}

std::vector<int> sample_distinct_indices(int count, int exclude, int np, RngStream& rng)
{
    if (count < 0 || count + 1 > np)
        throw InvalidArgument("sample_distinct_indices: need count + 1 <= np (count=" + std::to_string(count) +
                              ", np=" + std::to_string(np) + ")");
    if (exclude < 0 || exclude >= np)
        throw InvalidArgument("sample_distinct_indices: exclude out of range");

    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        const int r = rng.index(np);
        if (r == exclude || std::find(out.begin(), out.end(), r) != out.end())
            continue;
        out.push_back(r);
    }
    return out;
}

} // namespace ensde
