#include "ensde/problems.hpp"

namespace ensde {

std::string_view to_token(FunctionId id)
{
    switch (id) {
    case FunctionId::rosenbrock: return "rosenbrock";
    case FunctionId::rastrigin: return "rastrigin";
    case FunctionId::sphere: return "sphere";
    case FunctionId::griewangk: return "griewangk";
    case FunctionId::ackley: return "ackley";
    }
    return "unknown";
}

FunctionId function_from_token(std::string_view token)
{
    for (FunctionId id : kAllFunctions)
        if (to_token(id) == token)
            return id;
    throw InvalidArgument("function: unknown token '" + std::string(token) + "'");
}

Bounds<double> default_bounds(FunctionId id)
{
    switch (id) {
    case FunctionId::rosenbrock:
    case FunctionId::rastrigin: return {-15.0, 15.0};
    case FunctionId::sphere: return {-100.0, 100.0};
    case FunctionId::griewangk: return {-600.0, 600.0};
    case FunctionId::ackley: return {-32.0, 32.0};
    }
    throw InvalidArgument("unknown function id");
}

BenchmarkFunction make_function(FunctionId id, int dimension)
{
    // Rosenbrock and Ackley sum over adjacent pairs.
    if (dimension < 2)
        throw InvalidArgument("dim: benchmark dimension must be at least 2, got " + std::to_string(dimension));
    return {id, dimension, default_bounds(id)};
}

std::vector<BenchmarkFunction> make_suite(int dimension)
{
    std::vector<BenchmarkFunction> suite;
    for (FunctionId id : kAllFunctions)
        suite.push_back(make_function(id, dimension));
    return suite;
}

EvalCounter::EvalCounter(long budget) : budget_(budget)
{
    if (budget <= 0)
        throw InvalidArgument("budget: must be positive");
}

void EvalCounter::charge()
{
    if (used_ >= budget_)
        throw BudgetExhausted();
    ++used_;
}

double evaluate(const BenchmarkFunction& f, const RealVector& x, EvalCounter& counter)
{
    if (x.size() != f.dimension)
        throw InvalidArgument("evaluate: dimension mismatch (expected " + std::to_string(f.dimension) + ", got " +
                              std::to_string(x.size()) + ")");
    counter.charge();
    return functions::evaluate(f.id, x);
}

} // namespace ensde
