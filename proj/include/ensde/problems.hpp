#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ensde/core.hpp"

namespace ensde {

enum class FunctionId { rosenbrock, rastrigin, sphere, griewangk, ackley };

inline constexpr std::array<FunctionId, 5> kAllFunctions = {
    FunctionId::rosenbrock, FunctionId::rastrigin, FunctionId::sphere, FunctionId::griewangk, FunctionId::ackley};

/// Stable token used on the command line and in CSV output.
std::string_view to_token(FunctionId id);
FunctionId function_from_token(std::string_view token);

/// Search box for each benchmark.
Bounds<double> default_bounds(FunctionId id);

namespace functions {

template <typename Derived>
typename Derived::Scalar rosenbrock(const Eigen::MatrixBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    S sum{0};
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const S a = x[i + 1] - x[i] * x[i];
        const S b = x[i] - S{1};
        sum += S{100} * a * a + b * b;
    }
    return sum;
}

template <typename Derived>
typename Derived::Scalar rastrigin(const Eigen::MatrixBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    const S two_pi = S{2} * std::numbers::pi_v<S>;
    S sum{0};
    for (Eigen::Index i = 0; i < x.size(); ++i)
        sum += x[i] * x[i] - S{10} * std::cos(two_pi * x[i]);
    return S{10} * static_cast<S>(x.size()) + sum;
}

template <typename Derived>
typename Derived::Scalar sphere(const Eigen::MatrixBase<Derived>& x)
{
    return x.squaredNorm();
}

template <typename Derived>
typename Derived::Scalar griewangk(const Eigen::MatrixBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    S sum{0};
    S prod{1};
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sum += x[i] * x[i] / S{4000};
        prod *= std::cos(x[i] / std::sqrt(static_cast<S>(i + 1)));
    }
    return -prod + sum + S{1};
}

// Pairwise Ackley: zero at the origin.
template <typename Derived>
typename Derived::Scalar ackley(const Eigen::MatrixBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    const S two_pi = S{2} * std::numbers::pi_v<S>;
    const S e = std::numbers::e_v<S>;
    S sum{0};
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const S a = x[i];
        const S b = x[i + 1];
        sum += S{20} + e - S{20} * std::exp(S{-0.2} * std::sqrt(S{0.5} * (b * b + a * a))) -
               std::exp(S{0.5} * (std::cos(two_pi * b) + std::cos(two_pi * a)));
    }
    return sum;
}

template <typename Derived>
typename Derived::Scalar evaluate(FunctionId id, const Eigen::MatrixBase<Derived>& x)
{
    switch (id) {
    case FunctionId::rosenbrock: return rosenbrock(x);
    case FunctionId::rastrigin: return rastrigin(x);
    case FunctionId::sphere: return sphere(x);
    case FunctionId::griewangk: return griewangk(x);
    case FunctionId::ackley: return ackley(x);
    }
    throw InvalidArgument("unknown function id");
}

} // namespace functions

struct BenchmarkFunction {
    FunctionId id = FunctionId::sphere;
    int dimension = 10;
    Bounds<double> bounds = default_bounds(FunctionId::sphere);

    std::string_view token() const { return to_token(id); }
};

BenchmarkFunction make_function(FunctionId id, int dimension);

/// The five benchmarks in canonical order.
std::vector<BenchmarkFunction> make_suite(int dimension);

class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted() : std::runtime_error("evaluation budget exhausted") {}
};

class EvalCounter {
public:
    explicit EvalCounter(long budget);

    long used() const { return used_; }
    long budget() const { return budget_; }
    long remaining() const { return budget_ - used_; }
    bool exhausted() const { return used_ >= budget_; }

    void charge();

private:
    long used_ = 0;
    long budget_;
};

/// Objective value of `x`; charges one evaluation.
double evaluate(const BenchmarkFunction& f, const RealVector& x, EvalCounter& counter);

} // namespace ensde
