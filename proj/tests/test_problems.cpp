#include <doctest.h>

#include <cmath>

#include "ensde/problems.hpp"

using namespace ensde;

namespace {

RealVector filled(int d, double v) { return RealVector::Constant(d, v); }

RealVector random_point(const Bounds<double>& b, int d, RngStream& rng)
{
    RealVector x(d);
    for (int j = 0; j < d; ++j)
        x[j] = rng.uniform(b.lower, b.upper);
    return x;
}

} // namespace

TEST_CASE("benchmark identities")
{
    using namespace functions;
    CHECK(rosenbrock(filled(10, 1.0)) == 0.0);
    CHECK(rosenbrock(filled(10, 0.0)) == 9.0);
    CHECK(rastrigin(filled(10, 1.0)) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rastrigin(filled(10, 0.0)) == 0.0);
    CHECK(sphere(filled(10, 0.0)) == 0.0);
    CHECK(griewangk(filled(10, 0.0)) == 0.0);
    CHECK(std::abs(ackley(filled(10, 0.0))) <= 1e-12);
}

TEST_CASE("hand-evaluated points")
{
    using namespace functions;
    RealVector x(3);
    x << 1.0, 2.0, -1.0;
    // (2 - 1)^2 * 100 + 0 + (-1 - 4)^2 * 100 + 1
    CHECK(rosenbrock(x) == doctest::Approx(100.0 + 2500.0 + 1.0));
    CHECK(sphere(x) == 6.0);
    const double g = 6.0 / 4000.0 - std::cos(1.0) * std::cos(2.0 / std::sqrt(2.0)) * std::cos(-1.0 / std::sqrt(3.0)) + 1.0;
    CHECK(griewangk(x) == doctest::Approx(g).epsilon(1e-14));

    RealVector y(2);
    y << 0.5, 0.0;
    const double a = 20.0 + std::exp(1.0) - 20.0 * std::exp(-0.2 * std::sqrt(0.5 * 0.25)) -
                     std::exp(0.5 * (std::cos(M_PI) + 1.0));
    CHECK(ackley(y) == doctest::Approx(a).epsilon(1e-14));
}

TEST_CASE("evaluation works for other scalar types")
{
    Vector<long double> x = Vector<long double>::Constant(4, 1.0L);
    CHECK(functions::rosenbrock(x) == 0.0L);
    Vector<float> z = Vector<float>::Zero(4);
    CHECK(functions::sphere(z) == 0.0f);
}

TEST_CASE("tokens round-trip")
{
    for (FunctionId id : kAllFunctions)
        CHECK(function_from_token(to_token(id)) == id);
    CHECK(to_token(FunctionId::griewangk) == "griewangk");
    CHECK_THROWS_AS(function_from_token("schwefel"), InvalidArgument);
}

TEST_CASE("make_suite")
{
    const auto suite = make_suite(10);
    REQUIRE(suite.size() == 5);
    CHECK(suite[0].id == FunctionId::rosenbrock);
    CHECK(suite[1].id == FunctionId::rastrigin);
    CHECK(suite[2].id == FunctionId::sphere);
    CHECK(suite[3].id == FunctionId::griewangk);
    CHECK(suite[4].id == FunctionId::ackley);
    CHECK(suite[0].bounds.lower == -15.0);
    CHECK(suite[1].bounds.upper == 15.0);
    CHECK(suite[2].bounds.lower == -100.0);
    CHECK(suite[2].bounds.upper == 100.0);
    CHECK(suite[3].bounds.upper == 600.0);
    CHECK(suite[4].bounds.lower == -32.0);
    CHECK(suite[4].bounds.upper == 32.0);
    for (const auto& f : suite)
        CHECK(f.dimension == 10);
    CHECK_THROWS_AS(make_suite(1), InvalidArgument);
}

TEST_CASE("nonnegativity over each box")
{
    RngStream rng(11);
    for (const auto& f : make_suite(10))
        for (int s = 0; s < 2000; ++s)
            CHECK(functions::evaluate(f.id, random_point(f.bounds, 10, rng)) >= -1e-12);
}

TEST_CASE("rastrigin, sphere and griewangk are even functions")
{
    RngStream rng(12);
    for (FunctionId id : {FunctionId::rastrigin, FunctionId::sphere, FunctionId::griewangk}) {
        const auto b = default_bounds(id);
        for (int s = 0; s < 500; ++s) {
            const RealVector x = random_point(b, 10, rng);
            const RealVector neg = -x;
            CHECK(functions::evaluate(id, x) == doctest::Approx(functions::evaluate(id, neg)).epsilon(1e-13));
        }
    }
}

TEST_CASE("EvalCounter charges exactly once per evaluation")
{
    const auto f = make_function(FunctionId::sphere, 3);
    EvalCounter counter(5);
    const RealVector x = RealVector::Zero(3);
    for (int i = 0; i < 5; ++i) {
        CHECK(counter.used() == i);
        CHECK(evaluate(f, x, counter) == 0.0);
    }
    CHECK(counter.used() == 5);
    CHECK(counter.exhausted());
    CHECK(counter.remaining() == 0);
    CHECK_THROWS_AS(evaluate(f, x, counter), BudgetExhausted);
    CHECK(counter.used() == 5);
}

TEST_CASE("evaluate rejects a dimension mismatch without charging")
{
    const auto f = make_function(FunctionId::ackley, 4);
    EvalCounter counter(10);
    CHECK_THROWS_AS(evaluate(f, RealVector::Zero(3), counter), InvalidArgument);
    CHECK(counter.used() == 0);
    CHECK_THROWS_AS(EvalCounter(0), InvalidArgument);
}
