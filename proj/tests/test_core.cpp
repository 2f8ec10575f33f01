#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "ensde/core.hpp"

using namespace ensde;

namespace {

std::string message_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const InvalidArgument& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("bounds reject an empty box")
{
    CHECK_THROWS_AS(Bounds<double>(1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Bounds<double>(2.0, -2.0), InvalidArgument);
    Bounds<double> b(-3.0, 5.0);
    CHECK(b.width() == 8.0);
}

TEST_CASE("clamp_to_bounds")
{
    Bounds<double> b(-1.0, 1.0);
    RealVector v(4);
    v << -5.0, -0.25, 0.5, 7.0;
    const RealVector c = clamp_to_bounds(v, b);
    CHECK(c[0] == -1.0);
    CHECK(c[1] == -0.25);
    CHECK(c[2] == 0.5);
    CHECK(c[3] == 1.0);
    CHECK(b.contains(c));
    CHECK_FALSE(b.contains(v));

    Bounds<float> bf(0.0f, 2.0f);
    Vector<float> vf(2);
    vf << -1.0f, 3.0f;
    const Vector<float> cf = clamp_to_bounds(vf, bf);
    CHECK(cf[0] == 0.0f);
    CHECK(cf[1] == 2.0f);
}

TEST_CASE("DeParams validation names the field")
{
    DeParams p;
    CHECK_NOTHROW(p.validate());

    auto with = [](auto mutate) {
        DeParams q;
        mutate(q);
        return message_of([&] { q.validate(); });
    };
    CHECK(with([](DeParams& q) { q.crossover_cr = 1.5; }).rfind("cr:", 0) == 0);
    CHECK(with([](DeParams& q) { q.crossover_cr = -0.1; }).rfind("cr:", 0) == 0);
    CHECK(with([](DeParams& q) { q.amplification_f = 0.05; }).rfind("f:", 0) == 0);
    CHECK(with([](DeParams& q) { q.amplification_f = 1.2; }).rfind("f:", 0) == 0);
    CHECK(with([](DeParams& q) { q.population_np = 5; }).rfind("np:", 0) == 0);
    CHECK(with([](DeParams& q) { q.dimension_d = 0; }).rfind("dim:", 0) == 0);
    CHECK(with([](DeParams& q) { q.max_generations = 0; }).rfind("tmax:", 0) == 0);

    DeParams edge;
    edge.crossover_cr = 0.0;
    edge.amplification_f = 0.1;
    edge.population_np = 6;
    CHECK_NOTHROW(edge.validate());
    edge.crossover_cr = 1.0;
    edge.amplification_f = 1.0;
    CHECK_NOTHROW(edge.validate());
}

TEST_CASE("RngStream is reproducible and in range")
{
    RngStream a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        differs = differs || u != c.uniform();
    }
    CHECK(differs);
    CHECK(a.seed() == 42);
}

TEST_CASE("RngStream::index covers its range roughly uniformly")
{
    RngStream rng(7);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const int k = rng.index(7);
        REQUIRE(k >= 0);
        REQUIRE(k < 7);
        ++counts[static_cast<std::size_t>(k)];
    }
    for (int c : counts)
        CHECK(std::abs(c - draws / 7) < 500);
    CHECK_THROWS_AS(rng.index(0), InvalidArgument);
}

TEST_CASE("init_population")
{
    DeParams p;
    p.population_np = 12;
    p.dimension_d = 6;
    Bounds<double> b(-15.0, 15.0);
    RngStream rng(1);
    const Population pop = init_population(p, b, rng);
    CHECK(pop.size() == 12);
    CHECK(pop.dimension() == 6);
    CHECK(pop.generation == 0);
    for (const auto& m : pop.members) {
        CHECK(b.contains(m.position));
        CHECK_FALSE(m.evaluated());
    }
    p.population_np = 3;
    CHECK_THROWS_AS(init_population(p, b, rng), InvalidArgument);
}

TEST_CASE("best_index picks the lowest fitness and the lowest index on ties")
{
    Population pop;
    for (double f : {3.0, 1.0, 2.0, 1.0}) {
        Individual ind{RealVector::Zero(2), f};
        pop.members.push_back(ind);
    }
    CHECK(pop.best_index() == 1);
    pop.members[2].fitness.reset();
    CHECK_THROWS_AS(pop.best_index(), InvalidArgument);
}

TEST_CASE("sample_distinct_indices")
{
    RngStream rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const int exclude = trial % 10;
        const auto idx = sample_distinct_indices(5, exclude, 10, rng);
        REQUIRE(idx.size() == 5);
        std::set<int> seen(idx.begin(), idx.end());
        CHECK(seen.size() == 5);
        CHECK(seen.count(exclude) == 0);
        for (int i : idx) {
            CHECK(i >= 0);
            CHECK(i < 10);
        }
    }
    // Exactly enough members: the sample is a permutation of everyone else.
    const auto all = sample_distinct_indices(9, 4, 10, rng);
    std::set<int> seen(all.begin(), all.end());
    CHECK(seen.size() == 9);
    CHECK(seen.count(4) == 0);
    CHECK_THROWS_AS(sample_distinct_indices(10, 0, 10, rng), InvalidArgument);
}
