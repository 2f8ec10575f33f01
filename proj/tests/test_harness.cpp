#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "ensde/harness.hpp"

using namespace ensde;
using namespace ensde::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("ensde_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string config_error(const std::vector<std::string>& args)
{
    try {
        parse_config(args);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::vector<std::string> lines_of(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

ExperimentPlan tiny_plan(const fs::path& out)
{
    auto plan = parse_config({"--algorithm", "de,de+dt", "--function", "sphere,ackley", "--runs", "3", "--tmax", "30",
                              "--out", out.string()})
                    .plan;
    return plan;
}

bool same_except_time(const RunRecord& a, const RunRecord& b)
{
    return a.algorithm == b.algorithm && a.function == b.function && a.dimension == b.dimension &&
           a.run_index == b.run_index && a.seed == b.seed && a.best_fitness == b.best_fitness &&
           a.evaluations == b.evaluations;
}

} // namespace

TEST_CASE("defaults reproduce the full experiment")
{
    const auto cmd = parse_config({});
    CHECK_FALSE(cmd.help.has_value());
    const auto& p = cmd.plan;
    CHECK(p.de_params.amplification_f == 0.5);
    CHECK(p.de_params.crossover_cr == 0.9);
    CHECK(p.de_params.population_np == 10);
    CHECK(p.dimension() == 10);
    CHECK(p.de_params.max_generations == 1000);
    CHECK(p.budget == 10000);
    CHECK(p.repetitions == 25);
    CHECK(p.algorithms.size() == 6);
    CHECK(p.functions.size() == 5);
    CHECK(p.regressor(RegressorType::rf).n_estimators == 40);
    CHECK(enumerate_cells(p).size() == 750);
}

TEST_CASE("filters and overrides")
{
    const auto p = parse_config({"--algorithm", "de+rf", "--function", "sphere", "--runs", "5"}).plan;
    REQUIRE(p.algorithms.size() == 1);
    CHECK(p.algorithms[0] == Algorithm::de_rf);
    CHECK(p.functions == std::vector<FunctionId>{FunctionId::sphere});
    CHECK(enumerate_cells(p).size() == 5);

    const auto q = parse_config({"--algorithm", "de", "--algorithm", "de+lm,de+gb", "--np", "20", "--tmax", "50",
                                 "--estimators", "7", "--lm-alpha", "0.5", "--dim", "4"})
                       .plan;
    CHECK(q.algorithms.size() == 3);
    CHECK(q.budget == 1000);
    CHECK(q.dimension() == 4);
    CHECK(q.regressor(RegressorType::rf).n_estimators == 7);
    CHECK(q.regressor(RegressorType::ext).n_estimators == 7);
    CHECK(q.regressor(RegressorType::lm).ridge_alpha == 0.5);

    CHECK(parse_config({"--tmax", "50", "--budget", "123"}).plan.budget == 123);
    const auto r = parse_config({"--algorithm", "de", "--function", "sphere", "--replay-seed", "99", "--replay-run", "4"}).plan;
    CHECK(r.replay_seed == 99u);
    CHECK(r.replay_run == 4);
    CHECK(parse_config({"--help"}).help.has_value());
}

TEST_CASE("errors name the offending key")
{
    CHECK(config_error({"--cr", "1.5"}).rfind("cr:", 0) == 0);
    CHECK(config_error({"--f", "3"}).rfind("f:", 0) == 0);
    CHECK(config_error({"--np", "4"}).rfind("np:", 0) == 0);
    CHECK(config_error({"--dim", "1"}).rfind("dim:", 0) == 0);
    CHECK(config_error({"--runs", "0"}).rfind("runs:", 0) == 0);
    CHECK(config_error({"--jobs", "0"}).rfind("jobs:", 0) == 0);
    CHECK(config_error({"--budget", "3"}).rfind("budget:", 0) == 0);
    CHECK(config_error({"--algorithm", "pso"}).rfind("algorithm:", 0) == 0);
    CHECK(config_error({"--function", "schwefel"}).rfind("function:", 0) == 0);
    CHECK(config_error({"--estimators", "0"}).rfind("estimators:", 0) == 0);
    CHECK(config_error({"--cr", "abc"}).find("cr") != std::string::npos);
    CHECK(config_error({"--bogus", "1"}).find("bogus") != std::string::npos);
    CHECK(config_error({"--replay-seed", "5"}).rfind("replay-seed:", 0) == 0);
    CHECK(config_error({"--algorithm", "de", "--function", "sphere", "--replay-run", "-1"}).rfind("replay-run:", 0) == 0);
}

TEST_CASE("config file sits between defaults and flags")
{
    const fs::path dir = scratch("config");
    {
        std::ofstream cfg(dir / "plan.cfg");
        cfg << "# reduced run\nalgorithm = de,de+lm\nfunction = rastrigin\ncr = 0.3\nnp = 12\nruns = 4\n";
    }
    const auto p = parse_config({"--config", (dir / "plan.cfg").string(), "--np", "14"}).plan;
    CHECK(p.algorithms.size() == 2);
    CHECK(p.functions == std::vector<FunctionId>{FunctionId::rastrigin});
    CHECK(p.de_params.crossover_cr == 0.3);
    CHECK(p.de_params.population_np == 14);
    CHECK(p.repetitions == 4);
    CHECK(p.budget == 14000);

    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "crossover = 0.3\n";
    }
    CHECK(config_error({"--config", (dir / "bad.cfg").string()}).find("crossover") != std::string::npos);
    {
        std::ofstream cfg(dir / "range.cfg");
        cfg << "cr = 2\n";
    }
    CHECK(config_error({"--config", (dir / "range.cfg").string()}).rfind("cr:", 0) == 0);
}

TEST_CASE("cell seeds")
{
    auto plan = parse_config({}).plan;
    const auto cells = enumerate_cells(plan);
    std::set<std::uint64_t> seeds;
    for (const auto& c : cells) {
        CHECK(c.seed == (plan.base_seed ^ stable_hash(c.algorithm, c.function, c.run)));
        seeds.insert(c.seed);
    }
    CHECK(seeds.size() == cells.size());
    CHECK(cells.front().algorithm == Algorithm::de);
    CHECK(cells[1].run == 1);

    // Seeds depend only on the cell, not on what else the plan contains.
    auto narrow = plan;
    narrow.algorithms = {Algorithm::de_gb};
    for (const auto& c : enumerate_cells(narrow))
        CHECK(c.seed == cell_seed(plan.base_seed, Algorithm::de_gb, c.function, c.run));
    CHECK(stable_hash(Algorithm::de, FunctionId::sphere, 0) == stable_hash(Algorithm::de, FunctionId::sphere, 0));
    CHECK(stable_hash(Algorithm::de, FunctionId::sphere, 0) != stable_hash(Algorithm::de, FunctionId::sphere, 1));
}

TEST_CASE("execution is independent of the thread count")
{
    auto plan = tiny_plan(scratch("threads"));
    std::vector<RunRecord> streamed;
    const auto serial = execute_plan(plan, [&](const RunRecord& r) { streamed.push_back(r); });
    plan.jobs = 3;
    std::vector<RunRecord> streamed_parallel;
    const auto parallel = execute_plan(plan, [&](const RunRecord& r) { streamed_parallel.push_back(r); });

    REQUIRE(serial.records.size() == 12);
    REQUIRE(parallel.records.size() == 12);
    REQUIRE(streamed_parallel.size() == 12);
    const auto cells = enumerate_cells(plan);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(same_except_time(serial.records[i], parallel.records[i]));
        CHECK(same_except_time(serial.records[i], streamed[i]));
        CHECK(same_except_time(parallel.records[i], streamed_parallel[i]));
        CHECK(serial.records[i].seed == cells[i].seed);
        CHECK(serial.records[i].evaluations == 300);
    }
    CHECK(serial.failures.empty());
}

TEST_CASE("replay reproduces a recorded run")
{
    auto plan = tiny_plan(scratch("replay"));
    const auto report = execute_plan(plan);
    for (const auto& r : report.records) {
        auto single = plan;
        single.algorithms = {algorithm_from_token(r.algorithm)};
        single.functions = {function_from_token(r.function)};
        const auto again = replay(single, r.seed, r.run_index);
        CHECK(same_except_time(again, r));
    }
    CHECK_THROWS_AS(replay(plan, 1), ConfigError);
}

TEST_CASE("failures are isolated per cell")
{
    auto plan = tiny_plan(scratch("failures"));
    plan.algorithms = {Algorithm::de, Algorithm::de_lm};
    plan.regressors.erase(RegressorType::lm);
    const auto report = execute_plan(plan);
    CHECK(report.records.size() == 6);
    CHECK(report.failures.size() == 6);
    for (const auto& f : report.failures)
        CHECK(f.cell.algorithm == Algorithm::de_lm);

    const auto files = write_outputs(report, plan);
    CHECK(fs::exists(files.failures));
    CHECK(lines_of(files.failures).size() == 7);
    CHECK(lines_of(files.friedman).back().find("skipped") != std::string::npos);
}

TEST_CASE("outputs")
{
    const fs::path dir = scratch("outputs");
    auto plan = tiny_plan(dir);
    const auto report = execute_plan(plan);
    const auto files = write_outputs(report, plan);

    const auto runs = lines_of(files.runs);
    REQUIRE(runs.size() == 13);
    CHECK(runs[0] == kRunsHeader);
    const auto summary = lines_of(files.summary);
    REQUIRE(summary.size() == 5);
    CHECK(summary[0] == kSummaryHeader);
    for (const fs::path& p : {files.friedman, files.ranks, files.cd_svg, files.cd_text})
        CHECK(fs::file_size(p) > 0);
    CHECK(files.failures.empty());
    CHECK(lines_of(files.friedman).front() == "base_seed = " + std::to_string(plan.base_seed));

    // runs.csv round-trips and regenerates summary.csv exactly.
    const auto back = read_runs_csv(files.runs);
    REQUIRE(back.size() == report.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(same_except_time(back[i], report.records[i]));
        CHECK(back[i].wall_time_ms == report.records[i].wall_time_ms);
    }
    ExecutionReport reread{back, {}};
    auto again = plan;
    again.output_dir = dir / "again";
    const auto files2 = write_outputs(reread, again);
    CHECK(lines_of(files2.summary) == summary);
    CHECK(lines_of(files2.friedman) == lines_of(files.friedman));
}

TEST_CASE("a cell with one run is reported, not fatal")
{
    const fs::path dir = scratch("single");
    auto plan = tiny_plan(dir);
    plan.repetitions = 1;
    const auto report = execute_plan(plan);
    const auto files = write_outputs(report, plan);
    const auto summary = lines_of(files.summary);
    REQUIRE(summary.size() == 5);
    for (std::size_t i = 1; i < summary.size(); ++i)
        CHECK(summary[i].find("needs at least 2 completed runs") != std::string::npos);
}

TEST_CASE("unwritable output directory")
{
    const fs::path dir = scratch("blocked");
    std::ofstream(dir / "file") << "x";
    auto plan = tiny_plan(dir / "file" / "sub");
    plan.repetitions = 2;
    const auto report = execute_plan(plan);
    CHECK_THROWS(write_outputs(report, plan));
}

TEST_CASE("number formatting round-trips")
{
    RngStream rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(rng.uniform(-1.0, 1.0), rng.index(200) - 100);
        const std::string s = format_real(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find('e') != std::string::npos);
    }
    CHECK(format_real(0.0) == "0.0000000000000000e+00");
}
