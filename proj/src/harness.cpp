#include "ensde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace ensde::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Plan

ExperimentPlan ExperimentPlan::reference_defaults()
{
    ExperimentPlan plan;
    plan.de_params = DeParams{0.5, 0.9, 10, 10, 1000};
    plan.budget = 10000;
    for (auto a : kAllAlgorithms)
        if (auto type = regressor_for(a))
            plan.regressors[*type] = RegressorSpec::defaults(*type);
    return plan;
}

const RegressorSpec& ExperimentPlan::regressor(RegressorType type) const
{
    const auto it = regressors.find(type);
    if (it == regressors.end())
        throw ConfigError("regressor: no settings for '" + std::string(to_token(type)) + "'");
    return it->second;
}

void ExperimentPlan::validate() const
{
    try {
        de_params.validate();
        if (dimension() < 2)
            throw InvalidArgument("dim: benchmark dimension must be at least 2, got " + std::to_string(dimension()));
        for (const auto& [type, spec] : regressors)
            spec.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (algorithms.empty())
        throw ConfigError("algorithm: at least one algorithm is required");
    if (functions.empty())
        throw ConfigError("function: at least one function is required");
    if (repetitions < 1)
        throw ConfigError("runs: must be positive, got " + std::to_string(repetitions));
    if (budget < de_params.population_np)
        throw ConfigError("budget: must be at least np (" + std::to_string(de_params.population_np) + "), got " +
                          std::to_string(budget));
    if (jobs < 1)
        throw ConfigError("jobs: must be positive, got " + std::to_string(jobs));
    if (replay_run < 0)
        throw ConfigError("replay-run: must be non-negative, got " + std::to_string(replay_run));
    if (replay_seed && (algorithms.size() != 1 || functions.size() != 1))
        throw ConfigError("replay-seed: requires exactly one --algorithm and one --function");
}

namespace {

std::vector<std::string> split_tokens(const std::vector<std::string>& raw)
{
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string token;
        while (std::getline(ss, token, ','))
            if (!token.empty())
                out.push_back(token);
    }
    return out;
}

} // namespace

ParsedCommand parse_config(const std::vector<std::string>& args)
{
    ExperimentPlan plan = ExperimentPlan::reference_defaults();

    CLI::App app{"Ensemble-strategy differential evolution with regression-blended trial vectors"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Flat key = value file mirroring the long flags");

    std::vector<std::string> algorithms;
    std::vector<std::string> functions;
    int dim = plan.de_params.dimension_d;
    std::optional<long> budget;
    std::optional<int> estimators;
    std::optional<int> max_features;
    std::optional<int> gb_stages;
    std::optional<double> gb_rate;
    std::optional<int> gb_depth;
    std::optional<double> lm_alpha;
    std::optional<std::uint64_t> replay_seed;
    std::string out = plan.output_dir.string();

    app.add_option("--algorithm", algorithms, "Algorithms: de, de+rf, de+ext, de+gb, de+dt, de+lm (comma separated)");
    app.add_option("--function", functions, "Functions: rosenbrock, rastrigin, sphere, griewangk, ackley");
    app.add_option("--dim", dim, "Problem dimension D");
    app.add_option("--np", plan.de_params.population_np, "Population size NP");
    app.add_option("--f", plan.de_params.amplification_f, "Amplification factor F");
    app.add_option("--cr", plan.de_params.crossover_cr, "Crossover rate CR");
    app.add_option("--tmax", plan.de_params.max_generations, "Maximum number of generations");
    app.add_option("--budget", budget, "Objective evaluations per run (default NP * tmax)");
    app.add_option("--runs", plan.repetitions, "Repetitions per (algorithm, function) cell");
    app.add_option("--seed", plan.base_seed, "Base seed");
    app.add_option("--estimators", estimators, "Trees per forest for rf and ext");
    app.add_option("--max-features", max_features, "Candidate features per split for rf and ext (0 = all)");
    app.add_option("--gb-stages", gb_stages, "Boosting stages for gb");
    app.add_option("--gb-rate", gb_rate, "Learning rate for gb");
    app.add_option("--gb-depth", gb_depth, "Tree depth for gb");
    app.add_option("--lm-alpha", lm_alpha, "Ridge penalty for lm");
    app.add_option("--jobs", plan.jobs, "Worker threads");
    app.add_option("--out", out, "Output directory");
    app.add_option("--replay-seed", replay_seed, "Re-run a single cell from its recorded seed");
    app.add_option("--replay-run", plan.replay_run, "Run index to report for --replay-seed");

    std::vector<std::string> argv_store{"ensde"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        return {plan, app.help()};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    try {
        if (!algorithms.empty()) {
            plan.algorithms.clear();
            for (const auto& t : split_tokens(algorithms))
                plan.algorithms.push_back(algorithm_from_token(t));
        }
        if (!functions.empty()) {
            plan.functions.clear();
            for (const auto& t : split_tokens(functions))
                plan.functions.push_back(function_from_token(t));
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    plan.de_params.dimension_d = dim;
    plan.budget = budget ? *budget : static_cast<long>(plan.de_params.population_np) * plan.de_params.max_generations;
    if (estimators) {
        plan.regressors[RegressorType::rf].n_estimators = *estimators;
        plan.regressors[RegressorType::ext].n_estimators = *estimators;
    }
    if (max_features) {
        plan.regressors[RegressorType::rf].max_features = *max_features;
        plan.regressors[RegressorType::ext].max_features = *max_features;
    }
    if (gb_stages)
        plan.regressors[RegressorType::gb].n_estimators = *gb_stages;
    if (gb_rate)
        plan.regressors[RegressorType::gb].learning_rate = *gb_rate;
    if (gb_depth)
        plan.regressors[RegressorType::gb].max_depth = *gb_depth;
    if (lm_alpha)
        plan.regressors[RegressorType::lm].ridge_alpha = *lm_alpha;
    plan.replay_seed = replay_seed;
    plan.output_dir = out;

    plan.validate();
    return {plan, std::nullopt};
}

// ---------------------------------------------------------------------------
// Seeding and execution

std::uint64_t stable_hash(Algorithm algorithm, FunctionId function, int run)
{
    const std::string key =
        std::string(to_token(algorithm)) + "|" + std::string(to_token(function)) + "|" + std::to_string(run);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

std::uint64_t cell_seed(std::uint64_t base_seed, Algorithm algorithm, FunctionId function, int run)
{
    return base_seed ^ stable_hash(algorithm, function, run);
}

std::vector<Cell> enumerate_cells(const ExperimentPlan& plan)
{
    std::vector<Cell> cells;
    for (Algorithm a : plan.algorithms)
        for (FunctionId f : plan.functions)
            for (int r = 0; r < plan.repetitions; ++r)
                cells.push_back({a, f, r, cell_seed(plan.base_seed, a, f, r)});
    return cells;
}

RunConfig make_run_config(const ExperimentPlan& plan, Algorithm algorithm, FunctionId function, std::uint64_t seed)
{
    RunConfig config = RunConfig::make(algorithm, function, plan.de_params, seed);
    config.budget = plan.budget;
    if (auto type = regressor_for(algorithm))
        config.regressor = plan.regressor(*type);
    return config;
}

RunRecord execute_cell(const ExperimentPlan& plan, const Cell& cell)
{
    const RunConfig config = make_run_config(plan, cell.algorithm, cell.function, cell.seed);
    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(config);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!std::isfinite(result.best_fitness))
        throw std::runtime_error("run produced a non-finite best fitness");
    return {std::string(to_token(cell.algorithm)),
            std::string(to_token(cell.function)),
            plan.dimension(),
            cell.run,
            cell.seed,
            result.best_fitness,
            result.evaluations_used,
            static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count())};
}

ExecutionReport execute_plan(const ExperimentPlan& plan, const std::function<void(const RunRecord&)>& on_record)
{
    plan.validate();
    const std::vector<Cell> cells = enumerate_cells(plan);

    std::vector<std::optional<RunRecord>> records(cells.size());
    std::vector<std::optional<std::string>> errors(cells.size());
    std::vector<bool> done(cells.size(), false);
    std::size_t next_to_emit = 0;
    std::mutex mutex;
    std::atomic<std::size_t> next_cell{0};

    auto worker = [&] {
        for (std::size_t i = next_cell++; i < cells.size(); i = next_cell++) {
            std::optional<RunRecord> record;
            std::optional<std::string> error;
            try {
                record = execute_cell(plan, cells[i]);
            } catch (const std::exception& e) {
                error = e.what();
            }
            std::lock_guard lock(mutex);
            records[i] = std::move(record);
            errors[i] = std::move(error);
            done[i] = true;
            // Emit the contiguous finished prefix so the stream stays in plan order.
            while (next_to_emit < cells.size() && done[next_to_emit]) {
                if (on_record && records[next_to_emit])
                    on_record(*records[next_to_emit]);
                ++next_to_emit;
            }
        }
    };

    const int threads = std::max(1, std::min<int>(plan.jobs, static_cast<int>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }

    ExecutionReport report;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (records[i])
            report.records.push_back(std::move(*records[i]));
        else
            report.failures.push_back({cells[i], errors[i].value_or("unknown failure")});
    }
    return report;
}

RunRecord replay(const ExperimentPlan& plan, std::uint64_t seed, int run_index)
{
    if (plan.algorithms.size() != 1 || plan.functions.size() != 1)
        throw ConfigError("replay-seed: requires exactly one --algorithm and one --function");
    return execute_cell(plan, {plan.algorithms.front(), plan.functions.front(), run_index, seed});
}

// ---------------------------------------------------------------------------
// Persistence

std::string format_real(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    return {buf, res.ptr};
}

std::string format_run_row(const RunRecord& r)
{
    std::ostringstream out;
    out << r.algorithm << ',' << r.function << ',' << r.dimension << ',' << r.run_index << ',' << r.seed << ','
        << format_real(r.best_fitness) << ',' << r.evaluations << ',' << r.wall_time_ms;
    return out.str();
}

namespace {

template <typename T>
T parse_number(const std::string& s, const char* field)
{
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(std::string("runs.csv: cannot parse ") + field + " from '" + s + "'");
    return value;
}

std::ofstream open_for_write(const fs::path& path, std::ios::openmode mode = std::ios::trunc)
{
    std::ofstream out(path, std::ios::out | mode);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

std::vector<RunRecord> read_runs_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kRunsHeader)
        throw ConfigError("runs.csv: unexpected header in " + path.string());
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            f.push_back(field);
        if (f.size() != 8)
            throw ConfigError("runs.csv: expected 8 fields in '" + line + "'");
        out.push_back({f[0], f[1], parse_number<int>(f[2], "dimension"), parse_number<int>(f[3], "run"),
                       parse_number<std::uint64_t>(f[4], "seed"), parse_number<double>(f[5], "best_fitness"),
                       parse_number<long>(f[6], "evaluations"), parse_number<long>(f[7], "wall_time_ms")});
    }
    return out;
}

RunsCsvWriter::RunsCsvWriter(const fs::path& path) : path_(path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    auto out = open_for_write(path_);
    out << kRunsHeader << '\n';
}

void RunsCsvWriter::append(const RunRecord& record)
{
    auto out = open_for_write(path_, std::ios::app);
    out << format_run_row(record) << '\n';
}

std::vector<CellSummary> summarize(const std::vector<RunRecord>& records, const ExperimentPlan& plan)
{
    std::vector<CellSummary> out;
    for (Algorithm a : plan.algorithms) {
        for (FunctionId f : plan.functions) {
            CellSummary cell{std::string(to_token(a)), std::string(to_token(f)), plan.dimension(), 0, std::nullopt, ""};
            std::vector<double> values;
            for (const auto& r : records)
                if (r.algorithm == cell.algorithm && r.function == cell.function)
                    values.push_back(r.best_fitness);
            cell.runs = static_cast<int>(values.size());
            try {
                cell.stats = stats::summarize_runs(values);
            } catch (const InvalidArgument&) {
                cell.note = "needs at least 2 completed runs";
            }
            out.push_back(std::move(cell));
        }
    }
    return out;
}

std::optional<stats::ResultsMatrix> results_matrix(const std::vector<CellSummary>& summaries,
                                                   const ExperimentPlan& plan)
{
    stats::ResultsMatrix m;
    for (Algorithm a : plan.algorithms)
        m.algorithms.emplace_back(to_token(a));
    for (FunctionId f : plan.functions)
        m.functions.emplace_back(to_token(f));
    m.mean_values.resize(static_cast<Eigen::Index>(m.algorithms.size()), static_cast<Eigen::Index>(m.functions.size()));
    std::size_t i = 0;
    for (std::size_t a = 0; a < m.algorithms.size(); ++a)
        for (std::size_t f = 0; f < m.functions.size(); ++f, ++i) {
            if (i >= summaries.size() || !summaries[i].stats)
                return std::nullopt;
            m.mean_values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) = summaries[i].stats->mean;
        }
    return m;
}

OutputFiles write_outputs(const ExecutionReport& report, const ExperimentPlan& plan)
{
    const fs::path dir = plan.output_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    OutputFiles files{dir / "runs.csv",  dir / "summary.csv",     dir / "friedman.txt", dir / "ranks.csv",
                      dir / "cd_diagram.svg", dir / "cd_diagram.txt", {}};
    {
        auto out = open_for_write(files.runs);
        out << kRunsHeader << '\n';
        for (const auto& r : report.records)
            out << format_run_row(r) << '\n';
    }

    const auto summaries = summarize(report.records, plan);
    {
        auto out = open_for_write(files.summary);
        out << kSummaryHeader << '\n';
        for (const auto& s : summaries) {
            out << s.algorithm << ',' << s.function << ',' << s.dimension << ',' << s.runs << ',';
            if (s.stats)
                out << format_real(s.stats->best) << ',' << format_real(s.stats->worst) << ','
                    << format_real(s.stats->mean) << ',' << format_real(s.stats->median) << ','
                    << format_real(s.stats->stdev) << ',';
            else
                out << ",,,,,";
            out << s.note << '\n';
        }
    }

    {
        auto out = open_for_write(files.friedman);
        out << "base_seed = " << plan.base_seed << "\n";
        const auto matrix = results_matrix(summaries, plan);
        if (!matrix) {
            out << "Friedman analysis skipped: some cells have fewer than 2 completed runs\n";
        } else if (matrix->algorithms.size() < 2 || matrix->algorithms.size() > 10) {
            out << "Friedman analysis skipped: needs between 2 and 10 algorithms\n";
        } else {
            const auto table = stats::friedman_ranks(*matrix);
            const auto outcome = stats::friedman_analysis(*matrix, 0.05);
            out << stats::format_friedman_report(outcome, table, *matrix);

            auto ranks = open_for_write(files.ranks);
            ranks << "algorithm";
            for (const auto& f : matrix->functions)
                ranks << ',' << f;
            ranks << ",average_rank\n";
            for (std::size_t a = 0; a < matrix->algorithms.size(); ++a) {
                ranks << matrix->algorithms[a];
                for (Eigen::Index f = 0; f < table.ranks.cols(); ++f)
                    ranks << ',' << format_real(table.ranks(static_cast<Eigen::Index>(a), f));
                ranks << ',' << format_real(table.average_ranks[static_cast<Eigen::Index>(a)]) << '\n';
            }
            open_for_write(files.cd_svg) << stats::render_cd_diagram_svg(outcome);
            open_for_write(files.cd_text) << stats::render_cd_diagram_text(outcome);
        }
    }

    if (!report.failures.empty()) {
        files.failures = dir / "failures.csv";
        auto out = open_for_write(files.failures);
        out << "algorithm,function,run,seed,message\n";
        for (const auto& f : report.failures) {
            std::string msg = f.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            out << to_token(f.cell.algorithm) << ',' << to_token(f.cell.function) << ',' << f.cell.run << ','
                << f.cell.seed << ',' << msg << '\n';
        }
    }
    return files;
}

} // namespace ensde::harness
