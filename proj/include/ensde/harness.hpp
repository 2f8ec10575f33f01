#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ensde/engine.hpp"
#include "ensde/stats.hpp"

namespace ensde::harness {

class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct ExperimentPlan {
    std::vector<Algorithm> algorithms{kAllAlgorithms.begin(), kAllAlgorithms.end()};
    std::vector<FunctionId> functions{kAllFunctions.begin(), kAllFunctions.end()};
    int repetitions = 25;
    std::uint64_t base_seed = 20130702;
    DeParams de_params;       // dimension lives in de_params.dimension_d
    long budget = 10000;      // total objective evaluations per run
    std::map<RegressorType, RegressorSpec> regressors;
    std::filesystem::path output_dir = "results";
    int jobs = 1;
    std::optional<std::uint64_t> replay_seed;
    int replay_run = 0; // run index reported for the replayed row

    /// F=0.5, CR=0.9, NP=10, D=10, 1000 generations, 10,000 evaluations,
    /// 25 repetitions, all six algorithms on all five functions.
    static ExperimentPlan reference_defaults();

    int dimension() const { return de_params.dimension_d; }
    const RegressorSpec& regressor(RegressorType type) const;
    void validate() const;
};

struct ParsedCommand {
    ExperimentPlan plan;
    std::optional<std::string> help; // set when --help was requested
};

/// Command-line flags override config-file values, which override defaults.
/// Throws ConfigError naming the offending key.
ParsedCommand parse_config(const std::vector<std::string>& args);

struct Cell {
    Algorithm algorithm;
    FunctionId function;
    int run;
    std::uint64_t seed;
};

/// FNV-1a over "algorithm|function|run" with a splitmix64 finalizer.
std::uint64_t stable_hash(Algorithm algorithm, FunctionId function, int run);

/// base_seed XOR stable_hash(algorithm, function, run).
std::uint64_t cell_seed(std::uint64_t base_seed, Algorithm algorithm, FunctionId function, int run);

/// Cells in algorithm-major, then function, then repetition order.
std::vector<Cell> enumerate_cells(const ExperimentPlan& plan);

RunConfig make_run_config(const ExperimentPlan& plan, Algorithm algorithm, FunctionId function, std::uint64_t seed);

struct RunRecord {
    std::string algorithm;
    std::string function;
    int dimension = 0;
    int run_index = 0;
    std::uint64_t seed = 0;
    double best_fitness = 0.0;
    long evaluations = 0;
    long wall_time_ms = 0;
};

struct CellFailure {
    Cell cell;
    std::string message;
};

struct ExecutionReport {
    std::vector<RunRecord> records; // plan order
    std::vector<CellFailure> failures;
};

/// Runs one cell; throws whatever the engine throws.
RunRecord execute_cell(const ExperimentPlan& plan, const Cell& cell);

/// Runs every cell on up to plan.jobs threads. `on_record` sees completed
/// records in plan order, from a single thread at a time.
ExecutionReport execute_plan(const ExperimentPlan& plan,
                             const std::function<void(const RunRecord&)>& on_record = {});

/// Re-runs a single cell of a one-algorithm, one-function plan from its seed.
RunRecord replay(const ExperimentPlan& plan, std::uint64_t seed, int run_index = 0);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr const char* kRunsHeader = "algorithm,function,dimension,run,seed,best_fitness,evaluations,wall_time_ms";
inline constexpr const char* kSummaryHeader = "algorithm,function,dimension,runs,best,worst,mean,median,stdev,note";

/// Scientific notation with 17 significant digits (round-trips exactly).
std::string format_real(double v);

std::string format_run_row(const RunRecord& r);
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

/// Streams runs.csv rows as they arrive.
class RunsCsvWriter {
public:
    explicit RunsCsvWriter(const std::filesystem::path& path);
    void append(const RunRecord& record);

private:
    std::filesystem::path path_;
};

struct CellSummary {
    std::string algorithm;
    std::string function;
    int dimension = 0;
    int runs = 0;
    std::optional<stats::SummaryStats> stats;
    std::string note;
};

/// One entry per (algorithm, function) of the plan, in plan order.
std::vector<CellSummary> summarize(const std::vector<RunRecord>& records, const ExperimentPlan& plan);

/// Mean-value matrix over the plan; empty when some cell lacks a summary.
std::optional<stats::ResultsMatrix> results_matrix(const std::vector<CellSummary>& summaries,
                                                   const ExperimentPlan& plan);

struct OutputFiles {
    std::filesystem::path runs, summary, friedman, ranks, cd_svg, cd_text, failures;
};

/// Writes runs.csv, summary.csv, friedman.txt, ranks.csv, cd_diagram.svg and
/// cd_diagram.txt (plus failures.csv when any cell failed) into plan.output_dir.
OutputFiles write_outputs(const ExecutionReport& report, const ExperimentPlan& plan);

} // namespace ensde::harness
