#include <iostream>
#include <string>
#include <vector>

#include "ensde/harness.hpp"

using namespace ensde;

int main(int argc, char** argv)
{
    harness::ParsedCommand command;
    try {
        command = harness::parse_config(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    if (command.help) {
        std::cout << *command.help;
        return 0;
    }
    const auto& plan = command.plan;

    try {
        if (plan.replay_seed) {
            const auto record = harness::replay(plan, *plan.replay_seed, plan.replay_run);
            std::cout << harness::kRunsHeader << '\n' << harness::format_run_row(record) << '\n';
            return 0;
        }

        const auto cells = harness::enumerate_cells(plan);
        std::cerr << "running " << cells.size() << " runs on " << plan.jobs << " thread(s), output in "
                  << plan.output_dir.string() << '\n';
        harness::RunsCsvWriter stream(plan.output_dir / "runs.csv");
        std::size_t done = 0;
        auto report = harness::execute_plan(plan, [&](const harness::RunRecord& r) {
            stream.append(r);
            ++done;
            std::cerr << '[' << done << '/' << cells.size() << "] " << r.algorithm << ' ' << r.function << " run "
                      << r.run_index << " best " << harness::format_real(r.best_fitness) << '\n';
        });
        const auto files = harness::write_outputs(report, plan);
        std::cerr << "wrote " << files.summary.string() << " and " << files.friedman.string() << '\n';
        if (!report.failures.empty()) {
            std::cerr << report.failures.size() << " run(s) failed, see " << files.failures.string() << '\n';
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
