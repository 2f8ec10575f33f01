#pragma once

#include <span>
#include <string>
#include <vector>

#include "ensde/core.hpp"

namespace ensde::stats {

/// Per-cell summary in the order Best, Worst, Mean, Median, StDev.
struct SummaryStats {
    double best = 0.0;
    double worst = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double stdev = 0.0; // sample standard deviation (n - 1)
};

/// Requires at least two values.
SummaryStats summarize_runs(std::span<const double> values);

/// k algorithms by N functions, holding mean final fitness (lower is better).
struct ResultsMatrix {
    std::vector<std::string> algorithms;
    std::vector<std::string> functions;
    RealMatrix mean_values;

    void validate() const;
};

struct RankTable {
    RealMatrix ranks;          // k x N, rank 1 is best in each column
    RealVector average_ranks;  // length k
};

/// Ranks algorithms per function, averaging the positions of ties.
RankTable friedman_ranks(const ResultsMatrix& matrix);

/// Friedman chi-square from average ranks over n functions.
double friedman_statistic(const RealVector& average_ranks, int n);

/// Two-tailed Bonferroni-Dunn critical value q_alpha for k classifiers
/// (k in 2..10, alpha in {0.05, 0.10}).
double bonferroni_dunn_q(int k, double alpha);

/// CD = q_alpha * sqrt(k (k + 1) / (6 n)).
double bonferroni_dunn_cd(int k, int n, double alpha);

struct FriedmanOutcome {
    std::vector<std::string> labels;
    RealVector average_ranks;
    double statistic = 0.0;
    double critical_difference = 0.0;
    double alpha = 0.05;
    int functions = 0;

    /// |R_a - R_b| > CD.
    bool significantly_different(int a, int b) const;
};

FriedmanOutcome friedman_analysis(const ResultsMatrix& matrix, double alpha = 0.05);

/// Average ranks on a number line with CD-length intervals centred on each
/// rank; two intervals are disjoint exactly when the pair differs significantly.
std::string render_cd_diagram_svg(const FriedmanOutcome& outcome);
std::string render_cd_diagram_text(const FriedmanOutcome& outcome);

/// Human-readable report: ranks, statistic, CD and the significant pairs.
std::string format_friedman_report(const FriedmanOutcome& outcome, const RankTable& table,
                                   const ResultsMatrix& matrix);

} // namespace ensde::stats
