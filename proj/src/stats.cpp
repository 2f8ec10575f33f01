#include "ensde/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ensde::stats {

namespace {

std::string fixed(double v, int digits = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Algorithm indices sorted by average rank, then by label.
std::vector<int> rank_order(const FriedmanOutcome& o)
{
    std::vector<int> order(static_cast<std::size_t>(o.average_ranks.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return o.average_ranks[a] < o.average_ranks[b]; });
    return order;
}

} // namespace

SummaryStats summarize_runs(std::span<const double> values)
{
    if (values.size() < 2)
        throw InvalidArgument("summarize_runs: need at least two values, got " + std::to_string(values.size()));
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    SummaryStats s;
    s.best = sorted.front();
    s.worst = sorted.back();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    s.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    double ss = 0.0;
    for (double v : sorted)
        ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(n - 1));
    return s;
}

void ResultsMatrix::validate() const
{
    if (mean_values.rows() != static_cast<Eigen::Index>(algorithms.size()) ||
        mean_values.cols() != static_cast<Eigen::Index>(functions.size()))
        throw InvalidArgument("results matrix: shape does not match labels");
    if (algorithms.size() < 2)
        throw InvalidArgument("results matrix: need at least two algorithms");
    if (functions.empty())
        throw InvalidArgument("results matrix: need at least one function");
    if (!mean_values.allFinite())
        throw InvalidArgument("results matrix: entries must be finite");
}

RankTable friedman_ranks(const ResultsMatrix& matrix)
{
    matrix.validate();
    const Eigen::Index k = matrix.mean_values.rows();
    const Eigen::Index n = matrix.mean_values.cols();
    RankTable table;
    table.ranks.resize(k, n);

    std::vector<int> order(static_cast<std::size_t>(k));
    for (Eigen::Index f = 0; f < n; ++f) {
        const auto column = matrix.mean_values.col(f);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return column[a] < column[b]; });
        // Runs of equal values share the mean of the positions they occupy.
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i + 1;
            while (j < order.size() && column[order[j]] == column[order[i]])
                ++j;
            const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
            for (std::size_t t = i; t < j; ++t)
                table.ranks(order[t], f) = shared;
            i = j;
        }
    }
    table.average_ranks = table.ranks.rowwise().mean();
    return table;
}

double friedman_statistic(const RealVector& average_ranks, int n)
{
    const auto k = static_cast<double>(average_ranks.size());
    if (average_ranks.size() < 2)
        throw InvalidArgument("friedman_statistic: need k >= 2");
    if (n < 1)
        throw InvalidArgument("friedman_statistic: need n >= 1");
    return 12.0 * n / (k * (k + 1.0)) * (average_ranks.squaredNorm() - k * (k + 1.0) * (k + 1.0) / 4.0);
}

double bonferroni_dunn_q(int k, double alpha)
{
    // z quantiles at 1 - alpha / (2 (k - 1)), i.e. two-tailed with k - 1
    // comparisons against a control. Some published tables carry 2.724 for
    // k = 9 at alpha = 0.05; the quantile itself is 2.734.
    static constexpr std::array<double, 9> q05 = {1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.734, 2.773};
    static constexpr std::array<double, 9> q10 = {1.645, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539};
    if (k < 2 || k > 10)
        throw InvalidArgument("bonferroni_dunn: k must lie in 2..10, got " + std::to_string(k));
    const auto idx = static_cast<std::size_t>(k - 2);
    if (alpha == 0.05)
        return q05[idx];
    if (alpha == 0.10)
        return q10[idx];
    throw InvalidArgument("bonferroni_dunn: alpha must be 0.05 or 0.10");
}

double bonferroni_dunn_cd(int k, int n, double alpha)
{
    if (n < 1)
        throw InvalidArgument("bonferroni_dunn: n must be positive");
    return bonferroni_dunn_q(k, alpha) * std::sqrt(k * (k + 1.0) / (6.0 * n));
}

bool FriedmanOutcome::significantly_different(int a, int b) const
{
    return std::abs(average_ranks[a] - average_ranks[b]) > critical_difference;
}

FriedmanOutcome friedman_analysis(const ResultsMatrix& matrix, double alpha)
{
    const RankTable table = friedman_ranks(matrix);
    const int k = static_cast<int>(matrix.algorithms.size());
    const int n = static_cast<int>(matrix.functions.size());
    FriedmanOutcome out;
    out.labels = matrix.algorithms;
    out.average_ranks = table.average_ranks;
    out.statistic = friedman_statistic(table.average_ranks, n);
    out.critical_difference = bonferroni_dunn_cd(k, n, alpha);
    out.alpha = alpha;
    out.functions = n;
    return out;
}

std::string render_cd_diagram_svg(const FriedmanOutcome& o)
{
    const int k = static_cast<int>(o.average_ranks.size());
    const double half = o.critical_difference / 2.0;
    // Axis spans every rank and every interval end.
    double lo = 1.0;
    double hi = static_cast<double>(k);
    for (int a = 0; a < k; ++a) {
        lo = std::min(lo, o.average_ranks[a] - half);
        hi = std::max(hi, o.average_ranks[a] + half);
    }
    lo = std::floor(lo);
    hi = std::ceil(hi);

    const double left = 140.0;
    const double width = 560.0;
    const double top = 50.0;
    const double row = 28.0;
    const double height = top + row * k + 40.0;
    auto x_of = [&](double r) { return left + (r - lo) / (hi - lo) * width; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(left + width + 40.0, 0) << "\" height=\""
        << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<text x=\"" << fixed(left, 1) << "\" y=\"18\">Average rank (CD = " << fixed(o.critical_difference)
        << ", alpha = " << fixed(o.alpha, 2) << ", N = " << o.functions << ")</text>\n";
    svg << "<line x1=\"" << fixed(x_of(lo), 1) << "\" y1=\"" << fixed(top - 10, 1) << "\" x2=\"" << fixed(x_of(hi), 1)
        << "\" y2=\"" << fixed(top - 10, 1) << "\" stroke=\"black\"/>\n";
    for (int t = static_cast<int>(lo); t <= static_cast<int>(hi); ++t) {
        const double x = x_of(t);
        svg << "<line x1=\"" << fixed(x, 1) << "\" y1=\"" << fixed(top - 14, 1) << "\" x2=\"" << fixed(x, 1)
            << "\" y2=\"" << fixed(top - 6, 1) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(x, 1) << "\" y=\"" << fixed(top - 18, 1) << "\" text-anchor=\"middle\">" << t
            << "</text>\n";
    }
    int line = 0;
    for (int a : rank_order(o)) {
        const double y = top + row * line + row / 2.0;
        const double r = o.average_ranks[a];
        svg << "<text x=\"" << fixed(left - 10, 1) << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">"
            << xml_escape(o.labels[static_cast<std::size_t>(a)]) << " (" << fixed(r, 2) << ")</text>\n";
        svg << "<line x1=\"" << fixed(x_of(r - half), 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\""
            << fixed(x_of(r + half), 1) << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"steelblue\" stroke-width=\"3\"/>\n";
        svg << "<circle cx=\"" << fixed(x_of(r), 1) << "\" cy=\"" << fixed(y, 1) << "\" r=\"4\" fill=\"black\"/>\n";
        ++line;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_cd_diagram_text(const FriedmanOutcome& o)
{
    const int k = static_cast<int>(o.average_ranks.size());
    const double half = o.critical_difference / 2.0;
    double lo = 1.0;
    double hi = static_cast<double>(k);
    for (int a = 0; a < k; ++a) {
        lo = std::min(lo, o.average_ranks[a] - half);
        hi = std::max(hi, o.average_ranks[a] + half);
    }
    lo = std::floor(lo);
    hi = std::ceil(hi);
    constexpr int cols = 60;
    auto col_of = [&](double r) {
        return std::clamp(static_cast<int>(std::lround((r - lo) / (hi - lo) * cols)), 0, cols);
    };

    std::size_t label_width = 0;
    for (const auto& l : o.labels)
        label_width = std::max(label_width, l.size());

    std::ostringstream out;
    out << "Average ranks with CD intervals (CD = " << fixed(o.critical_difference) << ", alpha = " << fixed(o.alpha, 2)
        << ", N = " << o.functions << ")\n";
    out << std::string(label_width + 10, ' ') << "|" << fixed(lo, 0) << std::string(cols - 1, ' ') << fixed(hi, 0)
        << "|\n";
    for (int a : rank_order(o)) {
        const double r = o.average_ranks[a];
        std::string bar(cols + 1, ' ');
        for (int c = col_of(r - half); c <= col_of(r + half); ++c)
            bar[static_cast<std::size_t>(c)] = '-';
        bar[static_cast<std::size_t>(col_of(r))] = 'o';
        const std::string& label = o.labels[static_cast<std::size_t>(a)];
        out << label << std::string(label_width - label.size(), ' ') << "  " << fixed(r, 3) << "  " << bar << "\n";
    }
    return out.str();
}

std::string format_friedman_report(const FriedmanOutcome& o, const RankTable& table, const ResultsMatrix& matrix)
{
    std::ostringstream out;
    const int k = static_cast<int>(matrix.algorithms.size());
    out << "Friedman test over " << matrix.functions.size() << " functions, " << k << " algorithms\n";
    out << "ranking: mean final fitness per function, ascending (rank 1 = best)\n\n";
    out << "algorithm";
    for (const auto& f : matrix.functions)
        out << "\t" << f;
    out << "\taverage_rank\n";
    for (int a = 0; a < k; ++a) {
        out << matrix.algorithms[static_cast<std::size_t>(a)];
        for (Eigen::Index f = 0; f < table.ranks.cols(); ++f)
            out << "\t" << fixed(table.ranks(a, f), 1);
        out << "\t" << fixed(table.average_ranks[a]) << "\n";
    }
    out << "\nchi_square_F = " << sci(o.statistic) << "\n";
    out << "bonferroni_dunn_cd(alpha=" << fixed(o.alpha, 2) << ") = " << fixed(o.critical_difference, 4) << "\n\n";
    out << "significantly different pairs (|R_a - R_b| > CD):\n";
    bool any = false;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (o.significantly_different(a, b)) {
                out << "  " << o.labels[static_cast<std::size_t>(a)] << " vs " << o.labels[static_cast<std::size_t>(b)]
                    << "  (" << fixed(std::abs(o.average_ranks[a] - o.average_ranks[b])) << ")\n";
                any = true;
            }
    if (!any)
        out << "  none\n";
    return out.str();
}

} // namespace ensde::stats
