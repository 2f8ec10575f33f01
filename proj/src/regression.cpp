#include "ensde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace ensde {

void RegressionDataset::validate() const
{
    if (features.rows() == 0 || features.cols() == 0)
        throw RegressionError("regression dataset is empty");
    if (targets.size() != features.rows())
        throw RegressionError("regression dataset: feature rows and targets are misaligned");
    if (!features.allFinite() || !targets.allFinite())
        throw RegressionError("regression dataset contains non-finite values");
}

RegressionDataset make_regression_dataset(std::span<const RealVector> test_set, const RealVector& validation)
{
    if (test_set.empty())
        throw RegressionError("make_regression_dataset: empty test set");
    const Eigen::Index d = validation.size();
    RegressionDataset data;
    data.features.resize(d, static_cast<Eigen::Index>(test_set.size()));
    for (std::size_t s = 0; s < test_set.size(); ++s) {
        if (test_set[s].size() != d)
            throw RegressionError("make_regression_dataset: test vector length differs from validation length");
        data.features.col(static_cast<Eigen::Index>(s)) = test_set[s];
    }
    data.targets = validation;
    data.validate();
    return data;
}

std::string_view to_token(RegressorType type)
{
    switch (type) {
    case RegressorType::rf: return "rf";
    case RegressorType::ext: return "ext";
    case RegressorType::gb: return "gb";
    case RegressorType::dt: return "dt";
    case RegressorType::lm: return "lm";
    }
    return "unknown";
}

RegressorType regressor_from_token(std::string_view token)
{
    for (RegressorType t : {RegressorType::rf, RegressorType::ext, RegressorType::gb, RegressorType::dt, RegressorType::lm})
        if (to_token(t) == token)
            return t;
    throw InvalidArgument("regressor: unknown token '" + std::string(token) + "'");
}

RegressorSpec RegressorSpec::defaults(RegressorType type)
{
    RegressorSpec spec;
    spec.type = type;
    switch (type) {
    case RegressorType::rf:
    case RegressorType::ext: spec.n_estimators = 40; break;
    case RegressorType::gb:
        spec.n_estimators = 100;
        spec.learning_rate = 0.1;
        spec.max_depth = 3;
        break;
    case RegressorType::dt: spec.n_estimators = 1; break;
    case RegressorType::lm: spec.ridge_alpha = 1.0; break;
    }
    return spec;
}

TreeOptions RegressorSpec::tree_options(SplitRule rule) const
{
    return {min_samples_split, max_depth, max_features, rule};
}

void RegressorSpec::validate() const
{
    if (n_estimators < 0 || ((type == RegressorType::rf || type == RegressorType::ext) && n_estimators < 1))
        throw InvalidArgument("estimators: must be positive, got " + std::to_string(n_estimators));
    if (!(learning_rate > 0.0))
        throw InvalidArgument("learning_rate: must be positive");
    if (max_depth && *max_depth < 1)
        throw InvalidArgument("max_depth: must be positive");
    if (min_samples_split < 2)
        throw InvalidArgument("min_samples_split: must be at least 2");
    if (max_features < 0)
        throw InvalidArgument("max_features: must be non-negative");
    if (!(ridge_alpha >= 0.0) || !std::isfinite(ridge_alpha))
        throw InvalidArgument("alpha: ridge penalty must be finite and non-negative");
}

// ---------------------------------------------------------------------------
// CART

int RegressionTree::depth() const
{
    // Nodes are stored parent-before-child, so one forward pass suffices.
    std::vector<int> level(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        const Node& node = nodes_[n];
        deepest = std::max(deepest, level[n]);
        if (!node.is_leaf()) {
            level[static_cast<std::size_t>(node.left)] = level[n] + 1;
            level[static_cast<std::size_t>(node.right)] = level[n] + 1;
        }
    }
    return deepest;
}

int RegressionTree::leaf_count() const
{
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

namespace {

// Row indices of every feature column in ascending value order (ties by row).
// Computed once per dataset and shared by all trees grown on it.
class SortedColumns {
public:
    explicit SortedColumns(const RealMatrix& x) : rows_(static_cast<int>(x.rows()))
    {
        order_.resize(static_cast<std::size_t>(x.rows() * x.cols()));
        for (Eigen::Index f = 0; f < x.cols(); ++f) {
            auto first = order_.begin() + f * x.rows();
            std::iota(first, first + x.rows(), 0);
            std::sort(first, first + x.rows(), [&](int a, int b) {
                return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
            });
        }
    }

    std::span<const int> column(int f) const
    {
        return {order_.data() + static_cast<std::ptrdiff_t>(f) * rows_, static_cast<std::size_t>(rows_)};
    }

private:
    int rows_;
    std::vector<int> order_;
};

} // namespace

// Grows one tree over rows with positive integer weight (bootstrap counts).
class TreeBuilder {
public:
    TreeBuilder(const RegressionDataset& data, const SortedColumns& sorted, const TreeOptions& options,
                RngStream& rng)
        : x_(data.features), y_(data.targets), sorted_(sorted), options_(options), rng_(rng)
    {
        if (options.min_samples_split < 2)
            throw InvalidArgument("min_samples_split: must be at least 2");
        if (options.max_depth && *options.max_depth < 0)
            throw InvalidArgument("max_depth: must be non-negative");
    }

    RegressionTree build(std::vector<int> weights)
    {
        weight_ = std::move(weights);
        idx_.clear();
        for (std::size_t r = 0; r < weight_.size(); ++r)
            if (weight_[r] > 0)
                idx_.push_back(static_cast<int>(r));
        if (idx_.empty())
            throw RegressionError("cannot fit a tree on zero samples");
        stamp_.assign(weight_.size(), -1);
        tree_.feature_count_ = x_.cols();
        tree_.nodes_.reserve(2 * idx_.size());
        grow(0, static_cast<int>(idx_.size()), 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = -std::numeric_limits<double>::infinity();

        // Higher score wins; ties go to the lower feature, then the lower threshold.
        bool beaten_by(double s, int f, double t) const
        {
            if (feature < 0 || s > score)
                return true;
            if (s < score)
                return false;
            return f < feature || (f == feature && t < threshold);
        }
    };

    int grow(int begin, int end, int depth)
    {
        const int id = static_cast<int>(tree_.nodes_.size());
        tree_.nodes_.emplace_back();

        double sum = 0.0;
        long count = 0;
        bool pure = true;
        const double first = y_[idx_[static_cast<std::size_t>(begin)]];
        for (int k = begin; k < end; ++k) {
            const int r = idx_[static_cast<std::size_t>(k)];
            sum += weight_[static_cast<std::size_t>(r)] * y_[r];
            count += weight_[static_cast<std::size_t>(r)];
            pure = pure && y_[r] == first;
        }
        auto& node = tree_.nodes_[static_cast<std::size_t>(id)];
        node.value = pure ? first : sum / static_cast<double>(count);
        node.samples = static_cast<int>(count);

        const int distinct = end - begin;
        if (pure || distinct < options_.min_samples_split || (options_.max_depth && depth >= *options_.max_depth))
            return id;

        const Split split = find_split(begin, end, sum, count);
        if (split.feature < 0)
            return id;

        const auto mid_it = std::stable_partition(idx_.begin() + begin, idx_.begin() + end, [&](int r) {
            return x_(r, split.feature) <= split.threshold;
        });
        const int mid = static_cast<int>(mid_it - idx_.begin());

        const int left = grow(begin, mid, depth + 1);
        const int right = grow(mid, end, depth + 1);
        auto& parent = tree_.nodes_[static_cast<std::size_t>(id)];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left;
        parent.right = right;
        return id;
    }

    std::pair<double, double> column_range(int begin, int end, int f) const
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int k = begin; k < end; ++k) {
            const double v = x_(idx_[static_cast<std::size_t>(k)], f);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return {lo, hi};
    }

    bool splittable(int begin, int end, int f) const
    {
        const auto [lo, hi] = column_range(begin, end, f);
        return lo < hi;
    }

    // Features to examine at this node. With a max_features limit, features are
    // drawn without replacement and constant ones do not count toward it.
    void candidate_features(int begin, int end)
    {
        const int p = static_cast<int>(x_.cols());
        features_.clear();
        if (options_.max_features == 0 || options_.max_features >= p) {
            for (int f = 0; f < p; ++f)
                features_.push_back(f);
            return;
        }
        pool_.resize(static_cast<std::size_t>(p));
        std::iota(pool_.begin(), pool_.end(), 0);
        for (int k = 0; k < p && static_cast<int>(features_.size()) < options_.max_features; ++k) {
            const int pick = k + rng_.index(p - k);
            std::swap(pool_[static_cast<std::size_t>(k)], pool_[static_cast<std::size_t>(pick)]);
            const int f = pool_[static_cast<std::size_t>(k)];
            if (splittable(begin, end, f))
                features_.push_back(f);
        }
        std::sort(features_.begin(), features_.end());
    }

    Split find_split(int begin, int end, double total, long count)
    {
        candidate_features(begin, end);
        return options_.split_rule == SplitRule::best ? best_split(begin, end, total, count)
                                                      : extreme_split(begin, end);
    }

    // Maximizing sum_L^2/n_L + sum_R^2/n_R is equivalent to minimizing the
    // summed squared error of the two children.
    Split best_split(int begin, int end, double total, long count)
    {
        ++current_stamp_;
        for (int k = begin; k < end; ++k)
            stamp_[static_cast<std::size_t>(idx_[static_cast<std::size_t>(k)])] = current_stamp_;

        Split best;
        for (int f : features_) {
            double left_sum = 0.0;
            long left_n = 0;
            int prev = -1;
            for (int r : sorted_.column(f)) {
                if (stamp_[static_cast<std::size_t>(r)] != current_stamp_)
                    continue;
                if (prev >= 0) {
                    const double a = x_(prev, f);
                    const double b = x_(r, f);
                    if (a < b) {
                        double threshold = a + (b - a) / 2.0;
                        if (!(threshold < b))
                            threshold = a;
                        const double right_sum = total - left_sum;
                        const double score = left_sum * left_sum / static_cast<double>(left_n) +
                                             right_sum * right_sum / static_cast<double>(count - left_n);
                        if (best.beaten_by(score, f, threshold))
                            best = {f, threshold, score};
                    }
                }
                const int w = weight_[static_cast<std::size_t>(r)];
                left_sum += w * y_[r];
                left_n += w;
                prev = r;
            }
        }
        return best;
    }

    Split extreme_split(int begin, int end)
    {
        Split best;
        for (int f : features_) {
            const auto [lo, hi] = column_range(begin, end, f);
            if (!(lo < hi))
                continue;
            double threshold = rng_.uniform(lo, hi);
            if (!(threshold < hi))
                threshold = lo;
            double left_sum = 0.0;
            double right_sum = 0.0;
            long left_n = 0;
            long right_n = 0;
            for (int k = begin; k < end; ++k) {
                const int r = idx_[static_cast<std::size_t>(k)];
                const int w = weight_[static_cast<std::size_t>(r)];
                if (x_(r, f) <= threshold) {
                    left_sum += w * y_[r];
                    left_n += w;
                } else {
                    right_sum += w * y_[r];
                    right_n += w;
                }
            }
            const double score = left_sum * left_sum / static_cast<double>(left_n) +
                                 right_sum * right_sum / static_cast<double>(right_n);
            if (best.beaten_by(score, f, threshold))
                best = {f, threshold, score};
        }
        return best;
    }

    const RealMatrix& x_;
    const RealVector& y_;
    const SortedColumns& sorted_;
    TreeOptions options_;
    RngStream& rng_;
    std::vector<int> weight_;
    std::vector<int> idx_;
    std::vector<int> stamp_;
    int current_stamp_ = 0;
    std::vector<int> features_;
    std::vector<int> pool_;
    RegressionTree tree_;
};

namespace {

RegressionTree grow_tree(const RegressionDataset& data, const SortedColumns& sorted, std::vector<int> weights,
                         const TreeOptions& options, RngStream& rng)
{
    return TreeBuilder(data, sorted, options, rng).build(std::move(weights));
}

} // namespace

RegressionTree fit_cart(const RegressionDataset& data, const TreeOptions& options, RngStream& rng)
{
    data.validate();
    return grow_tree(data, SortedColumns(data.features), std::vector<int>(static_cast<std::size_t>(data.samples()), 1),
                     options, rng);
}

RegressionTree fit_cart(const RegressionDataset& data, std::span<const int> sample_indices,
                        const TreeOptions& options, RngStream& rng)
{
    data.validate();
    std::vector<int> weights(static_cast<std::size_t>(data.samples()), 0);
    for (int s : sample_indices) {
        if (s < 0 || s >= data.samples())
            throw InvalidArgument("fit_cart: sample index out of range");
        ++weights[static_cast<std::size_t>(s)];
    }
    return grow_tree(data, SortedColumns(data.features), std::move(weights), options, rng);
}

// ---------------------------------------------------------------------------
// Ensembles

ForestRegressor fit_random_forest(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng)
{
    spec.validate();
    data.validate();
    const int n = static_cast<int>(data.samples());
    const TreeOptions options = spec.tree_options(SplitRule::best);
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(spec.n_estimators));
    const SortedColumns sorted(data.features);
    for (int t = 0; t < spec.n_estimators; ++t) {
        std::vector<int> counts(static_cast<std::size_t>(n), 0);
        for (int k = 0; k < n; ++k)
            ++counts[static_cast<std::size_t>(rng.index(n))];
        trees.push_back(grow_tree(data, sorted, std::move(counts), options, rng));
    }
    return ForestRegressor(std::move(trees));
}

ForestRegressor fit_extra_trees(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng)
{
    spec.validate();
    data.validate();
    const TreeOptions options = spec.tree_options(SplitRule::extreme);
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(spec.n_estimators));
    const SortedColumns sorted(data.features);
    const std::vector<int> ones(static_cast<std::size_t>(data.samples()), 1);
    for (int t = 0; t < spec.n_estimators; ++t)
        trees.push_back(grow_tree(data, sorted, ones, options, rng));
    return ForestRegressor(std::move(trees));
}

BoostedRegressor fit_gradient_boosting(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng)
{
    spec.validate();
    data.validate();
    const double initial = data.targets.mean();
    const TreeOptions options = spec.tree_options(SplitRule::best);

    RegressionDataset residual{data.features, data.targets.array() - initial};
    RealVector fitted = RealVector::Constant(data.samples(), initial);
    std::vector<RegressionTree> stages;
    stages.reserve(static_cast<std::size_t>(spec.n_estimators));
    const SortedColumns sorted(data.features);
    const std::vector<int> ones(static_cast<std::size_t>(data.samples()), 1);
    for (int m = 0; m < spec.n_estimators; ++m) {
        RegressionTree tree = grow_tree(residual, sorted, ones, options, rng);
        for (Eigen::Index i = 0; i < data.samples(); ++i)
            fitted[i] += spec.learning_rate * tree.predict(data.features.row(i));
        residual.targets = data.targets - fitted;
        stages.push_back(std::move(tree));
    }
    return BoostedRegressor(initial, spec.learning_rate, std::move(stages));
}

// ---------------------------------------------------------------------------
// Ridge

RidgeRegressor fit_ridge(const RegressionDataset& data, double alpha)
{
    data.validate();
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw InvalidArgument("alpha: ridge penalty must be finite and non-negative");

    const Eigen::RowVectorXd x_mean = data.features.colwise().mean();
    const double y_mean = data.targets.mean();
    const RealMatrix xc = data.features.rowwise() - x_mean;
    const RealVector yc = data.targets.array() - y_mean;

    RealVector w;
    if (alpha == 0.0) {
        // Minimum-norm least squares. A rank-deficient design is only an
        // error when it also leaves a residual, i.e. no exact fit exists.
        const Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(xc);
        w = cod.solve(yc);
        if (cod.rank() < xc.cols() && (xc * w - yc).norm() > 1e-9 * (1.0 + yc.norm()))
            throw RegressionError("ridge: alpha = 0 with a rank-deficient design has no unique solution");
    } else {
        RealMatrix gram = xc.transpose() * xc;
        gram.diagonal().array() += alpha;
        Eigen::LLT<RealMatrix> llt(gram);
        if (llt.info() != Eigen::Success)
            throw RegressionError("ridge: normal equations are not positive definite");
        w = llt.solve(xc.transpose() * yc);
    }
    if (!w.allFinite())
        throw RegressionError("ridge: solution is not finite");
    return RidgeRegressor(std::move(w), y_mean - (x_mean * w)(0));
}

// ---------------------------------------------------------------------------

RealVector FittedRegressor::predict_rows(const RealMatrix& features) const
{
    RealVector out(features.rows());
    std::visit(
        [&](const auto& m) {
            for (Eigen::Index i = 0; i < features.rows(); ++i)
                out[i] = m.predict(features.row(i));
        },
        model_);
    return out;
}

FittedRegressor fit_regressor(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng)
{
    spec.validate();
    switch (spec.type) {
    case RegressorType::rf: return {spec.type, fit_random_forest(data, spec, rng)};
    case RegressorType::ext: return {spec.type, fit_extra_trees(data, spec, rng)};
    case RegressorType::gb: return {spec.type, fit_gradient_boosting(data, spec, rng)};
    case RegressorType::dt: return {spec.type, fit_cart(data, spec.tree_options(SplitRule::best), rng)};
    case RegressorType::lm: return {spec.type, fit_ridge(data, spec.ridge_alpha)};
    }
    throw InvalidArgument("unknown regressor type");
}

RealVector build_regression_vector(std::span<const RealVector> test_set, const RealVector& validation,
                                   const RegressorSpec& spec, const Bounds<double>& bounds, RngStream& rng)
{
    const RegressionDataset data = make_regression_dataset(test_set, validation);
    const FittedRegressor model = fit_regressor(data, spec, rng);
    const RealVector predicted = model.predict_rows(data.features);
    if (!predicted.allFinite())
        throw RegressionError("regression vector contains non-finite components");
    return clamp_to_bounds(predicted, bounds);
}

} // namespace ensde
