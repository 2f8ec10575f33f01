#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "ensde/core.hpp"

namespace ensde {

/// Raised when a model cannot be fitted (empty data, singular ridge system).
class RegressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Samples in rows, features in columns.
struct RegressionDataset {
    RealMatrix features;
    RealVector targets;

    Eigen::Index samples() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }

    // Throws RegressionError on empty, misaligned or non-finite data.
    void validate() const;
};

/// Row j holds component j of every test-set vector; target j is validation[j].
RegressionDataset make_regression_dataset(std::span<const RealVector> test_set, const RealVector& validation);

enum class RegressorType { rf, ext, gb, dt, lm };

std::string_view to_token(RegressorType type);
RegressorType regressor_from_token(std::string_view token);

enum class SplitRule {
    best,   // exhaustive variance-reduction search
    extreme // one uniform threshold per candidate feature
};

struct TreeOptions {
    int min_samples_split = 2;
    std::optional<int> max_depth; // unlimited when empty
    int max_features = 0;         // candidate features per split; 0 means all
    SplitRule split_rule = SplitRule::best;
};

struct RegressorSpec {
    RegressorType type = RegressorType::rf;
    int n_estimators = 40;
    double learning_rate = 0.1;
    std::optional<int> max_depth;
    int min_samples_split = 2;
    int max_features = 0;
    double ridge_alpha = 1.0;

    /// Library defaults per model kind (RF/EXT: 40 trees, GB: 100 stages of
    /// depth 3 at rate 0.1, LM: alpha 1).
    static RegressorSpec defaults(RegressorType type);

    TreeOptions tree_options(SplitRule rule) const;
    void validate() const;
};

/// Binary regression tree stored as a flat node array; node 0 is the root.
class RegressionTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0; // mean target of the samples routed here
        int samples = 0;

        bool is_leaf() const { return feature < 0; }
    };

    template <typename Derived>
    double predict(const Eigen::MatrixBase<Derived>& row) const
    {
        if (row.size() != feature_count_)
            throw InvalidArgument("predict: row length does not match the fitted feature count");
        int n = 0;
        while (!nodes_[static_cast<std::size_t>(n)].is_leaf()) {
            const Node& node = nodes_[static_cast<std::size_t>(n)];
            n = row(node.feature) <= node.threshold ? node.left : node.right;
        }
        return nodes_[static_cast<std::size_t>(n)].value;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    int feature_count() const { return static_cast<int>(feature_count_); }
    int depth() const;
    int leaf_count() const;

private:
    friend class TreeBuilder;
    std::vector<Node> nodes_;
    Eigen::Index feature_count_ = 0;
};

/// Grows a tree on all samples of `data`.
RegressionTree fit_cart(const RegressionDataset& data, const TreeOptions& options, RngStream& rng);

/// Grows a tree on the multiset of rows named by `sample_indices` (duplicates allowed).
RegressionTree fit_cart(const RegressionDataset& data, std::span<const int> sample_indices,
                        const TreeOptions& options, RngStream& rng);

/// Unweighted average of independently grown trees.
class ForestRegressor {
public:
    explicit ForestRegressor(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

    template <typename Derived>
    double predict(const Eigen::MatrixBase<Derived>& row) const
    {
        double sum = 0.0;
        for (const auto& t : trees_)
            sum += t.predict(row);
        return sum / static_cast<double>(trees_.size());
    }

    template <typename Derived>
    RealVector predict_per_tree(const Eigen::MatrixBase<Derived>& row) const
    {
        RealVector out(static_cast<Eigen::Index>(trees_.size()));
        for (std::size_t t = 0; t < trees_.size(); ++t)
            out[static_cast<Eigen::Index>(t)] = trees_[t].predict(row);
        return out;
    }

    const std::vector<RegressionTree>& trees() const { return trees_; }

private:
    std::vector<RegressionTree> trees_;
};

/// Stage-wise additive model under squared loss.
class BoostedRegressor {
public:
    BoostedRegressor(double initial, double learning_rate, std::vector<RegressionTree> stages)
        : initial_(initial), learning_rate_(learning_rate), stages_(std::move(stages))
    {
    }

    template <typename Derived>
    double predict(const Eigen::MatrixBase<Derived>& row) const
    {
        return predict_stages(row, stages_.size());
    }

    /// Prediction using only the first `count` stages.
    template <typename Derived>
    double predict_stages(const Eigen::MatrixBase<Derived>& row, std::size_t count) const
    {
        double value = initial_;
        for (std::size_t m = 0; m < std::min(count, stages_.size()); ++m)
            value += learning_rate_ * stages_[m].predict(row);
        return value;
    }

    double initial() const { return initial_; }
    double learning_rate() const { return learning_rate_; }
    const std::vector<RegressionTree>& stages() const { return stages_; }

private:
    double initial_;
    double learning_rate_;
    std::vector<RegressionTree> stages_;
};

class RidgeRegressor {
public:
    RidgeRegressor(RealVector weights, double intercept) : weights_(std::move(weights)), intercept_(intercept) {}

    template <typename Derived>
    double predict(const Eigen::MatrixBase<Derived>& row) const
    {
        if (row.size() != weights_.size())
            throw InvalidArgument("predict: row length does not match the fitted feature count");
        double value = intercept_;
        for (Eigen::Index i = 0; i < weights_.size(); ++i)
            value += row(i) * weights_[i];
        return value;
    }

    const RealVector& weights() const { return weights_; }
    double intercept() const { return intercept_; }

private:
    RealVector weights_;
    double intercept_;
};

ForestRegressor fit_random_forest(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng);
ForestRegressor fit_extra_trees(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng);
BoostedRegressor fit_gradient_boosting(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng);

/// Minimizes |Xw + b - y|^2 + alpha |w|^2 with an unpenalized intercept.
/// With alpha == 0 this is the minimum-norm least-squares fit; throws
/// RegressionError if the centered design is rank deficient and no exact fit exists.
RidgeRegressor fit_ridge(const RegressionDataset& data, double alpha);

class FittedRegressor {
public:
    using Model = std::variant<RegressionTree, ForestRegressor, BoostedRegressor, RidgeRegressor>;

    FittedRegressor(RegressorType type, Model model) : type_(type), model_(std::move(model)) {}

    template <typename Derived>
    double predict(const Eigen::MatrixBase<Derived>& row) const
    {
        return std::visit([&](const auto& m) { return m.predict(row); }, model_);
    }

    /// Predictions for every row of `features`.
    RealVector predict_rows(const RealMatrix& features) const;

    RegressorType type() const { return type_; }
    const Model& model() const { return model_; }

private:
    RegressorType type_;
    Model model_;
};

FittedRegressor fit_regressor(const RegressionDataset& data, const RegressorSpec& spec, RngStream& rng);

/// Fits `spec` on the (test set, validation) arrangement and returns the
/// clamped in-sample predictions, one per dimension.
RealVector build_regression_vector(std::span<const RealVector> test_set, const RealVector& validation,
                                   const RegressorSpec& spec, const Bounds<double>& bounds, RngStream& rng);

} // namespace ensde
