#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nnsteal/timing_dataset.hpp"

namespace nnsteal::regress {

enum class RegressorKind { Ridge, LinearSvr, DecisionTree, RandomForest, BoostedTrees };

std::string kind_name(RegressorKind k);
RegressorKind kind_from_name(const std::string& name);

enum class FeatureSet { TimeOnly, TimePlusParams };

struct Hyper {
    double ridge_lambda = 1e-2;
    int tree_max_depth = 6;
    int tree_min_leaf = 2;
    int forest_trees = 100;
    int boost_rounds = 200;
    double boost_lr = 0.1;
    int boost_max_depth = 3;  // shallow stumps; full-depth trees would interpolate round 1
    double svr_epsilon = 0.5;
    double svr_lr = 0.1;
    int svr_epochs = 500;
};

// Regression-tree node array; leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> x) const;
};

// Depth-from-time regressor. Construct through fit(); predict() is only
// defined on a fitted model.
class Regressor {
public:
    static Regressor fit(RegressorKind kind, const attack::TimingDataset& ds, FeatureSet features,
                         const Hyper& hyper, uint64_t seed);

    double predict(double time_s, std::optional<int64_t> n_params = std::nullopt) const;

    // ceil(predict), clamped to at least 1 (depth estimates are counts)
    int infer_depth(double time_s, std::optional<int64_t> n_params = std::nullopt) const;

    RegressorKind kind() const { return kind_; }
    FeatureSet features() const { return features_; }

    // component predictions, exposed for the ensemble identities
    std::vector<double> forest_tree_predictions(std::span<const double> x) const;
    double boosted_prefix_prediction(std::span<const double> x, int rounds) const;
    double boosted_round_tree_prediction(std::span<const double> x, int round) const;
    double boost_learning_rate() const { return boost_lr_; }
    int ensemble_size() const;

    nlohmann::json to_json() const;
    static Regressor from_json(const nlohmann::json& j);

private:
    Regressor() = default;

    std::vector<double> featurize(double time_s, std::optional<int64_t> n_params) const;
    double predict_features(std::span<const double> x) const;

    RegressorKind kind_ = RegressorKind::Ridge;
    FeatureSet features_ = FeatureSet::TimePlusParams;
    bool fitted_ = false;

    // linear models (ridge / svr) on standardized features
    std::vector<double> lin_w_;
    double lin_b_ = 0.0;
    std::vector<double> feat_mean_, feat_std_;

    // tree models
    Tree tree_;
    std::vector<Tree> forest_;
    double boost_base_ = 0.0;
    double boost_lr_ = 0.0;
    std::vector<Tree> boost_trees_;
};

struct RegressorScore {
    double mse = 0.0;
    std::optional<double> r2;  // undefined on a zero-variance holdout
};

RegressorScore score(const Regressor& reg, const attack::TimingDataset& holdout);

struct ComparisonRow {
    RegressorKind kind;
    double mean_mse = 0.0;
    double mean_r2 = 0.0;
    int n_seeds = 0;
};

// Repeated holdout evaluation: for each seed the dataset is shuffled and
// split, every kind fitted on the train part and scored on the holdout.
// Rows are sorted by mean R^2 descending; ties break on kind name.
std::vector<ComparisonRow> compare_regressors(const attack::TimingDataset& ds,
                                              double holdout_fraction,
                                              std::span<const uint64_t> seeds, FeatureSet features,
                                              const Hyper& hyper = {});

void write_comparison_csv(std::span<const ComparisonRow> rows, const std::filesystem::path& path);

// Exposed for the closed-form check: solves (X^T X + lambda I) w = X^T y by
// Gaussian elimination with partial pivoting. X is row-major n x d.
std::vector<double> ridge_solve(std::span<const double> x, int n, int d, std::span<const double> y,
                                double lambda);

// Train/holdout split of a timing dataset (seeded shuffle).
std::pair<attack::TimingDataset, attack::TimingDataset> split_dataset(
    const attack::TimingDataset& ds, double holdout_fraction, uint64_t seed);

}  // namespace nnsteal::regress
