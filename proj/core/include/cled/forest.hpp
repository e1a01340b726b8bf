#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cled/errors.hpp"
#include "cled/lingfeat.hpp"

namespace cled {

struct ForestHyperparams {
    int num_trees = 50;
    int max_depth = 10;
    int max_features = 0; // 0 = ceil(sqrt(feature count)) per split
    int min_samples_leaf = 2;
    int min_samples_split = 10;
    bool bootstrap = true;
    double min_impurity_decrease = 0.0;

    int features_per_split(int feature_count) const;
    void validate() const;
};

/// Gini impurity of a two-class count pair: 1 - p0^2 - p1^2.
double gini(long count0, long count1);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
    long samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // preorder, root at 0

    /// Positive-class fraction of the leaf this vector falls into.
    double predict(const FeatureVector& fv) const;
    int depth() const;
};

/// Two-class random forest trained with seeded bootstrap resampling and
/// best-gini splits over a seeded feature subset. Fully deterministic:
/// tree t draws from derive_seed(seed, t), split candidates are midpoints
/// between consecutive sorted unique values, and gain ties break toward the
/// lowest feature index, then the lowest threshold.
class RandomForest {
public:
    /// labels are 0 (clean) / 1 (erroneous); both classes must be present
    /// and there must be at least min_samples_split samples.
    static RandomForest train(const std::vector<FeatureVector>& features,
                              const std::vector<int>& labels, const ForestHyperparams& hp,
                              std::uint64_t seed);

    /// Mean positive-class leaf fraction over all trees.
    double predict_proba(const FeatureVector& fv) const;

    /// true = erroneous. Flagged iff predict_proba >= threshold (ties flag,
    /// failing toward re-computation). Default threshold is the stored one.
    bool classify(const FeatureVector& fv, std::optional<double> threshold = std::nullopt) const;

    double threshold() const { return threshold_; }
    void set_threshold(double threshold);

    const ForestHyperparams& hyperparams() const { return hp_; }
    const std::vector<std::string>& names() const { return feature_names_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    std::uint64_t seed() const { return seed_; }

    /// Versioned JSON model file; load rejects malformed files and any
    /// feature-name mismatch with the fixed extraction order.
    void save(const std::filesystem::path& path) const;
    static RandomForest load(const std::filesystem::path& path);
    std::string serialize() const;

private:
    RandomForest() = default;

    ForestHyperparams hp_;
    std::vector<std::string> feature_names_;
    std::vector<DecisionTree> trees_;
    double threshold_ = 0.5;
    std::uint64_t seed_ = 0;
};

struct ConfusionMatrix {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    long total() const { return tp + fp + tn + fn; }
    double accuracy() const;
    double recall() const;    // TP / (TP + FN)
    double precision() const; // TP / (TP + FP)
    double fpr() const;       // FP / (FP + TN)
    double fnr() const;       // FN / (TP + FN)
};

ConfusionMatrix evaluate(const RandomForest& forest, const std::vector<FeatureVector>& features,
                         const std::vector<int>& labels,
                         std::optional<double> threshold = std::nullopt);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

/// Confusion rates at num_thresholds evenly spaced thresholds in [0, 1],
/// sorted by threshold. The test set must contain both classes.
std::vector<RocPoint> roc_curve(const RandomForest& forest,
                                const std::vector<FeatureVector>& features,
                                const std::vector<int>& labels, int num_thresholds);

void write_roc_csv(const std::filesystem::path& path, const std::vector<RocPoint>& points);

/// Picks the grid entry with the best mean recall over k seeded stratified
/// folds; ties break toward fewer trees, then smaller depth, then grid order.
ForestHyperparams cross_validate(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels,
                                 const std::vector<ForestHyperparams>& grid, int k,
                                 std::uint64_t seed);

} // namespace cled
