#include "cled/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cled/rng.hpp"

namespace cled {

int ForestHyperparams::features_per_split(int feature_count) const {
    if (max_features > 0) return std::min(max_features, feature_count);
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(feature_count))));
}

void ForestHyperparams::validate() const {
    if (num_trees < 1) throw PreconditionError("num_trees must be >= 1");
    if (max_depth < 1) throw PreconditionError("max_depth must be >= 1");
    if (min_samples_leaf < 1) throw PreconditionError("min_samples_leaf must be >= 1");
    if (min_samples_split < 2 * min_samples_leaf) {
        throw PreconditionError("min_samples_split must be >= 2 * min_samples_leaf");
    }
    if (min_impurity_decrease < 0.0) {
        throw PreconditionError("min_impurity_decrease must be >= 0");
    }
    if (max_features < 0) throw PreconditionError("max_features must be >= 0");
}

double gini(long count0, long count1) {
    if (count0 < 0 || count1 < 0) throw PreconditionError("class counts must be >= 0");
    const long total = count0 + count1;
    if (total <= 0) throw PreconditionError("gini needs a non-empty node");
    const double p0 = static_cast<double>(count0) / static_cast<double>(total);
    const double p1 = static_cast<double>(count1) / static_cast<double>(total);
    return 1.0 - p0 * p0 - p1 * p1;
}

double DecisionTree::predict(const FeatureVector& fv) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        const TreeNode& n = nodes[node];
        node = fv[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[node].positive_fraction;
}

int DecisionTree::depth() const {
    // Iterative depth over the preorder array.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int max_depth = 0;
    while (!stack.empty()) {
        auto [node, d] = stack.back();
        stack.pop_back();
        max_depth = std::max(max_depth, d);
        if (!nodes[node].is_leaf()) {
            stack.push_back({nodes[node].left, d + 1});
            stack.push_back({nodes[node].right, d + 1});
        }
    }
    return max_depth;
}

namespace {

struct TreeBuilder {
    const std::vector<FeatureVector>& x;
    const std::vector<int>& y;
    const ForestHyperparams& hp;
    Rng& rng;
    DecisionTree tree;

    int build(std::vector<int>& idx, int depth) {
        long pos = 0;
        for (int i : idx) pos += y[i];
        const long total = static_cast<long>(idx.size());
        const long neg = total - pos;

        const int node_id = static_cast<int>(tree.nodes.size());
        TreeNode node;
        node.samples = total;
        node.positive_fraction = static_cast<double>(pos) / static_cast<double>(total);
        tree.nodes.push_back(node);

        if (depth >= hp.max_depth || total < hp.min_samples_split || pos == 0 || neg == 0) {
            return node_id;
        }

        // Seeded feature subset (distinct), evaluated in ascending index
        // order so equal-gain ties resolve to the lowest feature index.
        const int k = hp.features_per_split(kNumFeatures);
        std::vector<int> all(kNumFeatures);
        std::iota(all.begin(), all.end(), 0);
        for (int j = 0; j < k; ++j) {
            const int swap_with =
                j + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(kNumFeatures - j)));
            std::swap(all[j], all[swap_with]);
        }
        std::vector<int> chosen(all.begin(), all.begin() + k);
        std::sort(chosen.begin(), chosen.end());

        const double parent = gini(neg, pos);
        double best_gain = hp.min_impurity_decrease;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, int>> vals(idx.size());
        for (int f : chosen) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                vals[i] = {x[idx[i]][f], y[idx[i]]};
            }
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            long left_pos = 0;
            for (long i = 1; i < total; ++i) {
                left_pos += vals[i - 1].second;
                if (vals[i].first == vals[i - 1].first) continue; // not a boundary
                if (i < hp.min_samples_leaf || total - i < hp.min_samples_leaf) continue;
                const double lo = vals[i - 1].first;
                const double hi = vals[i].first;
                const double thr = lo + (hi - lo) / 2.0;
                if (!(thr >= lo) || thr >= hi) continue; // degenerate midpoint
                const long left_n = i;
                const long right_n = total - i;
                const long right_pos = pos - left_pos;
                const double weighted =
                    (static_cast<double>(left_n) * gini(left_n - left_pos, left_pos) +
                     static_cast<double>(right_n) * gini(right_n - right_pos, right_pos)) /
                    static_cast<double>(total);
                const double gain = parent - weighted;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = thr;
                }
            }
        }

        if (best_feature < 0) {
            return node_id; // no admissible split improves impurity
        }

        std::vector<int> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (int i : idx) {
            (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        }

        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        const int left_id = build(left_idx, depth + 1);
        tree.nodes[node_id].left = left_id;
        const int right_id = build(right_idx, depth + 1);
        tree.nodes[node_id].right = right_id;
        return node_id;
    }
};

void check_training_set(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                        int min_samples) {
    if (features.size() != labels.size()) {
        throw PreconditionError("feature rows and labels differ in count");
    }
    if (static_cast<int>(features.size()) < min_samples) {
        throw PreconditionError("need at least " + std::to_string(min_samples) + " samples, got " +
                                std::to_string(features.size()));
    }
    long pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw PreconditionError("labels must be 0 or 1");
        pos += l;
    }
    if (pos == 0 || pos == static_cast<long>(labels.size())) {
        throw PreconditionError("training data must contain both classes");
    }
}

} // namespace

RandomForest RandomForest::train(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels, const ForestHyperparams& hp,
                                 std::uint64_t seed) {
    hp.validate();
    check_training_set(features, labels, hp.min_samples_split);

    RandomForest forest;
    forest.hp_ = hp;
    forest.seed_ = seed;
    const auto& names = feature_names();
    forest.feature_names_.assign(names.begin(), names.end());

    const std::size_t n = features.size();
    forest.trees_.reserve(static_cast<std::size_t>(hp.num_trees));
    for (int t = 0; t < hp.num_trees; ++t) {
        // One stream per tree: bootstrap draws first, then split draws.
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<int> idx(n);
        if (hp.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                idx[i] = static_cast<int>(next_below(rng, n));
            }
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        TreeBuilder builder{features, labels, hp, rng, {}};
        builder.build(idx, 0);
        forest.trees_.push_back(std::move(builder.tree));
    }
    return forest;
}

double RandomForest::predict_proba(const FeatureVector& fv) const {
    double sum = 0.0;
    for (const DecisionTree& tree : trees_) {
        sum += tree.predict(fv);
    }
    return sum / static_cast<double>(trees_.size());
}

bool RandomForest::classify(const FeatureVector& fv, std::optional<double> threshold) const {
    double t = threshold_;
    if (threshold) {
        if (*threshold < 0.0 || *threshold > 1.0) {
            throw PreconditionError("decision threshold must be in [0, 1]");
        }
        t = *threshold;
    }
    return predict_proba(fv) >= t;
}

void RandomForest::set_threshold(double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw PreconditionError("decision threshold must be in [0, 1]");
    }
    threshold_ = threshold;
}

double ConfusionMatrix::accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}
double ConfusionMatrix::recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}
double ConfusionMatrix::precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}
double ConfusionMatrix::fpr() const {
    return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn);
}
double ConfusionMatrix::fnr() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(fn) / static_cast<double>(tp + fn);
}

ConfusionMatrix evaluate(const RandomForest& forest, const std::vector<FeatureVector>& features,
                         const std::vector<int>& labels, std::optional<double> threshold) {
    if (features.size() != labels.size()) {
        throw PreconditionError("feature rows and labels differ in count");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const bool flagged = forest.classify(features[i], threshold);
        if (labels[i] == 1) {
            flagged ? ++cm.tp : ++cm.fn;
        } else {
            flagged ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

std::vector<RocPoint> roc_curve(const RandomForest& forest,
                                const std::vector<FeatureVector>& features,
                                const std::vector<int>& labels, int num_thresholds) {
    if (num_thresholds < 2) throw PreconditionError("roc needs at least 2 thresholds");
    if (features.size() != labels.size()) {
        throw PreconditionError("feature rows and labels differ in count");
    }
    long pos = 0;
    for (int l : labels) pos += l;
    const long neg = static_cast<long>(labels.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw PreconditionError("roc needs both classes in the test set");
    }

    std::vector<double> probas(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        probas[i] = forest.predict_proba(features[i]);
    }

    std::vector<RocPoint> points;
    points.reserve(static_cast<std::size_t>(num_thresholds));
    for (int i = 0; i < num_thresholds; ++i) {
        const double thr = static_cast<double>(i) / static_cast<double>(num_thresholds - 1);
        long tp = 0, fp = 0;
        for (std::size_t s = 0; s < probas.size(); ++s) {
            if (probas[s] >= thr) {
                labels[s] == 1 ? ++tp : ++fp;
            }
        }
        points.push_back({thr, static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
    }
    return points;
}

void write_roc_csv(const std::filesystem::path& path, const std::vector<RocPoint>& points) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "threshold,fpr,tpr\n";
    for (const RocPoint& p : points) {
        out << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
            << format_double(p.tpr) << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

ForestHyperparams cross_validate(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels,
                                 const std::vector<ForestHyperparams>& grid, int k,
                                 std::uint64_t seed) {
    if (grid.empty()) throw PreconditionError("hyperparameter grid is empty");
    if (k < 2) throw PreconditionError("cross-validation needs k >= 2 folds");
    if (static_cast<int>(features.size()) < k) {
        throw PreconditionError("cross-validation needs at least k samples");
    }
    check_training_set(features, labels, k);

    // Stratified folds: shuffle each class with its own derived seed, then
    // deal round-robin. Fold f of grid entry g trains with seed
    // derive_seed(seed, 1000 + g*k + f).
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<int> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(static_cast<int>(i));
        }
        Rng rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(cls)));
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[next_below(rng, i)]);
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
        }
    }

    double best_recall = -1.0;
    std::size_t best_entry = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        grid[g].validate();
        double recall_sum = 0.0;
        for (int f = 0; f < k; ++f) {
            std::vector<FeatureVector> train_x, test_x;
            std::vector<int> train_y, test_y;
            for (int fold = 0; fold < k; ++fold) {
                for (int i : folds[static_cast<std::size_t>(fold)]) {
                    if (fold == f) {
                        test_x.push_back(features[static_cast<std::size_t>(i)]);
                        test_y.push_back(labels[static_cast<std::size_t>(i)]);
                    } else {
                        train_x.push_back(features[static_cast<std::size_t>(i)]);
                        train_y.push_back(labels[static_cast<std::size_t>(i)]);
                    }
                }
            }
            const long test_pos = std::accumulate(test_y.begin(), test_y.end(), 0L);
            if (test_pos == 0) {
                throw DataError("degenerate fold " + std::to_string(f) +
                                ": no positive samples to score recall on");
            }
            try {
                const RandomForest model = RandomForest::train(
                    train_x, train_y, grid[g],
                    derive_seed(seed, 1000 + g * static_cast<std::size_t>(k) +
                                          static_cast<std::size_t>(f)));
                recall_sum += evaluate(model, test_x, test_y).recall();
            } catch (const PreconditionError& e) {
                throw DataError("degenerate fold " + std::to_string(f) + ": " + e.what());
            }
        }
        const double mean_recall = recall_sum / static_cast<double>(k);
        const bool better =
            mean_recall > best_recall ||
            (mean_recall == best_recall &&
             (grid[g].num_trees < grid[best_entry].num_trees ||
              (grid[g].num_trees == grid[best_entry].num_trees &&
               grid[g].max_depth < grid[best_entry].max_depth)));
        if (g == 0 || better) {
            best_recall = mean_recall;
            best_entry = g;
        }
    }
    return grid[best_entry];
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

nlohmann::json hp_to_json(const ForestHyperparams& hp) {
    return nlohmann::json{{"num_trees", hp.num_trees},
                          {"max_depth", hp.max_depth},
                          {"max_features", hp.max_features},
                          {"min_samples_leaf", hp.min_samples_leaf},
                          {"min_samples_split", hp.min_samples_split},
                          {"bootstrap", hp.bootstrap},
                          {"min_impurity_decrease", hp.min_impurity_decrease}};
}

ForestHyperparams hp_from_json(const nlohmann::json& j) {
    ForestHyperparams hp;
    hp.num_trees = j.at("num_trees").get<int>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.max_features = j.at("max_features").get<int>();
    hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    hp.min_samples_split = j.at("min_samples_split").get<int>();
    hp.bootstrap = j.at("bootstrap").get<bool>();
    hp.min_impurity_decrease = j.at("min_impurity_decrease").get<double>();
    return hp;
}

} // namespace

std::string RandomForest::serialize() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& n : tree.nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"p", n.positive_fraction}, {"samples", n.samples}});
            } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"samples", n.samples}});
            }
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    const nlohmann::json j{{"format", "cled-forest"}, {"version", 1},
                           {"hyperparams", hp_to_json(hp_)}, {"feature_names", feature_names_},
                           {"threshold", threshold_},        {"seed", seed_},
                           {"trees", std::move(trees)}};
    return j.dump();
}

void RandomForest::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << serialize() << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

RandomForest RandomForest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model file " + path.string() + ": " + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != "cled-forest" || j.at("version").get<int>() != 1) {
            throw DataError("unsupported model format in " + path.string());
        }
        RandomForest forest;
        forest.hp_ = hp_from_json(j.at("hyperparams"));
        forest.hp_.validate();
        forest.feature_names_ = j.at("feature_names").get<std::vector<std::string>>();
        const auto& expected = feature_names();
        if (forest.feature_names_.size() != expected.size() ||
            !std::equal(expected.begin(), expected.end(), forest.feature_names_.begin())) {
            throw DataError(path.string() +
                            ": feature names do not match the fixed extraction order");
        }
        forest.threshold_ = j.at("threshold").get<double>();
        if (forest.threshold_ < 0.0 || forest.threshold_ > 1.0) {
            throw DataError(path.string() + ": threshold outside [0, 1]");
        }
        forest.seed_ = j.at("seed").get<std::uint64_t>();
        for (const nlohmann::json& jt : j.at("trees")) {
            DecisionTree tree;
            for (const nlohmann::json& jn : jt.at("nodes")) {
                TreeNode n;
                n.samples = jn.at("samples").get<long>();
                if (jn.contains("feature")) {
                    n.feature = jn.at("feature").get<int>();
                    n.threshold = jn.at("threshold").get<double>();
                    n.left = jn.at("left").get<int>();
                    n.right = jn.at("right").get<int>();
                    if (n.feature < 0 || n.feature >= kNumFeatures) {
                        throw DataError(path.string() + ": node feature index out of range");
                    }
                } else {
                    n.positive_fraction = jn.at("p").get<double>();
                    if (n.positive_fraction < 0.0 || n.positive_fraction > 1.0) {
                        throw DataError(path.string() + ": leaf fraction outside [0, 1]");
                    }
                }
                tree.nodes.push_back(n);
            }
            if (tree.nodes.empty()) throw DataError(path.string() + ": empty tree");
            const int count = static_cast<int>(tree.nodes.size());
            for (const TreeNode& n : tree.nodes) {
                if (!n.is_leaf() && (n.left < 0 || n.left >= count || n.right < 0 ||
                                     n.right >= count)) {
                    throw DataError(path.string() + ": node child index out of range");
                }
            }
            forest.trees_.push_back(std::move(tree));
        }
        if (forest.trees_.empty()) throw DataError(path.string() + ": model has no trees");
        return forest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model file " + path.string() + ": " + e.what());
    }
}

} // namespace cled
