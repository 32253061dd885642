#pragma once

#include <string>
#include <vector>

#include "scribkit/core.hpp"
#include "scribkit/features.hpp"

namespace scribkit {

struct ForestConfig {
    int n_trees = 50;
    int n_selected_features = 100;
    /// Candidate features per split; <= 0 means ceil(sqrt(selected count)).
    int max_features_per_split = 0;
    int min_leaf = 1;
    uint64_t seed = 0;
};

/// One CART node. Internal nodes carry an axis-aligned threshold test
/// (go left when feature value <= threshold); leaves carry a class-count
/// histogram over the classes seen at training time.
struct TreeNode {
    int32_t feature = -1; // -1 for leaves
    float threshold = 0.0f;
    int32_t left = -1;
    int32_t right = -1;
    uint32_t n_samples = 0;
    float gini = 0.0f; // impurity of the node's training samples
    std::vector<uint32_t> histogram; // leaves only, length = classes_seen.size()
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
};

struct TrainedForest {
    ForestConfig config;
    std::vector<Tree> trees;
    std::vector<int32_t> selected_features; // sorted feature indices
    std::vector<uint8_t> classes_seen;      // sorted class ids from the scribbles
    int feature_dim = 0;                    // D of the training stack
    int num_classes = 0;                    // full class-set size
};

/// Normalized per-feature mean decrease in Gini impurity. `any_split` is
/// false (and scores all zero) for a forest of pure stumps.
struct ImportanceScores {
    std::vector<double> scores; // length = feature_dim
    bool any_split = false;
};

/// Grows config.n_trees CART trees on bootstrap resamples of the scribbled
/// pixels' feature vectors. Trees split on Gini impurity and grow to
/// purity subject to min_leaf. Per-tree randomness is derived from
/// (config.seed, tree index), so repeated runs are bit-identical.
TrainedForest train_forest(const FeatureStack& features, const ScribbleSet& wa,
                           const ClassSet& classes, const ForestConfig& config);

/// Per-feature impurity decrease weighted by node sample counts, averaged
/// over trees and normalized to sum 1.
ImportanceScores gini_importance(const TrainedForest& forest);

/// Trains a pilot forest on all features, keeps the top
/// config.n_selected_features by importance (ties toward lower index),
/// then retrains restricted to those features.
TrainedForest select_and_retrain(const FeatureStack& features, const ScribbleSet& wa,
                                 const ClassSet& classes, const ForestConfig& config);

/// Per pixel: mean of the leaf class-frequency vectors over all trees,
/// embedded into the full class set with exact zeros for classes that were
/// absent from the scribbles.
ProbabilityMap predict_local(const TrainedForest& forest, const FeatureStack& features);

/// RFC1 container: magic "RFC1", u32 version, config echo, class metadata,
/// then per-tree node arrays (u16 feature or 0xffff for leaf, f32
/// threshold, u32 left, u32 right, u32 sample count, f32 gini, and for
/// leaves u32 histogram counts, one per seen class).
void save_forest(const std::string& path, const TrainedForest& forest);
TrainedForest load_forest(const std::string& path);

} // namespace scribkit
