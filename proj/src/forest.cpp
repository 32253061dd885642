#include "scribkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scribkit/binary_io.hpp"
#include "scribkit/rng.hpp"

namespace scribkit {

namespace {

double gini_of_counts(const std::vector<uint32_t>& counts, uint32_t total) {
    double g = 1.0;
    for (uint32_t c : counts) {
        double p = double(c) / double(total);
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const std::vector<float>& x; // n x d, row-major
    int d;
    const std::vector<uint8_t>& y; // local class index per sample
    int k;                         // number of seen classes
    const std::vector<int32_t>& allowed_features;
    int mtry;
    int min_leaf;
    SplitMix64 rng;

    Tree tree;
    std::vector<int32_t> sample_ids;          // permuted in place while splitting
    std::vector<int32_t> candidate_pool;      // scratch for feature draws
    std::vector<std::pair<float, uint8_t>> sorted; // scratch: (value, class)

    float value(int32_t sample, int32_t feature) const {
        return x[size_t(sample) * size_t(d) + size_t(feature)];
    }

    // Builds the subtree over sample_ids[begin, end); returns its node id.
    int32_t build(int32_t begin, int32_t end) {
        const uint32_t n = uint32_t(end - begin);
        std::vector<uint32_t> counts(size_t(k), 0);
        for (int32_t s = begin; s < end; ++s) counts[y[size_t(sample_ids[size_t(s)])]]++;
        const double node_gini = gini_of_counts(counts, n);

        int32_t node_id = int32_t(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[size_t(node_id)].n_samples = n;
        tree.nodes[size_t(node_id)].gini = float(node_gini);

        bool pure = node_gini <= 0.0;
        if (pure || n < uint32_t(2 * min_leaf)) {
            tree.nodes[size_t(node_id)].histogram = std::move(counts);
            return node_id;
        }

        // Draw mtry distinct candidate features.
        int pool_size = int(allowed_features.size());
        candidate_pool.assign(allowed_features.begin(), allowed_features.end());
        int draws = std::min(mtry, pool_size);

        double best_decrease = 0.0;
        int32_t best_feature = -1;
        float best_threshold = 0.0f;

        std::vector<uint32_t> left_counts(size_t(k));
        for (int t = 0; t < draws; ++t) {
            int pick = t + int(rng.index(uint64_t(pool_size - t)));
            std::swap(candidate_pool[size_t(t)], candidate_pool[size_t(pick)]);
            int32_t feature = candidate_pool[size_t(t)];

            sorted.clear();
            for (int32_t s = begin; s < end; ++s) {
                int32_t sample = sample_ids[size_t(s)];
                sorted.emplace_back(value(sample, feature), y[size_t(sample)]);
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (sorted.front().first == sorted.back().first) continue; // constant feature

            std::fill(left_counts.begin(), left_counts.end(), 0u);
            for (uint32_t j = 1; j < n; ++j) {
                left_counts[sorted[size_t(j - 1)].second]++;
                if (sorted[size_t(j - 1)].first == sorted[size_t(j)].first) continue;
                if (j < uint32_t(min_leaf) || n - j < uint32_t(min_leaf)) continue;

                double gl = 1.0, gr = 1.0;
                for (int c = 0; c < k; ++c) {
                    double pl = double(left_counts[size_t(c)]) / double(j);
                    double pr = double(counts[size_t(c)] - left_counts[size_t(c)]) / double(n - j);
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                double decrease = node_gini - (double(j) * gl + double(n - j) * gr) / double(n);
                if (decrease > best_decrease + 1e-15) {
                    best_decrease = decrease;
                    best_feature = feature;
                    float lo = sorted[size_t(j - 1)].first;
                    float hi = sorted[size_t(j)].first;
                    float mid = float((double(lo) + double(hi)) / 2.0);
                    // Midpoint can round onto hi for adjacent floats; fall
                    // back to the left block's maximum to keep the
                    // partition nonempty on both sides.
                    best_threshold = hi > mid ? mid : lo;
                }
            }
        }

        if (best_feature < 0) {
            tree.nodes[size_t(node_id)].histogram = std::move(counts);
            return node_id;
        }

        auto mid_it = std::partition(
            sample_ids.begin() + begin, sample_ids.begin() + end,
            [&](int32_t s) { return value(s, best_feature) <= best_threshold; });
        int32_t mid = int32_t(mid_it - sample_ids.begin());

        tree.nodes[size_t(node_id)].feature = best_feature;
        tree.nodes[size_t(node_id)].threshold = best_threshold;
        int32_t left_id = build(begin, mid);
        tree.nodes[size_t(node_id)].left = left_id;
        int32_t right_id = build(mid, end);
        tree.nodes[size_t(node_id)].right = right_id;
        return node_id;
    }
};

TrainedForest train_on_features(const FeatureStack& features, const ScribbleSet& wa,
                                const ClassSet& classes, const ForestConfig& config,
                                std::vector<int32_t> allowed_features) {
    if (wa.entries.empty()) throw Error(Errc::empty_annotation, "no scribbled pixels to train on");
    if (features.grid != wa.grid)
        throw Error(Errc::grid_mismatch, "feature stack and scribbles on different grids");
    if (config.n_trees < 1) throw Error(Errc::invalid_argument, "n_trees must be >= 1");
    if (config.min_leaf < 1) throw Error(Errc::invalid_argument, "min_leaf must be >= 1");

    const int n = int(wa.entries.size());
    const int d = features.depth;
    std::sort(allowed_features.begin(), allowed_features.end());

    // Local class indexing over the classes actually scribbled.
    const std::vector<uint8_t>& seen = wa.annotated_classes;
    const int k = int(seen.size());
    uint8_t local_index[256] = {};
    for (int c = 0; c < k; ++c) local_index[seen[size_t(c)]] = uint8_t(c);

    std::vector<float> x(size_t(n) * size_t(d));
    std::vector<uint8_t> y(size_t(n));
    for (int s = 0; s < n; ++s) {
        features.gather(wa.entries[size_t(s)].pixel, x.data() + size_t(s) * size_t(d));
        y[size_t(s)] = local_index[wa.entries[size_t(s)].class_id];
    }

    int mtry = config.max_features_per_split;
    if (mtry <= 0) mtry = int(std::ceil(std::sqrt(double(allowed_features.size()))));

    TrainedForest forest;
    forest.config = config;
    forest.selected_features = std::move(allowed_features);
    forest.classes_seen = seen;
    forest.feature_dim = d;
    forest.num_classes = classes.num_classes;
    forest.trees.resize(size_t(config.n_trees));

    for (int t = 0; t < config.n_trees; ++t) {
        TreeBuilder builder{x,
                            d,
                            y,
                            k,
                            forest.selected_features,
                            mtry,
                            config.min_leaf,
                            SplitMix64::substream(config.seed, uint64_t(t)),
                            {},
                            {},
                            {},
                            {}};
        builder.sample_ids.resize(size_t(n));
        for (int s = 0; s < n; ++s)
            builder.sample_ids[size_t(s)] = int32_t(builder.rng.index(uint64_t(n)));
        builder.build(0, n);
        forest.trees[size_t(t)] = std::move(builder.tree);
    }
    return forest;
}

const TreeNode& leaf_for(const Tree& tree, const float* feature_vec) {
    const TreeNode* node = &tree.nodes[0];
    while (node->feature >= 0) {
        int32_t next =
            feature_vec[size_t(node->feature)] <= node->threshold ? node->left : node->right;
        node = &tree.nodes[size_t(next)];
    }
    return *node;
}

} // namespace

TrainedForest train_forest(const FeatureStack& features, const ScribbleSet& wa,
                           const ClassSet& classes, const ForestConfig& config) {
    std::vector<int32_t> all(size_t(features.depth));
    std::iota(all.begin(), all.end(), 0);
    return train_on_features(features, wa, classes, config, std::move(all));
}

ImportanceScores gini_importance(const TrainedForest& forest) {
    ImportanceScores result;
    result.scores.assign(size_t(forest.feature_dim), 0.0);

    for (const Tree& tree : forest.trees) {
        if (tree.nodes.empty()) continue;
        const double n_root = double(tree.nodes[0].n_samples);
        for (const TreeNode& node : tree.nodes) {
            if (node.feature < 0) continue;
            const TreeNode& left = tree.nodes[size_t(node.left)];
            const TreeNode& right = tree.nodes[size_t(node.right)];
            double decrease = double(node.n_samples) * double(node.gini) -
                              double(left.n_samples) * double(left.gini) -
                              double(right.n_samples) * double(right.gini);
            result.scores[size_t(node.feature)] += decrease / n_root;
            result.any_split = true;
        }
    }
    if (!result.any_split) return result; // all-zero, unnormalized

    for (double& s : result.scores) s /= double(forest.trees.size());
    double total = std::accumulate(result.scores.begin(), result.scores.end(), 0.0);
    if (total > 0.0)
        for (double& s : result.scores) s /= total;
    return result;
}

TrainedForest select_and_retrain(const FeatureStack& features, const ScribbleSet& wa,
                                 const ClassSet& classes, const ForestConfig& config) {
    const int d = features.depth;
    const int n_keep = std::min(std::max(config.n_selected_features, 1), d);

    TrainedForest pilot = train_forest(features, wa, classes, config);
    if (n_keep == d) return pilot;

    ImportanceScores importance = gini_importance(pilot);
    std::vector<int32_t> order(size_t(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
        double sa = importance.scores[size_t(a)], sb = importance.scores[size_t(b)];
        return sa != sb ? sa > sb : a < b;
    });
    order.resize(size_t(n_keep));

    return train_on_features(features, wa, classes, config, std::move(order));
}

ProbabilityMap predict_local(const TrainedForest& forest, const FeatureStack& features) {
    if (features.depth < forest.feature_dim)
        throw Error(Errc::shape_mismatch, "feature stack shallower than the forest's training stack");
    const int k = int(forest.classes_seen.size());
    const int c_total = forest.num_classes;
    const int64_t n = features.grid.size();

    std::vector<float> probs(size_t(n) * size_t(c_total), 0.0f);
    std::vector<float> feature_vec(size_t(features.depth));
    std::vector<double> mean_freq(size_t(k));

    for (int64_t i = 0; i < n; ++i) {
        features.gather(i, feature_vec.data());
        std::fill(mean_freq.begin(), mean_freq.end(), 0.0);
        for (const Tree& tree : forest.trees) {
            const TreeNode& leaf = leaf_for(tree, feature_vec.data());
            double inv_total = 1.0 / double(leaf.n_samples);
            for (int c = 0; c < k; ++c)
                mean_freq[size_t(c)] += double(leaf.histogram[size_t(c)]) * inv_total;
        }
        double sum = 0.0;
        for (int c = 0; c < k; ++c) sum += mean_freq[size_t(c)];
        float* out = probs.data() + size_t(i) * size_t(c_total);
        for (int c = 0; c < k; ++c)
            out[forest.classes_seen[size_t(c)]] = float(mean_freq[size_t(c)] / sum);
    }

    ClassSet classes(c_total);
    return validate_probability_map(
        ProbabilityMap(features.grid, std::move(classes), std::move(probs), MapSource::local));
}

void save_forest(const std::string& path, const TrainedForest& forest) {
    BinaryWriter out(path);
    out.write_magic("RFC1");
    out.write_u32(1); // version
    out.write_u32(uint32_t(forest.config.n_trees));
    out.write_u32(uint32_t(forest.config.n_selected_features));
    out.write_u32(uint32_t(forest.config.max_features_per_split));
    out.write_u32(uint32_t(forest.config.min_leaf));
    out.write_u64(forest.config.seed);
    out.write_u32(uint32_t(forest.feature_dim));
    out.write_u32(uint32_t(forest.num_classes));
    out.write_u32(uint32_t(forest.classes_seen.size()));
    for (uint8_t c : forest.classes_seen) out.write_u32(c);
    out.write_u32(uint32_t(forest.selected_features.size()));
    for (int32_t f : forest.selected_features) out.write_u32(uint32_t(f));
    out.write_u32(uint32_t(forest.trees.size()));
    for (const Tree& tree : forest.trees) {
        out.write_u32(uint32_t(tree.nodes.size()));
        for (const TreeNode& node : tree.nodes) {
            out.write_u16(node.feature < 0 ? uint16_t(0xffff) : uint16_t(node.feature));
            out.write_f32(node.threshold);
            out.write_u32(uint32_t(node.left));
            out.write_u32(uint32_t(node.right));
            out.write_u32(node.n_samples);
            out.write_f32(node.gini);
            if (node.feature < 0)
                for (uint32_t h : node.histogram) out.write_u32(h);
        }
    }
    out.finish();
}

TrainedForest load_forest(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("RFC1");
    uint32_t version = in.read_u32();
    if (version != 1)
        throw Error(Errc::format_error, path + ": unsupported forest version " + std::to_string(version));

    TrainedForest forest;
    forest.config.n_trees = int(in.read_u32());
    forest.config.n_selected_features = int(in.read_u32());
    forest.config.max_features_per_split = int(in.read_u32());
    forest.config.min_leaf = int(in.read_u32());
    forest.config.seed = in.read_u64();
    forest.feature_dim = int(in.read_u32());
    forest.num_classes = int(in.read_u32());

    uint32_t n_seen = in.read_u32();
    if (n_seen == 0 || n_seen > 255) throw Error(Errc::format_error, path + ": bad class count");
    for (uint32_t i = 0; i < n_seen; ++i) forest.classes_seen.push_back(uint8_t(in.read_u32()));
    uint32_t n_selected = in.read_u32();
    for (uint32_t i = 0; i < n_selected; ++i) {
        int32_t f = int32_t(in.read_u32());
        if (f < 0 || f >= forest.feature_dim)
            throw Error(Errc::format_error, path + ": selected feature outside dimension");
        forest.selected_features.push_back(f);
    }

    uint32_t n_trees = in.read_u32();
    forest.trees.resize(n_trees);
    for (uint32_t t = 0; t < n_trees; ++t) {
        uint32_t n_nodes = in.read_u32();
        if (n_nodes == 0) throw Error(Errc::format_error, path + ": empty tree");
        Tree& tree = forest.trees[t];
        tree.nodes.resize(n_nodes);
        for (uint32_t i = 0; i < n_nodes; ++i) {
            TreeNode& node = tree.nodes[i];
            uint16_t feature = in.read_u16();
            node.feature = feature == 0xffff ? -1 : int32_t(feature);
            node.threshold = in.read_f32();
            node.left = int32_t(in.read_u32());
            node.right = int32_t(in.read_u32());
            node.n_samples = in.read_u32();
            node.gini = in.read_f32();
            if (node.feature < 0) {
                node.histogram.resize(n_seen);
                uint64_t total = 0;
                for (uint32_t c = 0; c < n_seen; ++c) {
                    node.histogram[c] = in.read_u32();
                    total += node.histogram[c];
                }
                if (total == 0) throw Error(Errc::format_error, path + ": empty leaf histogram");
            } else if (node.feature >= forest.feature_dim) {
                throw Error(Errc::format_error, path + ": split feature outside dimension");
            }
            if (node.feature >= 0 &&
                (uint32_t(node.left) >= n_nodes || uint32_t(node.right) >= n_nodes))
                throw Error(Errc::format_error, path + ": child index outside tree");
        }
    }
    if (!in.at_eof()) throw Error(Errc::format_error, path + ": trailing bytes");
    return forest;
}

} // namespace scribkit
