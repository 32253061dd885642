#pragma once

#include <string>
#include <vector>

#include "scribkit/core.hpp"

namespace scribkit {

/// One k x k x 3 correlation kernel with bias. Weights are stored in
/// (row, col, channel) order, channel innermost.
struct Filter {
    int k = 0;
    float bias = 0.0f;
    std::vector<float> weights; // k*k*3

    float weight(int row, int col, int channel) const {
        return weights[size_t((row * k + col) * 3 + channel)];
    }
};

/// First-layer style filter bank applied to RGB images.
struct FilterBank {
    std::vector<Filter> filters;

    int size() const { return int(filters.size()); }
};

/// Per-pixel feature planes, one per filter, each standardized over the
/// image to zero mean / unit variance (constant channels become zeros).
/// Layout is plane-major: channel d occupies values[d*H*W .. (d+1)*H*W).
struct FeatureStack {
    PixelGrid grid;
    int depth = 0;
    std::vector<float> values;

    std::span<const float> channel(int d) const {
        return {values.data() + size_t(d) * size_t(grid.size()), size_t(grid.size())};
    }
    float at(int64_t pixel, int d) const {
        return values[size_t(d) * size_t(grid.size()) + size_t(pixel)];
    }
    /// Copies the feature vector of one pixel into out[0..depth).
    void gather(int64_t pixel, float* out) const {
        size_t n = size_t(grid.size());
        for (int d = 0; d < depth; ++d) out[size_t(d)] = values[size_t(d) * n + size_t(pixel)];
    }
};

/// FBK1 container: magic "FBK1", u32 filter count, then per filter
/// u32 k, f32 bias, k*k*3 f32 weights in (row, col, channel) order.
/// All integers and floats little-endian.
FilterBank load_filter_bank(const std::string& path);
void save_filter_bank(const std::string& path, const FilterBank& bank);

/// Deterministic 160-filter stand-in for pretrained first-layer weights:
/// oriented Gaussian-derivative, center-surround and low-pass kernels over
/// luminance and two color-opponent projections. The seed jitters scales
/// and orientations; identical seeds produce bit-identical banks.
FilterBank synthetic_filter_bank(uint64_t seed);

/// Correlates the image with every filter (stride 1, mirror padding),
/// adds the bias, then standardizes each channel over the image.
FeatureStack extract_features(const RgbImage& img, const FilterBank& bank);

} // namespace scribkit
