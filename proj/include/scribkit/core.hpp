#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scribkit/error.hpp"

namespace scribkit {

/// Sentinel label for pixels without an annotation. Chosen to match the
/// indexed-image convention of common segmentation datasets, so label
/// images round-trip through 8-bit PNGs without remapping.
inline constexpr uint8_t kUnlabeled = 255;

/// Rectangular pixel lattice. Pixel indices are row-major:
/// index = row * width + col.
struct PixelGrid {
    int height = 0;
    int width = 0;

    PixelGrid() = default;
    PixelGrid(int h, int w) : height(h), width(w) {
        if (h < 1 || w < 1)
            throw Error(Errc::invalid_argument, "grid dimensions must be >= 1");
    }

    int64_t size() const { return int64_t(height) * width; }
    int64_t index(int row, int col) const { return int64_t(row) * width + col; }
    int row(int64_t i) const { return int(i / width); }
    int col(int64_t i) const { return int(i % width); }

    bool operator==(const PixelGrid&) const = default;
};

/// The label alphabet. Class ids are 0..num_classes-1; kUnlabeled (255)
/// is reserved and never a valid class id, so num_classes <= 255.
struct ClassSet {
    int num_classes = 0;
    std::vector<std::string> names; // optional, empty or size num_classes

    ClassSet() = default;
    explicit ClassSet(int c, std::vector<std::string> n = {}) : num_classes(c), names(std::move(n)) {
        if (c < 2 || c > 255)
            throw Error(Errc::invalid_argument, "class count must be in [2, 255]");
        if (!names.empty() && int(names.size()) != c)
            throw Error(Errc::invalid_argument, "class name list length must equal class count");
    }

    bool contains(int class_id) const { return class_id >= 0 && class_id < num_classes; }
    bool same_alphabet(const ClassSet& other) const { return num_classes == other.num_classes; }
};

/// 8-bit RGB image mapped to [0,1], stored as three intensity planes.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(PixelGrid grid, std::vector<float> r, std::vector<float> g, std::vector<float> b);

    /// Constant-color image (handy for tests and for disabling edge weights).
    static RgbImage constant(PixelGrid grid, float r, float g, float b);

    const PixelGrid& grid() const { return grid_; }
    std::span<const float> plane(int channel) const;
    float at(int64_t pixel, int channel) const { return planes_[channel][size_t(pixel)]; }

private:
    PixelGrid grid_;
    std::vector<float> planes_[3];
};

/// Dense hard labeling: one class id per pixel, kUnlabeled for none.
struct LabelMap {
    PixelGrid grid;
    std::vector<uint8_t> labels; // length grid.size()

    LabelMap() = default;
    LabelMap(PixelGrid g, std::vector<uint8_t> l);
    static LabelMap filled(PixelGrid g, uint8_t value);

    uint8_t at(int64_t i) const { return labels[size_t(i)]; }
    bool is_full() const; // no kUnlabeled anywhere
    /// Sorted list of class ids (excluding kUnlabeled) occurring in the map.
    std::vector<uint8_t> present_classes() const;
};

/// One scribbled pixel.
struct ScribbleEntry {
    int64_t pixel = 0;
    uint8_t class_id = 0;

    bool operator==(const ScribbleEntry&) const = default;
};

/// Sparse pixel annotations plus the set of classes they touch.
/// Invariant: no duplicate pixel indices; annotated_classes is exactly the
/// sorted set of class ids occurring in entries.
struct ScribbleSet {
    PixelGrid grid;
    std::vector<ScribbleEntry> entries;        // sorted by pixel index
    std::vector<uint8_t> annotated_classes;    // sorted, unique

    ScribbleSet() = default;
    /// Validates entries against the grid and classes, sorts by pixel index,
    /// merges exact duplicates and rejects conflicting ones.
    ScribbleSet(PixelGrid g, std::vector<ScribbleEntry> e, const ClassSet& classes);

    size_t size() const { return entries.size(); }
};

/// Where a probability map came from. Drives the automatic Potts lambda
/// choice (50 for a global-only map, 10 otherwise).
enum class MapSource { local, global, combined, other };

/// Per-pixel class probability field. Layout: row-major pixels, class
/// index innermost (pixel i occupies probs[i*C .. i*C+C-1]).
struct ProbabilityMap {
    PixelGrid grid;
    ClassSet classes;
    std::vector<float> probs;
    MapSource source = MapSource::other;

    ProbabilityMap() = default;
    ProbabilityMap(PixelGrid g, ClassSet c, std::vector<float> p, MapSource s = MapSource::other);

    static ProbabilityMap uniform(PixelGrid g, ClassSet c, MapSource s = MapSource::other);

    std::span<const float> at(int64_t pixel) const {
        return {probs.data() + size_t(pixel) * classes.num_classes, size_t(classes.num_classes)};
    }
    std::span<float> at(int64_t pixel) {
        return {probs.data() + size_t(pixel) * classes.num_classes, size_t(classes.num_classes)};
    }
};

/// Soft segmentation mask: per-pixel point on the class simplex. Same
/// layout as ProbabilityMap; kept as a distinct type because masks are the
/// optimization variable of the MAP solvers, not a semantic model.
struct SoftMask {
    PixelGrid grid;
    ClassSet classes;
    std::vector<float> mask;

    SoftMask() = default;
    SoftMask(PixelGrid g, ClassSet c, std::vector<float> m);

    std::span<const float> at(int64_t pixel) const {
        return {mask.data() + size_t(pixel) * classes.num_classes, size_t(classes.num_classes)};
    }
    std::span<float> at(int64_t pixel) {
        return {mask.data() + size_t(pixel) * classes.num_classes, size_t(classes.num_classes)};
    }
};

/// Checks finiteness and nonnegativity, then renormalizes every pixel
/// whose probability vector does not already sum to 1 within 1e-6.
/// Pixels already within tolerance are left untouched, so the operation
/// is idempotent. Throws on NaN/Inf or zero-sum pixels.
ProbabilityMap validate_probability_map(ProbabilityMap p);

/// True when every pixel vector is nonnegative and sums to 1 within tol.
bool is_on_simplex(std::span<const float> values, int num_classes, double tol = 1e-6);

/// Replaces each scribbled pixel's class by the ground-truth class at that
/// position. Returns nullopt (rejected) when the corrected scribbles do
/// not cover every class present in the ground truth.
std::optional<ScribbleSet> curate_scribbles(const ScribbleSet& wa, const LabelMap& ground_truth,
                                            const ClassSet& classes);

/// Dense map equal to the scribble classes at scribbled pixels and
/// kUnlabeled elsewhere.
LabelMap scribbles_to_labelmap(const ScribbleSet& wa);

/// Inverse of scribbles_to_labelmap: every labeled pixel becomes an entry.
ScribbleSet labelmap_to_scribbles(const LabelMap& lm, const ClassSet& classes);

/// Text scribble format: UTF-8 lines "row col class". Blank lines and
/// lines starting with '#' are skipped.
ScribbleSet load_scribbles_text(const std::string& path, PixelGrid grid, const ClassSet& classes);
void save_scribbles_text(const std::string& path, const ScribbleSet& wa);

} // namespace scribkit
