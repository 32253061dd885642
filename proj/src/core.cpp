#include "scribkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scribkit {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::non_finite_value: return "NonFiniteValue";
        case Errc::degenerate_pixel: return "DegeneratePixel";
        case Errc::grid_mismatch: return "GridMismatch";
        case Errc::class_set_mismatch: return "ClassSetMismatch";
        case Errc::format_error: return "FormatError";
        case Errc::shape_mismatch: return "ShapeMismatch";
        case Errc::empty_annotation: return "EmptyAnnotation";
        case Errc::unlabeled_pixel: return "UnlabeledPixel";
        case Errc::instance_too_large: return "InstanceTooLarge";
        case Errc::empty_evaluation: return "EmptyEvaluation";
        case Errc::missing_ground_truth: return "MissingGroundTruth";
        case Errc::missing_prediction: return "MissingPrediction";
        case Errc::duplicate_scribble: return "DuplicateScribble";
        case Errc::io_error: return "IoError";
        case Errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

RgbImage::RgbImage(PixelGrid grid, std::vector<float> r, std::vector<float> g, std::vector<float> b)
    : grid_(grid) {
    planes_[0] = std::move(r);
    planes_[1] = std::move(g);
    planes_[2] = std::move(b);
    for (const auto& plane : planes_) {
        if (int64_t(plane.size()) != grid_.size())
            throw Error(Errc::shape_mismatch, "image plane length does not match grid");
        for (float v : plane) {
            if (!std::isfinite(v))
                throw Error(Errc::non_finite_value, "image intensity is not finite");
            if (v < 0.0f || v > 1.0f)
                throw Error(Errc::invalid_argument, "image intensity outside [0,1]");
        }
    }
}

RgbImage RgbImage::constant(PixelGrid grid, float r, float g, float b) {
    size_t n = size_t(grid.size());
    return RgbImage(grid, std::vector<float>(n, r), std::vector<float>(n, g),
                    std::vector<float>(n, b));
}

std::span<const float> RgbImage::plane(int channel) const {
    if (channel < 0 || channel > 2)
        throw Error(Errc::invalid_argument, "channel index must be 0..2");
    return planes_[channel];
}

LabelMap::LabelMap(PixelGrid g, std::vector<uint8_t> l) : grid(g), labels(std::move(l)) {
    if (int64_t(labels.size()) != grid.size())
        throw Error(Errc::shape_mismatch, "label array length does not match grid");
}

LabelMap LabelMap::filled(PixelGrid g, uint8_t value) {
    return LabelMap(g, std::vector<uint8_t>(size_t(g.size()), value));
}

bool LabelMap::is_full() const {
    return std::none_of(labels.begin(), labels.end(), [](uint8_t l) { return l == kUnlabeled; });
}

std::vector<uint8_t> LabelMap::present_classes() const {
    bool seen[256] = {};
    for (uint8_t l : labels) seen[l] = true;
    std::vector<uint8_t> out;
    for (int c = 0; c < 255; ++c)
        if (seen[c]) out.push_back(uint8_t(c));
    return out;
}

ScribbleSet::ScribbleSet(PixelGrid g, std::vector<ScribbleEntry> e, const ClassSet& classes)
    : grid(g), entries(std::move(e)) {
    for (const auto& entry : entries) {
        if (entry.pixel < 0 || entry.pixel >= grid.size())
            throw Error(Errc::invalid_argument, "scribble pixel index outside grid");
        if (!classes.contains(entry.class_id))
            throw Error(Errc::invalid_argument,
                        "scribble class id " + std::to_string(int(entry.class_id)) + " outside class set");
    }
    std::sort(entries.begin(), entries.end(), [](const ScribbleEntry& a, const ScribbleEntry& b) {
        return a.pixel != b.pixel ? a.pixel < b.pixel : a.class_id < b.class_id;
    });
    // Merge benign duplicates; a pixel scribbled with two different classes
    // is an annotation conflict we refuse to resolve silently.
    std::vector<ScribbleEntry> merged;
    merged.reserve(entries.size());
    for (const auto& entry : entries) {
        if (!merged.empty() && merged.back().pixel == entry.pixel) {
            if (merged.back().class_id != entry.class_id)
                throw Error(Errc::duplicate_scribble,
                            "pixel " + std::to_string(entry.pixel) + " scribbled with conflicting classes");
            continue;
        }
        merged.push_back(entry);
    }
    entries = std::move(merged);

    bool seen[256] = {};
    for (const auto& entry : entries) seen[entry.class_id] = true;
    annotated_classes.clear();
    for (int c = 0; c < classes.num_classes; ++c)
        if (seen[c]) annotated_classes.push_back(uint8_t(c));
}

ProbabilityMap::ProbabilityMap(PixelGrid g, ClassSet c, std::vector<float> p, MapSource s)
    : grid(g), classes(std::move(c)), probs(std::move(p)), source(s) {
    if (int64_t(probs.size()) != grid.size() * classes.num_classes)
        throw Error(Errc::shape_mismatch, "probability array length does not match grid x classes");
}

ProbabilityMap ProbabilityMap::uniform(PixelGrid g, ClassSet c, MapSource s) {
    float v = 1.0f / float(c.num_classes);
    std::vector<float> p(size_t(g.size()) * c.num_classes, v);
    return ProbabilityMap(g, std::move(c), std::move(p), s);
}

SoftMask::SoftMask(PixelGrid g, ClassSet c, std::vector<float> m)
    : grid(g), classes(std::move(c)), mask(std::move(m)) {
    if (int64_t(mask.size()) != grid.size() * classes.num_classes)
        throw Error(Errc::shape_mismatch, "mask array length does not match grid x classes");
}

bool is_on_simplex(std::span<const float> values, int num_classes, double tol) {
    if (num_classes <= 0 || values.size() % size_t(num_classes) != 0) return false;
    for (size_t i = 0; i < values.size(); i += size_t(num_classes)) {
        double sum = 0.0;
        for (int c = 0; c < num_classes; ++c) {
            float v = values[i + size_t(c)];
            if (!std::isfinite(v) || v < 0.0f) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

ProbabilityMap validate_probability_map(ProbabilityMap p) {
    const int C = p.classes.num_classes;
    for (int64_t i = 0; i < p.grid.size(); ++i) {
        auto pixel = p.at(i);
        double sum = 0.0;
        for (int c = 0; c < C; ++c) {
            float v = pixel[size_t(c)];
            if (!std::isfinite(v))
                throw Error(Errc::non_finite_value, "probability at pixel " + std::to_string(i));
            if (v < 0.0f)
                throw Error(Errc::invalid_argument,
                            "negative probability at pixel " + std::to_string(i));
            sum += v;
        }
        if (sum == 0.0)
            throw Error(Errc::degenerate_pixel,
                        "zero-sum probability vector at pixel " + std::to_string(i));
        if (std::abs(sum - 1.0) > 1e-6) {
            for (int c = 0; c < C; ++c) pixel[size_t(c)] = float(pixel[size_t(c)] / sum);
        }
    }
    return p;
}

std::optional<ScribbleSet> curate_scribbles(const ScribbleSet& wa, const LabelMap& ground_truth,
                                            const ClassSet& classes) {
    if (wa.grid != ground_truth.grid)
        throw Error(Errc::grid_mismatch, "scribbles and ground truth on different grids");
    if (!ground_truth.is_full())
        throw Error(Errc::unlabeled_pixel, "ground truth must be a full label map");

    std::vector<ScribbleEntry> corrected;
    corrected.reserve(wa.entries.size());
    for (const auto& entry : wa.entries)
        corrected.push_back({entry.pixel, ground_truth.at(entry.pixel)});
    ScribbleSet curated(wa.grid, std::move(corrected), classes);

    // Keep only images whose scribbles touch every ground-truth class.
    auto gt_classes = ground_truth.present_classes();
    if (!std::includes(curated.annotated_classes.begin(), curated.annotated_classes.end(),
                       gt_classes.begin(), gt_classes.end()))
        return std::nullopt;
    return curated;
}

LabelMap scribbles_to_labelmap(const ScribbleSet& wa) {
    LabelMap lm = LabelMap::filled(wa.grid, kUnlabeled);
    for (const auto& entry : wa.entries) lm.labels[size_t(entry.pixel)] = entry.class_id;
    return lm;
}

ScribbleSet labelmap_to_scribbles(const LabelMap& lm, const ClassSet& classes) {
    std::vector<ScribbleEntry> entries;
    for (int64_t i = 0; i < lm.grid.size(); ++i)
        if (lm.at(i) != kUnlabeled) entries.push_back({i, lm.at(i)});
    return ScribbleSet(lm.grid, std::move(entries), classes);
}

ScribbleSet load_scribbles_text(const std::string& path, PixelGrid grid, const ClassSet& classes) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);
    std::vector<ScribbleEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long row, col, cls;
        if (!(ls >> row >> col >> cls))
            throw Error(Errc::format_error, path + ":" + std::to_string(line_no) + ": expected 'row col class'");
        if (row < 0 || row >= grid.height || col < 0 || col >= grid.width)
            throw Error(Errc::grid_mismatch,
                        path + ":" + std::to_string(line_no) + ": pixel outside grid");
        if (cls < 0 || cls >= classes.num_classes)
            throw Error(Errc::format_error,
                        path + ":" + std::to_string(line_no) + ": class id outside class set");
        entries.push_back({grid.index(int(row), int(col)), uint8_t(cls)});
    }
    return ScribbleSet(grid, std::move(entries), classes);
}

void save_scribbles_text(const std::string& path, const ScribbleSet& wa) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    for (const auto& entry : wa.entries)
        out << wa.grid.row(entry.pixel) << ' ' << wa.grid.col(entry.pixel) << ' '
            << int(entry.class_id) << '\n';
    if (!out) throw Error(Errc::io_error, "write failed: " + path);
}

} // namespace scribkit
