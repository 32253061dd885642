#pragma once

#include <string>

#include "scribkit/core.hpp"

namespace scribkit {

/// Reads an 8-bit PNG as RGB in [0,1]. Grayscale, palette and alpha
/// variants are converted; 16-bit depth is reduced to 8.
RgbImage load_rgb_png(const std::string& path);

void save_rgb_png(const std::string& path, const RgbImage& img);

/// Reads a single-channel 8-bit PNG as a label map: the raw gray value or
/// palette index at each pixel is the class id, 255 meaning unlabeled.
/// RGB inputs are rejected. When `grid` is given, dimensions must match.
LabelMap load_label_png(const std::string& path);
LabelMap load_label_png(const std::string& path, PixelGrid expected_grid);

/// Writes a label map as an 8-bit grayscale PNG (one byte per pixel).
void save_label_png(const std::string& path, const LabelMap& lm);

/// Loads scribbles from either a sparse label PNG (.png) or the text
/// format (.txt/anything else), validating against grid and classes.
ScribbleSet load_scribbles(const std::string& path, PixelGrid grid, const ClassSet& classes);
void save_scribbles(const std::string& path, const ScribbleSet& wa);

} // namespace scribkit
