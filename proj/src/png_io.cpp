#include "scribkit/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <memory>
#include <vector>

namespace scribkit {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;
};

// Reads the whole image as `channels` interleaved bytes per pixel after
// applying the given libpng transforms.
std::vector<uint8_t> read_png_bytes(const std::string& path, int target_channels, bool to_rgb,
                                    PixelGrid& grid_out) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw Error(Errc::io_error, "cannot open " + path);

    uint8_t signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
        throw Error(Errc::format_error, path + " is not a PNG file");

    PngReader reader;
    if (!reader.png || !reader.info) throw Error(Errc::io_error, "libpng init failed");
    if (setjmp(png_jmpbuf(reader.png)))
        throw Error(Errc::format_error, "libpng failed to decode " + path);

    png_init_io(reader.png, file.get());
    png_set_sig_bytes(reader.png, 8);
    png_read_info(reader.png, reader.info);

    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(reader.png, reader.info, &width, &height, &bit_depth, &color_type, nullptr,
                 nullptr, nullptr);

    if (to_rgb) {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(reader.png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
            png_set_expand_gray_1_2_4_to_8(reader.png);
        if (png_get_valid(reader.png, reader.info, PNG_INFO_tRNS))
            png_set_tRNS_to_alpha(reader.png);
        if (bit_depth == 16) png_set_strip_16(reader.png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(reader.png);
        png_set_strip_alpha(reader.png);
    } else {
        // Label image: keep palette indices / gray values verbatim.
        if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE)
            throw Error(Errc::format_error,
                        path + ": label PNG must be single-channel (gray or palette)");
        if (bit_depth == 16) png_set_strip_16(reader.png);
        if (bit_depth < 8) png_set_packing(reader.png);
    }

    png_read_update_info(reader.png, reader.info);
    int channels = png_get_channels(reader.png, reader.info);
    if (channels != target_channels)
        throw Error(Errc::format_error, path + ": unexpected channel count after decode");

    grid_out = PixelGrid(int(height), int(width));
    std::vector<uint8_t> data(size_t(width) * height * size_t(channels));
    std::vector<png_bytep> rows(height);
    for (png_uint_32 r = 0; r < height; ++r)
        rows[r] = data.data() + size_t(r) * width * size_t(channels);
    png_read_image(reader.png, rows.data());
    png_read_end(reader.png, nullptr);
    return data;
}

void write_png_bytes(const std::string& path, PixelGrid grid, int color_type, int channels,
                     const uint8_t* data) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw Error(Errc::io_error, "cannot open " + path + " for writing");

    PngWriter writer;
    if (!writer.png || !writer.info) throw Error(Errc::io_error, "libpng init failed");
    if (setjmp(png_jmpbuf(writer.png)))
        throw Error(Errc::io_error, "libpng failed to encode " + path);

    png_init_io(writer.png, file.get());
    png_set_IHDR(writer.png, writer.info, png_uint_32(grid.width), png_uint_32(grid.height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    for (int r = 0; r < grid.height; ++r)
        png_write_row(writer.png,
                      const_cast<png_bytep>(data + size_t(r) * grid.width * size_t(channels)));
    png_write_end(writer.png, nullptr);
}

} // namespace

RgbImage load_rgb_png(const std::string& path) {
    PixelGrid grid;
    std::vector<uint8_t> data = read_png_bytes(path, 3, /*to_rgb=*/true, grid);
    size_t n = size_t(grid.size());
    std::vector<float> r(n), g(n), b(n);
    for (size_t i = 0; i < n; ++i) {
        r[i] = float(data[i * 3 + 0]) / 255.0f;
        g[i] = float(data[i * 3 + 1]) / 255.0f;
        b[i] = float(data[i * 3 + 2]) / 255.0f;
    }
    return RgbImage(grid, std::move(r), std::move(g), std::move(b));
}

void save_rgb_png(const std::string& path, const RgbImage& img) {
    const PixelGrid& grid = img.grid();
    size_t n = size_t(grid.size());
    std::vector<uint8_t> data(n * 3);
    for (size_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            float v = img.at(int64_t(i), ch) * 255.0f + 0.5f;
            data[i * 3 + size_t(ch)] = uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    write_png_bytes(path, grid, PNG_COLOR_TYPE_RGB, 3, data.data());
}

LabelMap load_label_png(const std::string& path) {
    PixelGrid grid;
    std::vector<uint8_t> data = read_png_bytes(path, 1, /*to_rgb=*/false, grid);
    return LabelMap(grid, std::move(data));
}

LabelMap load_label_png(const std::string& path, PixelGrid expected_grid) {
    LabelMap lm = load_label_png(path);
    if (lm.grid != expected_grid)
        throw Error(Errc::grid_mismatch, path + ": label map dimensions do not match image");
    return lm;
}

void save_label_png(const std::string& path, const LabelMap& lm) {
    write_png_bytes(path, lm.grid, PNG_COLOR_TYPE_GRAY, 1, lm.labels.data());
}

ScribbleSet load_scribbles(const std::string& path, PixelGrid grid, const ClassSet& classes) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0) {
        LabelMap lm = load_label_png(path, grid);
        for (uint8_t l : lm.labels)
            if (l != kUnlabeled && !classes.contains(l))
                throw Error(Errc::format_error, path + ": scribble class id outside class set");
        return labelmap_to_scribbles(lm, classes);
    }
    return load_scribbles_text(path, grid, classes);
}

void save_scribbles(const std::string& path, const ScribbleSet& wa) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0)
        save_label_png(path, scribbles_to_labelmap(wa));
    else
        save_scribbles_text(path, wa);
}

} // namespace scribkit
