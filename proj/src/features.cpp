#include "scribkit/features.hpp"

#include <cmath>
#include <numbers>

#include "scribkit/binary_io.hpp"
#include "scribkit/rng.hpp"

namespace scribkit {

namespace {

constexpr int kSyntheticBankSize = 160;

// Symmetric reflection: ...cba|abc...cba|abc..., total for any index.
int mirror_index(int i, int n) {
    if (n == 1) return 0;
    int period = 2 * n;
    int t = i % period;
    if (t < 0) t += period;
    return t < n ? t : period - 1 - t;
}

Filter make_filter(int k, const double* spatial, const double* color_proj) {
    Filter f;
    f.k = k;
    f.bias = 0.0f;
    f.weights.resize(size_t(k) * k * 3);
    double norm = 0.0;
    for (int i = 0; i < k * k; ++i)
        for (int ch = 0; ch < 3; ++ch) norm += spatial[i] * spatial[i] * color_proj[ch] * color_proj[ch];
    double scale = norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
    for (int i = 0; i < k * k; ++i)
        for (int ch = 0; ch < 3; ++ch)
            f.weights[size_t(i) * 3 + size_t(ch)] = float(spatial[i] * color_proj[ch] * scale);
    return f;
}

void oriented_gaussian_derivative(int k, double sigma, double theta, int order, double* out) {
    int h = k / 2;
    double ct = std::cos(theta), st = std::sin(theta);
    double sum = 0.0;
    for (int y = -h; y <= h; ++y) {
        for (int x = -h; x <= h; ++x) {
            double u = x * ct + y * st;
            double r2 = double(x) * x + double(y) * y;
            double env = std::exp(-r2 / (2.0 * sigma * sigma));
            double v = order == 1 ? -(u / (sigma * sigma)) * env
                                  : ((u * u) / (sigma * sigma) - 1.0) / (sigma * sigma) * env;
            out[(y + h) * k + (x + h)] = v;
            sum += v;
        }
    }
    // Remove residual DC so flat regions give zero response.
    double mean = sum / (k * k);
    for (int i = 0; i < k * k; ++i) out[i] -= mean;
}

void difference_of_gaussians(int k, double sigma_center, double sigma_surround, double* out) {
    int h = k / 2;
    double sum = 0.0;
    for (int y = -h; y <= h; ++y) {
        for (int x = -h; x <= h; ++x) {
            double r2 = double(x) * x + double(y) * y;
            double v = std::exp(-r2 / (2.0 * sigma_center * sigma_center)) /
                           (sigma_center * sigma_center) -
                       std::exp(-r2 / (2.0 * sigma_surround * sigma_surround)) /
                           (sigma_surround * sigma_surround);
            out[(y + h) * k + (x + h)] = v;
            sum += v;
        }
    }
    double mean = sum / (k * k);
    for (int i = 0; i < k * k; ++i) out[i] -= mean;
}

void gaussian_lowpass(int k, double sigma, double* out) {
    int h = k / 2;
    for (int y = -h; y <= h; ++y)
        for (int x = -h; x <= h; ++x)
            out[(y + h) * k + (x + h)] =
                std::exp(-(double(x) * x + double(y) * y) / (2.0 * sigma * sigma));
}

} // namespace

FilterBank load_filter_bank(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("FBK1");
    uint32_t count = in.read_u32();
    if (count == 0) throw Error(Errc::format_error, path + ": filter bank declares zero filters");
    if (count > 100000) throw Error(Errc::format_error, path + ": implausible filter count");

    FilterBank bank;
    bank.filters.reserve(count);
    for (uint32_t d = 0; d < count; ++d) {
        Filter f;
        uint32_t k = in.read_u32();
        if (k == 0 || k % 2 == 0 || k > 255)
            throw Error(Errc::shape_mismatch,
                        path + ": filter " + std::to_string(d) + " has invalid kernel side " +
                            std::to_string(k));
        f.k = int(k);
        f.bias = in.read_f32();
        f.weights.resize(size_t(k) * k * 3);
        in.read_f32_array(f.weights.data(), f.weights.size());
        for (float w : f.weights)
            if (!std::isfinite(w))
                throw Error(Errc::non_finite_value,
                            path + ": filter " + std::to_string(d) + " has non-finite weight");
        if (!std::isfinite(f.bias))
            throw Error(Errc::non_finite_value,
                        path + ": filter " + std::to_string(d) + " has non-finite bias");
        bank.filters.push_back(std::move(f));
    }
    if (!in.at_eof()) throw Error(Errc::format_error, path + ": trailing bytes after last filter");
    return bank;
}

void save_filter_bank(const std::string& path, const FilterBank& bank) {
    if (bank.size() == 0) throw Error(Errc::invalid_argument, "refusing to write empty filter bank");
    BinaryWriter out(path);
    out.write_magic("FBK1");
    out.write_u32(uint32_t(bank.size()));
    for (const Filter& f : bank.filters) {
        out.write_u32(uint32_t(f.k));
        out.write_f32(f.bias);
        out.write_f32_array(f.weights.data(), f.weights.size());
    }
    out.finish();
}

FilterBank synthetic_filter_bank(uint64_t seed) {
    SplitMix64 rng(seed ^ 0x5cb1bee5u);

    const double color_projs[3][3] = {
        {0.299, 0.587, 0.114},                   // luminance
        {0.7071067812, -0.7071067812, 0.0},      // red-green opponent
        {-0.4082482905, -0.4082482905, 0.8164965809}, // blue-yellow opponent
    };

    FilterBank bank;
    bank.filters.reserve(kSyntheticBankSize);
    std::vector<double> spatial;

    // 3 planes x 3 scales x 8 orientations x 2 derivative orders = 144.
    const double base_sigmas[3] = {0.7, 1.1, 1.7};
    for (int plane = 0; plane < 3; ++plane) {
        for (int s = 0; s < 3; ++s) {
            double sigma = base_sigmas[s] * rng.uniform(0.95, 1.05);
            double theta0 = rng.uniform(-0.05, 0.05);
            for (int o = 0; o < 8; ++o) {
                double theta = theta0 + o * std::numbers::pi / 8.0;
                for (int order = 1; order <= 2; ++order) {
                    int k = 5;
                    spatial.assign(size_t(k) * k, 0.0);
                    oriented_gaussian_derivative(k, sigma, theta, order, spatial.data());
                    bank.filters.push_back(make_filter(k, spatial.data(), color_projs[plane]));
                }
            }
        }
    }

    // Center-surround: 3 planes x 4 scales = 12.
    const double dog_centers[4] = {0.5, 0.7, 1.0, 1.4};
    for (int plane = 0; plane < 3; ++plane) {
        for (int s = 0; s < 4; ++s) {
            double sc = dog_centers[s] * rng.uniform(0.95, 1.05);
            int k = s < 2 ? 5 : 7;
            spatial.assign(size_t(k) * k, 0.0);
            difference_of_gaussians(k, sc, 2.0 * sc, spatial.data());
            bank.filters.push_back(make_filter(k, spatial.data(), color_projs[plane]));
        }
    }

    // Low-pass: one per plane = 3.
    for (int plane = 0; plane < 3; ++plane) {
        int k = 5;
        spatial.assign(size_t(k) * k, 0.0);
        gaussian_lowpass(k, 1.2 * rng.uniform(0.95, 1.05), spatial.data());
        bank.filters.push_back(make_filter(k, spatial.data(), color_projs[plane]));
    }

    // Center spike on luminance = 1; total 160.
    {
        int k = 5;
        spatial.assign(size_t(k) * k, 0.0);
        spatial[size_t(k) * k / 2] = 1.0;
        bank.filters.push_back(make_filter(k, spatial.data(), color_projs[0]));
    }

    return bank;
}

FeatureStack extract_features(const RgbImage& img, const FilterBank& bank) {
    if (bank.size() == 0) throw Error(Errc::invalid_argument, "empty filter bank");
    const PixelGrid& grid = img.grid();
    const int H = grid.height, W = grid.width;
    const size_t n = size_t(grid.size());

    int pad = 0;
    for (const Filter& f : bank.filters) pad = std::max(pad, f.k / 2);

    // Mirror-pad all three planes once; every filter then reads without
    // bounds checks.
    const int ph = H + 2 * pad, pw = W + 2 * pad;
    std::vector<float> padded(size_t(3) * ph * pw);
    for (int ch = 0; ch < 3; ++ch) {
        std::span<const float> plane = img.plane(ch);
        float* dst = padded.data() + size_t(ch) * ph * pw;
        for (int r = 0; r < ph; ++r) {
            int sr = mirror_index(r - pad, H);
            for (int c = 0; c < pw; ++c)
                dst[size_t(r) * pw + size_t(c)] = plane[size_t(sr) * W + size_t(mirror_index(c - pad, W))];
        }
    }

    FeatureStack stack;
    stack.grid = grid;
    stack.depth = bank.size();
    stack.values.resize(size_t(stack.depth) * n);

    std::vector<double> response(n);
    for (int d = 0; d < bank.size(); ++d) {
        const Filter& f = bank.filters[size_t(d)];
        const int h = f.k / 2;
        for (int r = 0; r < H; ++r) {
            for (int c = 0; c < W; ++c) {
                double acc = f.bias;
                for (int dy = -h; dy <= h; ++dy) {
                    const size_t row_base = size_t(r + pad + dy) * pw + size_t(c + pad - h);
                    const float* w = f.weights.data() + size_t(dy + h) * f.k * 3;
                    for (int dx = 0; dx < f.k; ++dx) {
                        acc += padded[0 * size_t(ph) * pw + row_base + size_t(dx)] * w[dx * 3 + 0] +
                               padded[1 * size_t(ph) * pw + row_base + size_t(dx)] * w[dx * 3 + 1] +
                               padded[2 * size_t(ph) * pw + row_base + size_t(dx)] * w[dx * 3 + 2];
                    }
                }
                response[size_t(r) * W + size_t(c)] = acc;
            }
        }

        double mean = 0.0;
        for (double v : response) mean += v;
        mean /= double(n);
        double var = 0.0;
        for (double v : response) var += (v - mean) * (v - mean);
        var /= double(n);

        float* out = stack.values.data() + size_t(d) * n;
        if (var < 1e-30) {
            std::fill(out, out + n, 0.0f);
        } else {
            double inv_sigma = 1.0 / std::sqrt(var);
            for (size_t i = 0; i < n; ++i) out[i] = float((response[i] - mean) * inv_sigma);
        }
    }
    return stack;
}

} // namespace scribkit
