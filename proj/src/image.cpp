#include "wavefuse/image.hpp"

#include <algorithm>
#include <cmath>

namespace wavefuse {

namespace {

constexpr double kLumaR = 0.2126;
constexpr double kLumaG = 0.7152;
constexpr double kLumaB = 0.0722;

// sRGB <-> XYZ, D65 white point.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kXyzToRgb[3][3] = {
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
};

double srgb_decode(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_encode(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

void require_rgb(const ImagePlanar& img, const char* op) {
    if (img.channels != 3)
        throw Error(ErrorKind::Invalid, std::string(op) + ": expected 3 channels");
}

// Percentile by linear interpolation between closest ranks of the sorted data.
double percentile_of_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

ImagePlanar::ImagePlanar(int h, int w, int c, ColorSpace s, double fill)
    : height(h), width(w), channels(c), space(s),
      data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h <= 0 || w <= 0 || (c != 1 && c != 3))
        throw Error(ErrorKind::Invalid, "ImagePlanar: bad dimensions");
}

ImagePlanar make_gray(int height, int width, double fill) {
    return ImagePlanar(height, width, 1, ColorSpace::Gray, fill);
}

ImagePlanar make_rgb(int height, int width, double r, double g, double b) {
    ImagePlanar img(height, width, 3, ColorSpace::Srgb);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            img.at(0, y, x) = r;
            img.at(1, y, x) = g;
            img.at(2, y, x) = b;
        }
    return img;
}

void clamp01(ImagePlanar& img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

bool all_finite(const ImagePlanar& img) {
    for (double v : img.data)
        if (!std::isfinite(v)) return false;
    return true;
}

double min_value(const ImagePlanar& img) {
    return *std::min_element(img.data.begin(), img.data.end());
}

double max_value(const ImagePlanar& img) {
    return *std::max_element(img.data.begin(), img.data.end());
}

double mean_value(const ImagePlanar& img) {
    double acc = 0.0;
    for (double v : img.data) acc += v;
    return acc / static_cast<double>(img.data.size());
}

double rms_diff(const ImagePlanar& a, const ImagePlanar& b) {
    if (!a.same_shape(b))
        throw Error(ErrorKind::Invalid, "rms_diff: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.data.size()));
}

ImagePlanar extract_channel(const ImagePlanar& img, int c) {
    if (c < 0 || c >= img.channels)
        throw Error(ErrorKind::Invalid, "extract_channel: channel out of range");
    ImagePlanar plane(img.height, img.width, 1, ColorSpace::Gray);
    const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
    std::copy_n(img.data.begin() + static_cast<std::size_t>(c) * n, n, plane.data.begin());
    return plane;
}

void set_channel(ImagePlanar& img, int c, const ImagePlanar& plane) {
    if (c < 0 || c >= img.channels || plane.height != img.height ||
        plane.width != img.width || plane.channels != 1)
        throw Error(ErrorKind::Invalid, "set_channel: shape mismatch");
    const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
    std::copy_n(plane.data.begin(), n, img.data.begin() + static_cast<std::size_t>(c) * n);
}

ImagePlanar rgb_to_xyz(const ImagePlanar& img) {
    require_rgb(img, "rgb_to_xyz");
    if (img.space != ColorSpace::Srgb)
        throw Error(ErrorKind::Invalid, "rgb_to_xyz: expected sRGB tag");
    ImagePlanar out(img.height, img.width, 3, ColorSpace::Xyz);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double lin[3] = {
                srgb_decode(img.at(0, y, x)),
                srgb_decode(img.at(1, y, x)),
                srgb_decode(img.at(2, y, x)),
            };
            for (int c = 0; c < 3; ++c)
                out.at(c, y, x) = kRgbToXyz[c][0] * lin[0] + kRgbToXyz[c][1] * lin[1] +
                                  kRgbToXyz[c][2] * lin[2];
        }
    return out;
}

ImagePlanar xyz_to_rgb(const ImagePlanar& img) {
    require_rgb(img, "xyz_to_rgb");
    if (img.space != ColorSpace::Xyz)
        throw Error(ErrorKind::Invalid, "xyz_to_rgb: expected XYZ tag");
    ImagePlanar out(img.height, img.width, 3, ColorSpace::Srgb);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double xyz[3] = {img.at(0, y, x), img.at(1, y, x), img.at(2, y, x)};
            for (int c = 0; c < 3; ++c) {
                double lin = kXyzToRgb[c][0] * xyz[0] + kXyzToRgb[c][1] * xyz[1] +
                             kXyzToRgb[c][2] * xyz[2];
                // Out-of-gamut values clamp in linear light; encoding then
                // keeps [0,1] and avoids pow on negatives.
                lin = std::clamp(lin, 0.0, 1.0);
                out.at(c, y, x) = std::clamp(srgb_encode(lin), 0.0, 1.0);
            }
        }
    return out;
}

ImagePlanar luminance(const ImagePlanar& img) {
    require_rgb(img, "luminance");
    if (img.space == ColorSpace::Xyz)
        throw Error(ErrorKind::Invalid, "luminance: expected an RGB tag");
    ImagePlanar out(img.height, img.width, 1, ColorSpace::Gray);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(0, y, x) = kLumaR * img.at(0, y, x) + kLumaG * img.at(1, y, x) +
                              kLumaB * img.at(2, y, x);
    return out;
}

ImagePlanar gray_world_correct(const ImagePlanar& img) {
    require_rgb(img, "gray_world_correct");
    const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
    double mean[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) mean[c] += img.data[c * n + i];
        mean[c] /= static_cast<double>(n);
        if (mean[c] <= 0.0)
            throw Error(ErrorKind::Invalid, "gray_world_correct: channel mean is zero");
    }
    const double target = (mean[0] + mean[1] + mean[2]) / 3.0;
    ImagePlanar out = img;
    for (int c = 0; c < 3; ++c) {
        const double scale = target / mean[c];
        for (std::size_t i = 0; i < n; ++i)
            out.data[c * n + i] = std::clamp(img.data[c * n + i] * scale, 0.0, 1.0);
    }
    return out;
}

ImagePlanar percentile_stretch(const ImagePlanar& img, double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 100.0))
        throw Error(ErrorKind::Invalid, "percentile_stretch: need 0 <= lo < hi <= 100");
    const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
    ImagePlanar out = img;
    std::vector<double> sorted(n);
    for (int c = 0; c < img.channels; ++c) {
        std::copy_n(img.data.begin() + c * n, n, sorted.begin());
        std::sort(sorted.begin(), sorted.end());
        const double vlo = percentile_of_sorted(sorted, lo);
        const double vhi = percentile_of_sorted(sorted, hi);
        if (vhi == vlo) continue; // constant channel passes through
        const double inv = 1.0 / (vhi - vlo);
        for (std::size_t i = 0; i < n; ++i)
            out.data[c * n + i] = std::clamp((img.data[c * n + i] - vlo) * inv, 0.0, 1.0);
    }
    return out;
}

} // namespace wavefuse
