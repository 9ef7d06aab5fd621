#pragma once

#include <cstddef>
#include <vector>

#include "wavefuse/error.hpp"

namespace wavefuse {

enum class ColorSpace { Srgb, LinearRgb, Xyz, Gray };

/// H x W x C image with planar row-major storage (all of channel 0, then
/// channel 1, ...). Samples are doubles, nominally in [0,1]; 8-bit files are
/// mapped by division by 255 on load and round(255*x) on save.
struct ImagePlanar {
    int height = 0;
    int width = 0;
    int channels = 1;
    ColorSpace space = ColorSpace::Gray;
    std::vector<double> data;

    ImagePlanar() = default;
    ImagePlanar(int h, int w, int c, ColorSpace s, double fill = 0.0);

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    std::size_t sample_count() const { return data.size(); }
    bool same_shape(const ImagePlanar& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

ImagePlanar make_gray(int height, int width, double fill = 0.0);
ImagePlanar make_rgb(int height, int width, double r = 0.0, double g = 0.0, double b = 0.0);

// Pixelwise helpers shared by every module.
void clamp01(ImagePlanar& img);
bool all_finite(const ImagePlanar& img);
double min_value(const ImagePlanar& img);
double max_value(const ImagePlanar& img);
double mean_value(const ImagePlanar& img);
double rms_diff(const ImagePlanar& a, const ImagePlanar& b);

ImagePlanar extract_channel(const ImagePlanar& img, int c);
void set_channel(ImagePlanar& img, int c, const ImagePlanar& plane);

// Color operations. rgb_to_xyz decodes IEC 61966-2-1 sRGB and applies the
// D65 matrix; xyz_to_rgb is its inverse with out-of-gamut values clamped.
ImagePlanar rgb_to_xyz(const ImagePlanar& img);
ImagePlanar xyz_to_rgb(const ImagePlanar& img);

/// Rec. 709 weighted sum (0.2126, 0.7152, 0.0722) of the stored samples.
ImagePlanar luminance(const ImagePlanar& img);

/// Gray-world white balance: scales each channel by mean(all)/mean(channel),
/// clamped to [0,1]. A channel with zero mean is a degenerate-input error.
ImagePlanar gray_world_correct(const ImagePlanar& img);

/// Per channel, maps the lo-th percentile to 0 and the hi-th to 1, linear in
/// between, clamped. Constant channels pass through unchanged.
ImagePlanar percentile_stretch(const ImagePlanar& img, double lo, double hi);

} // namespace wavefuse
