#include "wavefuse/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "wavefuse/dcp.hpp"
#include "wavefuse/error.hpp"

namespace wavefuse {

namespace {

// metrics accept any tag, so this skips the color-space checks of luminance()
ImagePlanar lum_plane(const ImagePlanar& img) {
    if (img.channels == 1)
        return img;
    ImagePlanar out = make_gray(img.height, img.width);
    const std::size_t plane = out.data.size();
    for (std::size_t k = 0; k < plane; ++k)
        out.data[k] = 0.2126 * img.data[k] + 0.7152 * img.data[plane + k] +
                      0.0722 * img.data[2 * plane + k];
    return out;
}

ImagePlanar expand_rgb(const ImagePlanar& img) {
    if (img.channels == 3)
        return img;
    ImagePlanar out(img.height, img.width, 3, ColorSpace::Srgb);
    const std::size_t plane = img.data.size();
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < plane; ++k)
            out.data[c * plane + k] = img.data[k];
    return out;
}

double population_std(const std::vector<double>& v) {
    if (v.empty())
        return 0.0;
    double mean = 0.0;
    for (double s : v)
        mean += s;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double s : v)
        var += (s - mean) * (s - mean);
    return std::sqrt(var / static_cast<double>(v.size()));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

double entropy(const ImagePlanar& img) {
    ImagePlanar lum = lum_plane(img);
    long hist[256] = {0};
    for (double v : lum.data) {
        double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        hist[static_cast<int>(std::lround(c * 255.0))]++;
    }
    double n = static_cast<double>(lum.data.size());
    double h = 0.0;
    for (long b : hist)
        if (b > 0) {
            double p = b / n;
            h -= p * std::log2(p);
        }
    return h;
}

double avg_gradient(const ImagePlanar& img) {
    ImagePlanar lum = lum_plane(img);
    const int h = lum.height, w = lum.width;
    if (h < 2 || w < 2)
        return 0.0;
    double acc = 0.0;
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x + 1 < w; ++x) {
            double gx = lum.at(0, y, x + 1) - lum.at(0, y, x);
            double gy = lum.at(0, y + 1, x) - lum.at(0, y, x);
            acc += std::sqrt((gx * gx + gy * gy) / 2.0);
        }
    return acc / (static_cast<double>(h - 1) * (w - 1));
}

double rms_contrast(const ImagePlanar& img) {
    return population_std(lum_plane(img).data);
}

double local_contrast(const ImagePlanar& img, int tile) {
    if (tile < 1)
        throw Error(ErrorKind::Invalid, "local_contrast: tile must be >= 1");
    ImagePlanar lum = lum_plane(img);
    double acc = 0.0;
    int tiles = 0;
    std::vector<double> buf;
    for (int y0 = 0; y0 < lum.height; y0 += tile)
        for (int x0 = 0; x0 < lum.width; x0 += tile) {
            buf.clear();
            int y1 = y0 + tile < lum.height ? y0 + tile : lum.height;
            int x1 = x0 + tile < lum.width ? x0 + tile : lum.width;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    buf.push_back(lum.at(0, y, x));
            acc += population_std(buf);
            ++tiles;
        }
    return acc / tiles;
}

double colorfulness(const ImagePlanar& img) {
    if (img.channels != 3)
        throw Error(ErrorKind::Invalid, "colorfulness: 3-channel image required");
    const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
    std::vector<double> rg(plane), yb(plane);
    for (std::size_t k = 0; k < plane; ++k) {
        double r = img.data[k], g = img.data[plane + k], b = img.data[2 * plane + k];
        rg[k] = r - g;
        yb[k] = 0.5 * (r + g) - b;
    }
    double mu_rg = 0.0, mu_yb = 0.0;
    for (std::size_t k = 0; k < plane; ++k) {
        mu_rg += rg[k];
        mu_yb += yb[k];
    }
    mu_rg /= static_cast<double>(plane);
    mu_yb /= static_cast<double>(plane);
    double srg = population_std(rg), syb = population_std(yb);
    return std::sqrt(srg * srg + syb * syb) + 0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
}

double dark_channel_mean(const ImagePlanar& img, int radius) {
    return mean_value(dark_channel(expand_rgb(img), radius));
}

double rmse(const ImagePlanar& a, const ImagePlanar& b) {
    return rms_diff(a, b);
}

double mean_luminance(const ImagePlanar& img) {
    return mean_value(lum_plane(img));
}

void HazeModel::validate() const {
    if (t_map.sample_count() > 0) {
        if (t_map.channels != 1)
            throw Error(ErrorKind::Invalid, "haze: t_map must be single-channel");
        for (double v : t_map.data)
            if (!(v > 0.0) || v > 1.0 || !std::isfinite(v))
                throw Error(ErrorKind::Invalid, "haze: t_map values must be in (0, 1]");
    } else if (!(t > 0.0) || t > 1.0) {
        throw Error(ErrorKind::Invalid, "haze: t must be in (0, 1]");
    }
    for (double a : airlight)
        if (a < 0.0 || a > 1.0)
            throw Error(ErrorKind::Invalid, "haze: airlight channels must be in [0, 1]");
}

ImagePlanar apply_haze(const ImagePlanar& clean, const HazeModel& model) {
    if (clean.channels != 3)
        throw Error(ErrorKind::Invalid, "apply_haze: 3-channel image required");
    model.validate();
    const bool mapped = model.t_map.sample_count() > 0;
    if (mapped && (model.t_map.height != clean.height || model.t_map.width != clean.width))
        throw Error(ErrorKind::Invalid, "apply_haze: t_map shape mismatch");

    ImagePlanar out = clean;
    const std::size_t plane = static_cast<std::size_t>(clean.height) * clean.width;
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < plane; ++k) {
            double t = mapped ? model.t_map.data[k] : model.t;
            out.data[c * plane + k] =
                clean.data[c * plane + k] * t + model.airlight[c] * (1.0 - t);
        }
    return out;
}

ImagePlanar apply_underwater_cast(const ImagePlanar& clean,
                                  const std::array<double, 3>& attenuation) {
    if (clean.channels != 3)
        throw Error(ErrorKind::Invalid, "apply_underwater_cast: 3-channel image required");
    for (double a : attenuation)
        if (!(a > 0.0) || a > 1.0)
            throw Error(ErrorKind::Invalid, "apply_underwater_cast: attenuation must be in (0, 1]");
    ImagePlanar out = clean;
    const std::size_t plane = static_cast<std::size_t>(clean.height) * clean.width;
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < plane; ++k)
            out.data[c * plane + k] *= attenuation[c];
    return out;
}

MetricReport report(const ImagePlanar& img, const ImagePlanar* reference) {
    MetricReport r;
    ImagePlanar rgb = expand_rgb(img);
    r.entropy = entropy(rgb);
    r.avg_gradient = avg_gradient(rgb);
    r.rms_contrast = rms_contrast(rgb);
    r.local_contrast = local_contrast(rgb);
    r.colorfulness = colorfulness(rgb);
    r.dark_channel_mean = dark_channel_mean(rgb);
    if (reference) {
        if (!img.same_shape(*reference))
            throw Error(ErrorKind::Invalid, "report: reference shape mismatch");
        r.rmse_to_reference = rmse(img, *reference);
    }
    return r;
}

std::string metric_csv_header() {
    return "image,status,entropy,avg_gradient,rms_contrast,local_contrast,"
           "colorfulness,dark_channel_mean,rmse_to_reference";
}

std::string metric_csv_row(const std::string& name, const MetricReport& r) {
    std::string row = name + ",ok," + fmt(r.entropy) + "," + fmt(r.avg_gradient) + "," +
                      fmt(r.rms_contrast) + "," + fmt(r.local_contrast) + "," +
                      fmt(r.colorfulness) + "," + fmt(r.dark_channel_mean) + ",";
    if (r.rmse_to_reference)
        row += fmt(*r.rmse_to_reference);
    return row;
}

std::uint64_t Rng::next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

namespace {

// six saturated colors, two channel-rotation triples, so equal use keeps the
// global channel means close to each other
constexpr double kPalette[6][3] = {
    {0.95, 0.15, 0.08}, {0.08, 0.95, 0.15}, {0.15, 0.08, 0.95},
    {0.92, 0.80, 0.10}, {0.10, 0.92, 0.80}, {0.80, 0.10, 0.92},
};

void paint_rect(ImagePlanar& img, int y0, int y1, int x0, int x1, double r, double g,
                double b) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            img.at(0, y, x) = r;
            img.at(1, y, x) = g;
            img.at(2, y, x) = b;
        }
}

} // namespace

ImagePlanar make_test_scene(int index, int height, int width, std::uint64_t seed) {
    if (height < 8 || width < 8)
        throw Error(ErrorKind::Invalid, "make_test_scene: minimum size is 8x8");
    Rng rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1));
    ImagePlanar img(height, width, 3, ColorSpace::Srgb);
    const int family = ((index % 5) + 5) % 5;

    switch (family) {
    case 0: { // vertical color bands under a vertical brightness ramp
        int band = width / 12 < 8 ? 8 : width / 12;
        for (int y = 0; y < height; ++y) {
            double ramp = 0.45 + 0.45 * (height > 1 ? static_cast<double>(y) / (height - 1) : 1.0);
            for (int x = 0; x < width; ++x) {
                const double* c = kPalette[(x / band) % 6];
                img.at(0, y, x) = c[0] * ramp;
                img.at(1, y, x) = c[1] * ramp;
                img.at(2, y, x) = c[2] * ramp;
            }
        }
        break;
    }
    case 1: { // square tiles with jittered brightness
        int tile = height / 4 < 8 ? 8 : height / 4;
        for (int ty = 0; ty * tile < height; ++ty)
            for (int tx = 0; tx * tile < width; ++tx) {
                const double* c = kPalette[(ty * 5 + tx) % 6];
                double s = 0.45 + 0.45 * rng.uniform();
                int y1 = (ty + 1) * tile < height ? (ty + 1) * tile : height;
                int x1 = (tx + 1) * tile < width ? (tx + 1) * tile : width;
                paint_rect(img, ty * tile, y1, tx * tile, x1, c[0] * s, c[1] * s, c[2] * s);
            }
        break;
    }
    case 2: { // concentric rings
        double cy = 0.5 * (height - 1), cx = 0.5 * (width - 1);
        double maxr = std::sqrt(cy * cy + cx * cx) + 1e-9;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double r = std::sqrt((y - cy) * (y - cy) + (x - cx) * (x - cx)) / maxr;
                const double* c = kPalette[static_cast<int>(r * 4.0) % 6];
                double s = 0.9 - 0.4 * r;
                img.at(0, y, x) = c[0] * s;
                img.at(1, y, x) = c[1] * s;
                img.at(2, y, x) = c[2] * s;
            }
        break;
    }
    case 3: { // horizontal stripes of random heights, diagonal ramp
        int y = 0, stripe = 0;
        while (y < height) {
            int hgt = 14 + static_cast<int>(rng.uniform() * 17.0);
            int y1 = y + hgt < height ? y + hgt : height;
            const double* c = kPalette[stripe % 6];
            for (int yy = y; yy < y1; ++yy)
                for (int x = 0; x < width; ++x) {
                    double ramp = 0.42 + 0.5 * static_cast<double>(yy + x) / (height + width - 2);
                    img.at(0, yy, x) = c[0] * ramp;
                    img.at(1, yy, x) = c[1] * ramp;
                    img.at(2, yy, x) = c[2] * ramp;
                }
            y = y1;
            ++stripe;
        }
        break;
    }
    default: { // posterized cosine blobs, independent per channel
        double fy[3], fx[3], py[3], px[3];
        for (int c = 0; c < 3; ++c) {
            fy[c] = 1.0 + std::floor(rng.uniform() * 3.0);
            fx[c] = 1.0 + std::floor(rng.uniform() * 3.0);
            py[c] = rng.uniform();
            px[c] = rng.uniform();
        }
        const double two_pi = 6.28318530717958647692;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c) {
                    double v = 0.5 +
                               0.5 * std::cos(two_pi * (fy[c] * y / height + py[c])) *
                                   std::cos(two_pi * (fx[c] * x / width + px[c]));
                    int level = static_cast<int>(v * 5.0);
                    if (level > 4)
                        level = 4;
                    img.at(c, y, x) = 0.05 + 0.225 * level;
                }
        break;
    }
    }

    // equalize channel means so a synthetic color cast is the only source of
    // channel imbalance a corrector has to remove
    {
        const std::size_t n = static_cast<std::size_t>(height) * width;
        double m[3];
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += img.data[c * n + i];
            m[c] = s / static_cast<double>(n);
        }
        double target = (m[0] + m[1] + m[2]) / 3.0;
        if (m[0] > 1e-12 && m[1] > 1e-12 && m[2] > 1e-12)
            for (int c = 0; c < 3; ++c) {
                double s = target / m[c];
                for (std::size_t i = 0; i < n; ++i)
                    img.data[c * n + i] *= s;
            }
    }

    // every scene gets a true-black and a true-white patch (> 2% of pixels
    // each) so percentile-based normalization has anchors at both ends
    int ph = height / 5, pw = width / 5;
    paint_rect(img, height / 8, height / 8 + ph, width / 8, width / 8 + pw, 0.0, 0.0, 0.0);
    paint_rect(img, (height * 5) / 8, (height * 5) / 8 + ph, (width * 5) / 8,
               (width * 5) / 8 + pw, 1.0, 1.0, 1.0);
    clamp01(img);
    return img;
}

} // namespace wavefuse
