#include "wavefuse/dcp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wavefuse/error.hpp"

namespace wavefuse {

void DcpParams::validate() const {
    if (patch < 0 || guided_radius < 0)
        throw Error(ErrorKind::Invalid, "dcp: window radii must be >= 0");
    if (!(omega > 0.0) || omega > 1.0)
        throw Error(ErrorKind::Invalid, "dcp: omega must be in (0, 1]");
    if (!(t_floor > 0.0) || t_floor >= 1.0)
        throw Error(ErrorKind::Invalid, "dcp: t_floor must be in (0, 1)");
    if (!(airlight_fraction > 0.0) || airlight_fraction > 1.0)
        throw Error(ErrorKind::Invalid, "dcp: airlight_fraction must be in (0, 1]");
    if (!(guided_eps > 0.0))
        throw Error(ErrorKind::Invalid, "dcp: guided_eps must be > 0");
}

namespace {

// exact sliding minimum over clipped [i-r, i+r] windows, one axis at a time
void min_filter_axis(ImagePlanar& img, int radius, bool rows) {
    const int h = img.height, w = img.width;
    const int n = rows ? w : h, lines = rows ? h : w;
    std::vector<double> line(n);
    for (int l = 0; l < lines; ++l) {
        for (int i = 0; i < n; ++i)
            line[i] = rows ? img.at(0, l, i) : img.at(0, i, l);
        for (int i = 0; i < n; ++i) {
            int lo = i - radius < 0 ? 0 : i - radius;
            int hi = i + radius >= n ? n - 1 : i + radius;
            double m = line[lo];
            for (int j = lo + 1; j <= hi; ++j)
                if (line[j] < m)
                    m = line[j];
            if (rows)
                img.at(0, l, i) = m;
            else
                img.at(0, i, l) = m;
        }
    }
}

// box mean over clipped windows via a summed-area table
ImagePlanar box_mean(const ImagePlanar& img, int radius) {
    const int h = img.height, w = img.width;
    std::vector<double> sat(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            sat[(y + 1) * static_cast<std::size_t>(w + 1) + (x + 1)] =
                img.at(0, y, x) + sat[y * static_cast<std::size_t>(w + 1) + (x + 1)] +
                sat[(y + 1) * static_cast<std::size_t>(w + 1) + x] -
                sat[y * static_cast<std::size_t>(w + 1) + x];

    ImagePlanar out = make_gray(h, w);
    for (int y = 0; y < h; ++y) {
        int y0 = y - radius < 0 ? 0 : y - radius;
        int y1 = y + radius >= h ? h - 1 : y + radius;
        for (int x = 0; x < w; ++x) {
            int x0 = x - radius < 0 ? 0 : x - radius;
            int x1 = x + radius >= w ? w - 1 : x + radius;
            double s = sat[(y1 + 1) * static_cast<std::size_t>(w + 1) + (x1 + 1)] -
                       sat[y0 * static_cast<std::size_t>(w + 1) + (x1 + 1)] -
                       sat[(y1 + 1) * static_cast<std::size_t>(w + 1) + x0] +
                       sat[y0 * static_cast<std::size_t>(w + 1) + x0];
            out.at(0, y, x) = s / ((y1 - y0 + 1) * (x1 - x0 + 1));
        }
    }
    return out;
}

} // namespace

ImagePlanar dark_channel(const ImagePlanar& img, int radius) {
    if (img.channels != 3)
        throw Error(ErrorKind::Invalid, "dark_channel: 3-channel image required");
    if (radius < 0)
        throw Error(ErrorKind::Invalid, "dark_channel: radius must be >= 0");
    const int h = img.height, w = img.width;
    ImagePlanar dark = make_gray(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = img.at(0, y, x);
            if (img.at(1, y, x) < m)
                m = img.at(1, y, x);
            if (img.at(2, y, x) < m)
                m = img.at(2, y, x);
            dark.at(0, y, x) = m;
        }
    if (radius > 0) {
        min_filter_axis(dark, radius, true);
        min_filter_axis(dark, radius, false);
    }
    return dark;
}

std::array<double, 3> estimate_airlight(const ImagePlanar& img, const ImagePlanar& dark,
                                        double fraction) {
    if (img.channels != 3 || dark.channels != 1 || img.height != dark.height ||
        img.width != dark.width)
        throw Error(ErrorKind::Invalid, "estimate_airlight: shape mismatch");
    if (!(fraction > 0.0) || fraction > 1.0)
        throw Error(ErrorKind::Invalid, "estimate_airlight: fraction must be in (0, 1]");

    const std::size_t total = dark.data.size();
    std::size_t count = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(total)));
    if (count < 1)
        count = 1;
    if (count > total)
        count = total;

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dark.data[a] != dark.data[b])
            return dark.data[a] > dark.data[b];
        return a < b;
    });

    const std::size_t plane = total;
    std::size_t best = order[0];
    double best_lum = -1.0;
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t i = order[k];
        double lum = 0.2126 * img.data[i] + 0.7152 * img.data[plane + i] +
                     0.0722 * img.data[2 * plane + i];
        if (lum > best_lum || (lum == best_lum && i < best)) {
            best_lum = lum;
            best = i;
        }
    }
    return {img.data[best], img.data[plane + best], img.data[2 * plane + best]};
}

ImagePlanar guided_filter(const ImagePlanar& input, const ImagePlanar& guide, int radius,
                          double eps) {
    if (input.channels != 1 || guide.channels != 1 || !input.same_shape(guide))
        throw Error(ErrorKind::Invalid, "guided_filter: single-channel equal shapes required");
    if (radius < 0 || !(eps > 0.0))
        throw Error(ErrorKind::Invalid, "guided_filter: bad radius/eps");

    ImagePlanar ii = guide, ip = guide;
    for (std::size_t k = 0; k < ii.data.size(); ++k) {
        ip.data[k] = guide.data[k] * input.data[k];
        ii.data[k] *= guide.data[k];
    }
    ImagePlanar mean_i = box_mean(guide, radius);
    ImagePlanar mean_p = box_mean(input, radius);
    ImagePlanar corr_ii = box_mean(ii, radius);
    ImagePlanar corr_ip = box_mean(ip, radius);

    ImagePlanar a = make_gray(input.height, input.width);
    ImagePlanar b = make_gray(input.height, input.width);
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        double var = corr_ii.data[k] - mean_i.data[k] * mean_i.data[k];
        double cov = corr_ip.data[k] - mean_i.data[k] * mean_p.data[k];
        a.data[k] = cov / (var + eps);
        b.data[k] = mean_p.data[k] - a.data[k] * mean_i.data[k];
    }
    ImagePlanar mean_a = box_mean(a, radius);
    ImagePlanar mean_b = box_mean(b, radius);

    ImagePlanar out = make_gray(input.height, input.width);
    for (std::size_t k = 0; k < out.data.size(); ++k)
        out.data[k] = mean_a.data[k] * guide.data[k] + mean_b.data[k];
    return out;
}

ImagePlanar transmission(const ImagePlanar& img, const std::array<double, 3>& airlight,
                         const DcpParams& p) {
    if (img.channels != 3)
        throw Error(ErrorKind::Invalid, "transmission: 3-channel image required");
    p.validate();
    for (double a : airlight)
        if (!(a > 0.0))
            throw Error(ErrorKind::Invalid, "transmission: airlight channels must be > 0");

    ImagePlanar norm = img;
    const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < plane; ++k)
            norm.data[c * plane + k] /= airlight[c];

    ImagePlanar t = dark_channel(norm, p.patch);
    for (double& s : t.data)
        s = 1.0 - p.omega * s;

    t = guided_filter(t, luminance(img), p.guided_radius, p.guided_eps);
    for (double& s : t.data)
        s = s < p.t_floor ? p.t_floor : (s > 1.0 ? 1.0 : s);
    return t;
}

ImagePlanar dcp_dehaze(const ImagePlanar& img, const DcpParams& p) {
    if (img.channels != 3)
        throw Error(ErrorKind::Invalid, "dcp_dehaze: 3-channel image required");
    p.validate();

    ImagePlanar dark = dark_channel(img, p.patch);
    std::array<double, 3> a = estimate_airlight(img, dark, p.airlight_fraction);
    for (double& c : a)
        if (c < 1e-3)
            c = 1e-3; // black airlight would make the normalization singular
    ImagePlanar t = transmission(img, a, p);

    ImagePlanar out = img;
    const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < plane; ++k) {
            double tv = t.data[k] > p.t_floor ? t.data[k] : p.t_floor;
            out.data[c * plane + k] = (img.data[c * plane + k] - a[c]) / tv + a[c];
        }
    clamp01(out);
    return out;
}

} // namespace wavefuse
