#pragma once

#include <array>

#include "wavefuse/image.hpp"

namespace wavefuse {

struct DcpParams {
    int patch = 7;                   // dark-channel window radius
    double omega = 0.95;             // haze retention factor
    double t_floor = 0.1;            // minimum transmission
    double airlight_fraction = 0.001; // top fraction of dark pixels inspected
    int guided_radius = 20;
    double guided_eps = 1e-3;

    void validate() const;
};

/// Min over channels then min over the (2r+1)^2 window, replicated borders.
ImagePlanar dark_channel(const ImagePlanar& img, int radius);

/// RGB of the maximum-luminance pixel among the brightest `fraction` of
/// dark-channel pixels (at least one pixel; ties resolved by pixel index).
std::array<double, 3> estimate_airlight(const ImagePlanar& img, const ImagePlanar& dark,
                                        double fraction);

/// t = 1 - omega * dark_channel(img / airlight), guided-filter refined with
/// the input luminance as guide, clamped to [t_floor, 1].
ImagePlanar transmission(const ImagePlanar& img, const std::array<double, 3>& airlight,
                         const DcpParams& p);

/// Box-window linear model a*guide + b with ridge eps; windows are clipped at
/// the borders and normalized by their true pixel count.
ImagePlanar guided_filter(const ImagePlanar& input, const ImagePlanar& guide, int radius,
                          double eps);

/// J = (I - A) / max(t, t_floor) + A per channel, clamped to [0,1].
ImagePlanar dcp_dehaze(const ImagePlanar& img, const DcpParams& p);

} // namespace wavefuse
