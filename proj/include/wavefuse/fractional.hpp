#pragma once

#include <vector>

#include "wavefuse/image.hpp"

namespace wavefuse {

/// Grunwald-Letnikov differintegral mask: c_0 = 1,
/// c_k = c_{k-1} * (1 - (alpha+1)/k). Integer orders terminate in exact
/// zeros (alpha=1 -> 1,-1,0,...; alpha=2 -> 1,-2,1,0,...).
struct GLMask {
    double alpha = 0.0;
    std::vector<double> coeffs; // K+1 entries, c_0..c_K
};

struct GradientField {
    ImagePlanar gx, gy;
};

GLMask gl_coefficients(double alpha, int taps);

/// Causal (backward) convolution with the GL mask along each axis, symmetric
/// half-sample extension at the leading edge (index -m reads sample m-1).
GradientField frac_gradient(const ImagePlanar& img, double alpha, int taps);

/// band + gain * (gx + gy) of the band's fractional gradient. Tap count is
/// clamped to the band extent; bands too small to support a single tap pass
/// through unchanged.
ImagePlanar frac_boost_subband(const ImagePlanar& band, double alpha, double gain,
                               int taps = 8);

} // namespace wavefuse
