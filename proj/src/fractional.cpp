#include "wavefuse/fractional.hpp"

#include "wavefuse/error.hpp"

namespace wavefuse {

GLMask gl_coefficients(double alpha, int taps) {
    if (taps < 1)
        throw Error(ErrorKind::Invalid, "gl_coefficients: taps must be >= 1");
    if (!(alpha > 0.0))
        throw Error(ErrorKind::Invalid, "gl_coefficients: alpha must be > 0");
    GLMask mask;
    mask.alpha = alpha;
    mask.coeffs.resize(taps + 1);
    mask.coeffs[0] = 1.0;
    for (int k = 1; k <= taps; ++k)
        mask.coeffs[k] = mask.coeffs[k - 1] * (1.0 - (alpha + 1.0) / k);
    return mask;
}

namespace {

// half-sample mirror folded into [0, n): ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
inline int reflect(int i, int n) {
    if (n == 1)
        return 0;
    int p = 2 * n;
    int m = i % p;
    if (m < 0)
        m += p;
    return m < n ? m : p - 1 - m;
}

} // namespace

GradientField frac_gradient(const ImagePlanar& img, double alpha, int taps) {
    if (img.channels != 1)
        throw Error(ErrorKind::Invalid, "frac_gradient: single-channel image required");
    const int h = img.height, w = img.width;
    if (taps >= (h > w ? h : w))
        throw Error(ErrorKind::Invalid, "frac_gradient: mask longer than image");
    GLMask mask = gl_coefficients(alpha, taps);

    GradientField f{make_gray(h, w), make_gray(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0, sy = 0.0;
            for (int m = 0; m <= taps; ++m) {
                sx += mask.coeffs[m] * img.at(0, y, reflect(x - m, w));
                sy += mask.coeffs[m] * img.at(0, reflect(y - m, h), x);
            }
            f.gx.at(0, y, x) = sx;
            f.gy.at(0, y, x) = sy;
        }
    }
    return f;
}

ImagePlanar frac_boost_subband(const ImagePlanar& band, double alpha, double gain,
                               int taps) {
    if (band.channels != 1)
        throw Error(ErrorKind::Invalid, "frac_boost_subband: single-channel band required");
    if (gain < 0.0)
        throw Error(ErrorKind::Invalid, "frac_boost_subband: gain must be >= 0");
    if (gain == 0.0)
        return band;
    int max_dim = band.height > band.width ? band.height : band.width;
    int k = taps < max_dim - 1 ? taps : max_dim - 1;
    if (k < 1)
        return band;
    GradientField f = frac_gradient(band, alpha, k);
    ImagePlanar out = band;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += gain * (f.gx.data[i] + f.gy.data[i]);
    return out;
}

} // namespace wavefuse
