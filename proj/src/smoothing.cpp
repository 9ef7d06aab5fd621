#include "wavefuse/smoothing.hpp"

#include <cmath>

#include "wavefuse/error.hpp"

namespace wavefuse {

void DiffusionParams::validate() const {
    if (!(kappa > 0.0))
        throw Error(ErrorKind::Invalid, "diffusion: kappa must be > 0");
    if (!(lambda > 0.0) || lambda > 0.25)
        throw Error(ErrorKind::Invalid, "diffusion: lambda must be in (0, 0.25]");
    if (iterations < 0)
        throw Error(ErrorKind::Invalid, "diffusion: iterations must be >= 0");
}

void NlmParams::validate() const {
    if (patch_radius < 0 || search_radius < 0 || patch_radius > search_radius)
        throw Error(ErrorKind::Invalid, "nlm: need 0 <= patch_radius <= search_radius");
    if (!(h > 0.0))
        throw Error(ErrorKind::Invalid, "nlm: h must be > 0");
    if (sigma < 0.0)
        throw Error(ErrorKind::Invalid, "nlm: sigma must be >= 0");
}

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double conduct(double diff, double kappa, Conductance c) {
    double r = diff / kappa;
    double r2 = r * r;
    return c == Conductance::Rational ? 1.0 / (1.0 + r2) : std::exp(-r2);
}

} // namespace

ImagePlanar perona_malik_step(const ImagePlanar& img, const DiffusionParams& p) {
    if (img.channels != 1)
        throw Error(ErrorKind::Invalid, "perona_malik_step: single-channel image required");
    p.validate();
    const int h = img.height, w = img.width;
    ImagePlanar out = img;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double u = img.at(0, y, x);
            double dn = img.at(0, clampi(y - 1, 0, h - 1), x) - u;
            double ds = img.at(0, clampi(y + 1, 0, h - 1), x) - u;
            double dw = img.at(0, y, clampi(x - 1, 0, w - 1)) - u;
            double de = img.at(0, y, clampi(x + 1, 0, w - 1)) - u;
            double flux = conduct(dn, p.kappa, p.conductance) * dn +
                          conduct(ds, p.kappa, p.conductance) * ds +
                          conduct(dw, p.kappa, p.conductance) * dw +
                          conduct(de, p.kappa, p.conductance) * de;
            out.at(0, y, x) = u + p.lambda * flux;
        }
    }
    return out;
}

ImagePlanar diffuse(const ImagePlanar& img, const DiffusionParams& p) {
    p.validate();
    ImagePlanar cur = img;
    for (int i = 0; i < p.iterations; ++i)
        cur = perona_malik_step(cur, p);
    return cur;
}

ImagePlanar nlm_smooth(const ImagePlanar& img, const NlmParams& p) {
    p.validate();
    const int h = img.height, w = img.width, ch = img.channels;
    const int pr = p.patch_radius, sr = p.search_radius;
    const double two_sigma2 = 2.0 * p.sigma * p.sigma;
    const double inv_h2 = 1.0 / (p.h * p.h);
    const int patch_n = (2 * pr + 1) * (2 * pr + 1);

    ImagePlanar out = img;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double wsum = 0.0;
            double acc[3] = {0.0, 0.0, 0.0}; // sum of w * (I_q - I_p)
            for (int qy = clampi(y - sr, 0, h - 1); qy <= clampi(y + sr, 0, h - 1); ++qy) {
                for (int qx = clampi(x - sr, 0, w - 1); qx <= clampi(x + sr, 0, w - 1); ++qx) {
                    double d2 = 0.0;
                    for (int dy = -pr; dy <= pr; ++dy) {
                        int py = clampi(y + dy, 0, h - 1);
                        int py2 = clampi(qy + dy, 0, h - 1);
                        for (int dx = -pr; dx <= pr; ++dx) {
                            int px = clampi(x + dx, 0, w - 1);
                            int px2 = clampi(qx + dx, 0, w - 1);
                            for (int c = 0; c < ch; ++c) {
                                double d = img.at(c, py, px) - img.at(c, py2, px2);
                                d2 += d * d;
                            }
                        }
                    }
                    d2 /= patch_n;
                    double e = d2 - two_sigma2;
                    double wq = std::exp(-(e > 0.0 ? e : 0.0) * inv_h2);
                    wsum += wq;
                    for (int c = 0; c < ch; ++c)
                        acc[c] += wq * (img.at(c, qy, qx) - img.at(c, y, x));
                }
            }
            // delta form keeps constant regions bit-exact
            for (int c = 0; c < ch; ++c)
                out.at(c, y, x) = img.at(c, y, x) + acc[c] / wsum;
        }
    }
    return out;
}

} // namespace wavefuse
