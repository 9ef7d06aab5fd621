#include "wavefuse/gradient_fusion.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "wavefuse/error.hpp"

namespace wavefuse {

GradientField image_gradient(const ImagePlanar& img) {
    if (img.channels != 1)
        throw Error(ErrorKind::Invalid, "image_gradient: single-channel image required");
    const int h = img.height, w = img.width;
    GradientField f{make_gray(h, w), make_gray(h, w)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w)
                f.gx.at(0, y, x) = img.at(0, y, x + 1) - img.at(0, y, x);
            if (y + 1 < h)
                f.gy.at(0, y, x) = img.at(0, y + 1, x) - img.at(0, y, x);
        }
    return f;
}

GradientField fuse_gradients(const std::vector<GradientField>& fields) {
    if (fields.empty())
        throw Error(ErrorKind::Invalid, "fuse_gradients: at least one field required");
    for (const GradientField& f : fields)
        if (!f.gx.same_shape(fields[0].gx) || !f.gy.same_shape(fields[0].gx))
            throw Error(ErrorKind::Invalid, "fuse_gradients: field shapes differ");

    GradientField out = fields[0];
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const GradientField& f = fields[i];
        for (std::size_t k = 0; k < out.gx.data.size(); ++k) {
            double cur = out.gx.data[k] * out.gx.data[k] + out.gy.data[k] * out.gy.data[k];
            double cand = f.gx.data[k] * f.gx.data[k] + f.gy.data[k] * f.gy.data[k];
            if (cand > cur) {
                out.gx.data[k] = f.gx.data[k];
                out.gy.data[k] = f.gy.data[k];
            }
        }
    }
    return out;
}

namespace {

// FFTW's planner mutates global state; execution of a ready plan is
// thread-safe, so only plan/destroy take the lock.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Runs through an fftw_malloc'd buffer so alignment — and therefore the
// chosen codelet and its rounding — is identical on every call.
void dct2d(std::vector<double>& buf, int h, int w, fftw_r2r_kind kind) {
    const std::size_t n = static_cast<std::size_t>(h) * w;
    double* work = static_cast<double*>(fftw_malloc(n * sizeof(double)));
    if (!work)
        throw Error(ErrorKind::Numeric, "poisson_reconstruct: allocation failed");
    std::copy(buf.begin(), buf.end(), work);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_r2r_2d(h, w, work, work, kind, kind, FFTW_ESTIMATE);
    }
    if (!plan) {
        fftw_free(work);
        throw Error(ErrorKind::Numeric, "poisson_reconstruct: FFTW plan creation failed");
    }
    fftw_execute(plan);
    std::copy(work, work + n, buf.begin());
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
        fftw_free(work);
    }
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// 5-point Laplacian with replicated boundaries — the operator the cosine
// basis diagonalizes, used for the residual check.
double laplacian_at(const ImagePlanar& u, int y, int x) {
    const int h = u.height, w = u.width;
    return u.at(0, clampi(y - 1, 0, h - 1), x) + u.at(0, clampi(y + 1, 0, h - 1), x) +
           u.at(0, y, clampi(x - 1, 0, w - 1)) + u.at(0, y, clampi(x + 1, 0, w - 1)) -
           4.0 * u.at(0, y, x);
}

} // namespace

ImagePlanar poisson_reconstruct(const GradientField& field, double target_mean) {
    if (field.gx.channels != 1 || !field.gx.same_shape(field.gy))
        throw Error(ErrorKind::Invalid, "poisson_reconstruct: malformed gradient field");
    if (!all_finite(field.gx) || !all_finite(field.gy))
        throw Error(ErrorKind::Numeric, "poisson_reconstruct: non-finite gradient field");
    const int h = field.gx.height, w = field.gx.width;

    // backward divergence of the forward-difference field
    ImagePlanar div = make_gray(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double d = field.gx.at(0, y, x) + field.gy.at(0, y, x);
            if (x > 0)
                d -= field.gx.at(0, y, x - 1);
            if (y > 0)
                d -= field.gy.at(0, y - 1, x);
            div.at(0, y, x) = d;
        }

    std::vector<double> buf = div.data;
    dct2d(buf, h, w, FFTW_REDFT10);

    buf[0] = 0.0; // free Neumann constant; also drops any incompatible mean
    const double pi = 3.14159265358979323846;
    for (int l = 0; l < h; ++l) {
        double ey = 2.0 * std::cos(pi * l / h) - 2.0;
        for (int k = 0; k < w; ++k) {
            if (l == 0 && k == 0)
                continue;
            double ex = 2.0 * std::cos(pi * k / w) - 2.0;
            buf[static_cast<std::size_t>(l) * w + k] /= ey + ex;
        }
    }

    dct2d(buf, h, w, FFTW_REDFT01);
    const double scale = 1.0 / (4.0 * h * w);

    ImagePlanar u = make_gray(h, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i) {
        u.data[i] = buf[i] * scale;
        sum += u.data[i];
    }
    double shift = target_mean - sum / static_cast<double>(u.data.size());
    for (double& s : u.data)
        s += shift;

    // residual vs the zero-mean (solvable) part of the divergence
    double div_mean = mean_value(div);
    double rhs_norm2 = 0.0, res_norm2 = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double rhs = div.at(0, y, x) - div_mean;
            double r = laplacian_at(u, y, x) - rhs;
            rhs_norm2 += rhs * rhs;
            res_norm2 += r * r;
        }
    if (rhs_norm2 > 1e-300 && std::sqrt(res_norm2 / rhs_norm2) > 1e-8)
        throw Error(ErrorKind::Numeric, "poisson_reconstruct: residual above tolerance");
    if (!all_finite(u))
        throw Error(ErrorKind::Numeric, "poisson_reconstruct: non-finite solution");
    return u;
}

ImagePlanar gradient_domain_fuse(const LayerStack& variants, double target_mean) {
    if (variants.empty())
        throw Error(ErrorKind::Invalid, "gradient_domain_fuse: at least one variant required");
    std::vector<GradientField> fields;
    fields.reserve(variants.size());
    for (const ImagePlanar& v : variants)
        fields.push_back(image_gradient(v));
    ImagePlanar out = poisson_reconstruct(fuse_gradients(fields), target_mean);
    clamp01(out);
    return out;
}

} // namespace wavefuse
