#include "wavefuse/ad_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavefuse/error.hpp"

namespace wavefuse {

std::pair<ImagePlanar, ImagePlanar> split_base_detail(const ImagePlanar& img,
                                                      const DiffusionParams& p) {
    if (img.channels != 1)
        throw Error(ErrorKind::Invalid, "split_base_detail: single-channel image required");
    ImagePlanar base = diffuse(img, p);
    ImagePlanar detail = img;
    for (std::size_t i = 0; i < detail.data.size(); ++i)
        detail.data[i] -= base.data[i];
    return {std::move(base), std::move(detail)};
}

namespace {

void require_stack(const LayerStack& layers, int min_n, const char* where) {
    if (static_cast<int>(layers.size()) < min_n)
        throw Error(ErrorKind::Invalid,
                    std::string(where) + ": need at least " + std::to_string(min_n) + " layers");
    for (const ImagePlanar& l : layers) {
        if (l.channels != 1)
            throw Error(ErrorKind::Invalid, std::string(where) + ": layers must be single-channel");
        if (!l.same_shape(layers[0]))
            throw Error(ErrorKind::Invalid, std::string(where) + ": layer shapes differ");
    }
}

// Cyclic Jacobi on a symmetric matrix; small N (number of fused variants),
// deterministic sweep order. Returns eigenvalues on the diagonal of `a` and
// eigenvectors in the columns of `v`.
void jacobi_eigen(std::vector<double>& a, std::vector<double>& v, int n) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            v[i * n + j] = i == j ? 1.0 : 0.0;
    double trace = 0.0; // rotation-invariant scale for the stop test
    for (int i = 0; i < n; ++i)
        trace += a[i * n + i];
    const double thresh = 1e-30 * (trace * trace) + 1e-300;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off += a[p * n + q] * a[p * n + q];
        if (off < thresh)
            break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (apq == 0.0)
                    continue;
                double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
}

} // namespace

FusionWeights kl_weights(const LayerStack& details) {
    require_stack(details, 2, "kl_weights");
    const int n = static_cast<int>(details.size());
    const std::size_t count = details[0].data.size();

    std::vector<double> mean(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (double s : details[i].data)
            mean[i] += s;
        mean[i] /= static_cast<double>(count);
    }

    std::vector<double> cov(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < count; ++k)
                acc += (details[i].data[k] - mean[i]) * (details[j].data[k] - mean[j]);
            cov[i * n + j] = cov[j * n + i] = acc / static_cast<double>(count);
        }
    }

    double trace = 0.0;
    for (int i = 0; i < n; ++i)
        trace += cov[i * n + i];
    // relative floor: mean-subtraction rounding alone leaves ~eps^2-scale
    // variance on constant layers, which must still count as "no signal"
    double msq = 0.0;
    for (int i = 0; i < n; ++i)
        msq = std::max(msq, mean[i] * mean[i]);
    if (!(trace > 1e-24 * msq + 1e-300))
        return FusionWeights(n, 1.0 / n); // constant layers carry no signal

    std::vector<double> vecs(static_cast<std::size_t>(n) * n);
    jacobi_eigen(cov, vecs, n);

    int best = 0;
    for (int i = 1; i < n; ++i)
        if (cov[i * n + i] > cov[best * n + best])
            best = i;

    FusionWeights w(n);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = std::abs(vecs[i * n + best]);
        norm += w[i];
    }
    for (int i = 0; i < n; ++i)
        w[i] /= norm;
    return w;
}

ImagePlanar ad_fuse(const LayerStack& inputs, const DiffusionParams& p, BaseFusionRule rule) {
    require_stack(inputs, 1, "ad_fuse");
    const int n = static_cast<int>(inputs.size());

    LayerStack bases, details;
    bases.reserve(n);
    details.reserve(n);
    for (const ImagePlanar& in : inputs) {
        auto [base, detail] = split_base_detail(in, p);
        bases.push_back(std::move(base));
        details.push_back(std::move(detail));
    }

    ImagePlanar out = bases[0];
    if (rule == BaseFusionRule::Mean) {
        for (int i = 1; i < n; ++i)
            for (std::size_t k = 0; k < out.data.size(); ++k)
                out.data[k] += bases[i].data[k];
        for (double& s : out.data)
            s /= n;
    } else {
        for (int i = 1; i < n; ++i)
            for (std::size_t k = 0; k < out.data.size(); ++k)
                if (bases[i].data[k] > out.data[k])
                    out.data[k] = bases[i].data[k];
    }

    if (n == 1) {
        for (std::size_t k = 0; k < out.data.size(); ++k)
            out.data[k] += details[0].data[k];
    } else {
        FusionWeights w = kl_weights(details);
        for (int i = 0; i < n; ++i)
            for (std::size_t k = 0; k < out.data.size(); ++k)
                out.data[k] += w[i] * details[i].data[k];
    }

    clamp01(out);
    return out;
}

} // namespace wavefuse
