#include "wavefuse/pipelines.hpp"

#include <algorithm>
#include <cmath>

#include "wavefuse/error.hpp"
#include "wavefuse/evaluation.hpp"
#include "wavefuse/fractional.hpp"
#include "wavefuse/gradient_fusion.hpp"

namespace wavefuse {

void PipelineConfig::validate() const {
    if (scales < 1)
        throw Error(ErrorKind::Invalid, "config: scales must be >= 1");
    if (!(alpha > 0.0))
        throw Error(ErrorKind::Invalid, "config: alpha must be > 0");
    if (frac_gain < 0.0)
        throw Error(ErrorKind::Invalid, "config: frac_gain must be >= 0");
    if (frac_taps < 1)
        throw Error(ErrorKind::Invalid, "config: frac_taps must be >= 1");
    if (gammas.empty())
        throw Error(ErrorKind::Invalid, "config: gammas must be non-empty");
    for (double g : gammas)
        if (!(g > 0.0))
            throw Error(ErrorKind::Invalid, "config: gammas must be > 0");
    if (outer_iterations < 1)
        throw Error(ErrorKind::Invalid, "config: outer_iterations must be >= 1");
    if (stretch_lo < 0.0 || stretch_hi > 100.0 || !(stretch_lo < stretch_hi))
        throw Error(ErrorKind::Invalid, "config: need 0 <= stretch_lo < stretch_hi <= 100");
    diffusion.validate();
    nlm.validate();
    dcp.validate();
}

VariantSet derive_variants(const ImagePlanar& img, const std::vector<double>& gammas) {
    if (gammas.empty())
        throw Error(ErrorKind::Invalid, "derive_variants: gammas must be non-empty");
    VariantSet vs;
    vs.gammas = gammas;
    bool has_identity = false;
    for (double g : gammas) {
        if (!(g > 0.0))
            throw Error(ErrorKind::Invalid, "derive_variants: gammas must be > 0");
        if (g == 1.0)
            has_identity = true;
    }
    if (!has_identity)
        vs.gammas.push_back(1.0);

    for (double g : vs.gammas) {
        ImagePlanar v = img;
        if (g != 1.0) {
            for (double& s : v.data) {
                double c = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
                s = std::pow(c, g);
            }
        }
        clamp01(v);
        vs.lum.push_back(v.channels == 3 ? luminance(v) : v);
        vs.color.push_back(std::move(v));
    }
    return vs;
}

namespace {

ImagePlanar shift_add(const ImagePlanar& img, double offset) {
    ImagePlanar out = img;
    for (double& s : out.data)
        s += offset;
    return out;
}

// chroma carrier: the variant whose mean luminance is the median
std::size_t median_luminance_index(const LayerStack& lums) {
    std::vector<std::pair<double, std::size_t>> order(lums.size());
    for (std::size_t i = 0; i < lums.size(); ++i)
        order[i] = {mean_value(lums[i]), i};
    std::sort(order.begin(), order.end());
    return order[(order.size() - 1) / 2].second;
}

ImagePlanar restore_chroma(const ImagePlanar& color_src, const ImagePlanar& lum_src,
                           const ImagePlanar& lum_new) {
    const double eps = 1e-4;
    ImagePlanar out = color_src;
    const std::size_t plane = lum_new.data.size();
    for (int c = 0; c < out.channels; ++c)
        for (std::size_t k = 0; k < plane; ++k)
            out.data[c * plane + k] *=
                (lum_new.data[k] + eps) / (lum_src.data[k] + eps);
    clamp01(out);
    return out;
}

bool safely_balanceable(const ImagePlanar& img) {
    const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
    for (int c = 0; c < 3; ++c) {
        double m = 0.0;
        for (std::size_t k = 0; k < plane; ++k)
            m += img.data[c * plane + k];
        if (!(m > 0.0))
            return false;
    }
    return true;
}

ImagePlanar color_correct(ImagePlanar img, const PipelineConfig& cfg) {
    // an identically-zero channel has no cast to fix; skip rather than error
    if (cfg.gray_world && img.channels == 3 && safely_balanceable(img))
        img = gray_world_correct(img);
    if (cfg.stretch)
        img = percentile_stretch(img, cfg.stretch_lo, cfg.stretch_hi);
    return img;
}

} // namespace

ImagePlanar pa1_enhance(const ImagePlanar& img, const PipelineConfig& cfg) {
    cfg.validate();
    if (img.channels != 1 && img.channels != 3)
        throw Error(ErrorKind::Invalid, "pa1_enhance: 1- or 3-channel image required");

    VariantSet vs = derive_variants(img, cfg.gammas);
    ImagePlanar lum_input = img.channels == 3 ? luminance(img) : img;

    // Base and detail legs are fused in the gradient domain separately. The
    // signed detail stack rides on a 0.5 offset so the solver's [0,1] clamp
    // stays out of the way, and the offset is removed afterwards.
    LayerStack bases, details;
    for (const ImagePlanar& l : vs.lum) {
        auto [base, detail] = split_base_detail(l, cfg.diffusion);
        bases.push_back(std::move(base));
        details.push_back(shift_add(detail, 0.5));
    }
    ImagePlanar fused_base = gradient_domain_fuse(bases, mean_value(lum_input));
    ImagePlanar fused_detail = gradient_domain_fuse(details, 0.5);

    ImagePlanar stage1 = fused_base;
    for (std::size_t k = 0; k < stage1.data.size(); ++k)
        stage1.data[k] += fused_detail.data[k] - 0.5;
    clamp01(stage1);

    ImagePlanar partner;
    if (cfg.pa1_partner == Pa1Stage2Partner::StretchedGlobal && cfg.stretch)
        partner = percentile_stretch(lum_input, cfg.stretch_lo, cfg.stretch_hi);
    else
        partner = lum_input;
    ImagePlanar fused = ad_fuse({stage1, partner}, cfg.diffusion, cfg.base_rule);

    if (img.channels == 1)
        return fused;
    if (cfg.chroma == ChromaSource::MedianVariant) {
        std::size_t m = median_luminance_index(vs.lum);
        return restore_chroma(vs.color[m], vs.lum[m], fused);
    }
    return restore_chroma(img, lum_input, fused);
}

ImagePlanar pa2_enhance(const ImagePlanar& img, const PipelineConfig& cfg) {
    cfg.validate();
    if (img.channels != 3)
        throw Error(ErrorKind::Invalid, "pa2_enhance: 3-channel image required");
    if ((img.height < img.width ? img.height : img.width) >> cfg.scales < 1)
        throw Error(ErrorKind::Invalid, "pa2_enhance: image too small for configured scales");

    ImagePlanar xyz = rgb_to_xyz(img);
    // D65 white per channel bounds the LL band, whose DC gain is 2 per level
    const double white[3] = {0.9504700, 1.0, 1.0888300};
    const double ll_gain = std::pow(2.0, cfg.scales);

    int c0 = cfg.xyz_mode == XyzChannelMode::YOnly ? 1 : 0;
    int c1 = cfg.xyz_mode == XyzChannelMode::YOnly ? 1 : 2;
    for (int c = c0; c <= c1; ++c) {
        ImagePlanar plane = extract_channel(xyz, c);
        WaveletPyramid pyr = decompose(plane, cfg.scales, cfg.basis);

        for (DetailTriple& dt : pyr.details) {
            dt.lh = frac_boost_subband(dt.lh, cfg.alpha, cfg.frac_gain, cfg.frac_taps);
            dt.hl = frac_boost_subband(dt.hl, cfg.alpha, cfg.frac_gain, cfg.frac_taps);
            dt.hh = frac_boost_subband(dt.hh, cfg.alpha, cfg.frac_gain, cfg.frac_taps);
        }

        double norm = ll_gain * white[c];
        ImagePlanar lln = pyr.approx;
        for (double& s : lln.data)
            s /= norm;
        // bases with negative lobes overshoot [0,1]; widen the working range
        // instead of clipping so the no-op configuration stays invertible
        double lo = std::min(0.0, min_value(lln));
        double hi = std::max(1.0, max_value(lln));
        for (double& s : lln.data)
            s = (s - lo) / (hi - lo);
        ImagePlanar fused =
            ad_fuse({lln, diffuse(lln, cfg.diffusion)}, cfg.diffusion, cfg.base_rule);
        for (double& s : fused.data)
            s = (s * (hi - lo) + lo) * norm;
        pyr.approx = std::move(fused);

        set_channel(xyz, c, reconstruct(pyr));
    }

    ImagePlanar out = color_correct(xyz_to_rgb(xyz), cfg);
    if (cfg.use_nlm)
        out = nlm_smooth(out, cfg.nlm);
    clamp01(out);
    return out;
}

namespace {

ImagePlanar enhance_once(const ImagePlanar& img, const PipelineConfig& cfg) {
    switch (cfg.algo) {
    case Algo::Pa1:
        return pa1_enhance(img, cfg);
    case Algo::Pa2:
        return pa2_enhance(img, cfg);
    default:
        return dcp_dehaze(img, cfg.dcp);
    }
}

} // namespace

ImagePlanar iterate(const ImagePlanar& img, const PipelineConfig& cfg,
                    std::vector<PassRecord>* log) {
    cfg.validate();
    PipelineConfig pass_cfg = cfg;
    pass_cfg.use_nlm = false; // polish runs once, after the final pass

    ImagePlanar cur = img;
    for (int k = 1; k <= cfg.outer_iterations; ++k) {
        ImagePlanar next = enhance_once(cur, pass_cfg);
        double change = rms_diff(next, cur);
        if (log)
            log->push_back({k, change, dark_channel_mean(next)});
        cur = std::move(next);
        if (change < 1e-4)
            break;
        if (k < cfg.outer_iterations) {
            double lo = min_value(cur), hi = max_value(cur);
            if (hi - lo < 0.5 && hi > lo) {
                for (double& s : cur.data)
                    s = (s - lo) / (hi - lo);
            }
        }
    }
    if (cfg.use_nlm) {
        cur = nlm_smooth(cur, cfg.nlm);
        clamp01(cur);
    }
    return cur;
}

} // namespace wavefuse
