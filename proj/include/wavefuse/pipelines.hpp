#pragma once

#include <vector>

#include "wavefuse/ad_fusion.hpp"
#include "wavefuse/dcp.hpp"
#include "wavefuse/image.hpp"
#include "wavefuse/smoothing.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse {

enum class Algo { Pa1, Pa2, Dcp };
enum class XyzChannelMode { YOnly, All };
enum class Pa1Stage2Partner { StretchedGlobal, Original };
enum class ChromaSource { MedianVariant, Original };

struct PipelineConfig {
    Algo algo = Algo::Pa2;
    int scales = 1;
    double alpha = 0.5;    // fractional order
    double frac_gain = 0.1;
    int frac_taps = 8;
    std::vector<double> gammas = {0.5, 1.0, 1.5};
    DiffusionParams diffusion;
    NlmParams nlm;
    bool use_nlm = false;
    int outer_iterations = 1;
    bool gray_world = true;
    bool stretch = true;
    double stretch_lo = 1.0;
    double stretch_hi = 99.0;
    XyzChannelMode xyz_mode = XyzChannelMode::YOnly;
    WaveletBasis basis = WaveletBasis::Haar;
    BaseFusionRule base_rule = BaseFusionRule::Mean;
    Pa1Stage2Partner pa1_partner = Pa1Stage2Partner::StretchedGlobal;
    ChromaSource chroma = ChromaSource::MedianVariant;
    DcpParams dcp;

    void validate() const;
};

/// Power-law exposure variants: full-color images plus their luminances. A
/// gamma=1 copy is appended when the list lacks one.
struct VariantSet {
    std::vector<double> gammas;
    std::vector<ImagePlanar> color;
    LayerStack lum;
};

VariantSet derive_variants(const ImagePlanar& img, const std::vector<double>& gammas);

/// Two-stage fusion: per-variant base/detail split, gradient-domain fusion of
/// bases and (shifted) details, then anisotropic-diffusion fusion of the
/// stage-1 result with a globally stretched variant; chroma restored by
/// luminance ratio against the median-exposure variant.
ImagePlanar pa1_enhance(const ImagePlanar& img, const PipelineConfig& cfg);

/// Fractional wavelet enhancement: XYZ transform, multilevel decomposition,
/// fractional boost of every detail subband, diffusion fusion of the
/// approximation with its diffused copy, reconstruction, then the configured
/// color corrections and optional non-local-means polish.
ImagePlanar pa2_enhance(const ImagePlanar& img, const PipelineConfig& cfg);

struct PassRecord {
    int pass = 0;
    double rms_change = 0.0;
    double dark_channel_mean = 0.0;
};

/// Runs the configured algorithm outer_iterations times, rescaling the range
/// between passes if it collapses below 0.5 and stopping early once a pass
/// changes the image by less than 1e-4 RMS. NLM, when enabled, runs once at
/// the very end.
ImagePlanar iterate(const ImagePlanar& img, const PipelineConfig& cfg,
                    std::vector<PassRecord>* log = nullptr);

} // namespace wavefuse
