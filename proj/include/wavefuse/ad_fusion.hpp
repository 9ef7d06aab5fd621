#pragma once

#include <utility>
#include <vector>

#include "wavefuse/image.hpp"
#include "wavefuse/smoothing.hpp"

namespace wavefuse {

/// Ordered co-registered single-channel layers, identical shapes.
using LayerStack = std::vector<ImagePlanar>;

/// Non-negative, sums to 1.
using FusionWeights = std::vector<double>;

enum class BaseFusionRule { Mean, Max };

/// base = diffuse(img, p), detail = img - base; base + detail == img exactly.
std::pair<ImagePlanar, ImagePlanar> split_base_detail(const ImagePlanar& img,
                                                      const DiffusionParams& p);

/// Karhunen-Loeve weights: dominant eigenvector of the N x N covariance of
/// the flattened layers, taken elementwise-absolute and normalized to sum 1.
/// A covariance with (near-)zero trace degenerates to uniform weights.
FusionWeights kl_weights(const LayerStack& details);

/// Anisotropic-diffusion fusion: per input split base/detail, fuse bases by
/// `rule`, fuse details by KL weights (N=1 passes through), sum and clamp.
ImagePlanar ad_fuse(const LayerStack& inputs, const DiffusionParams& p,
                    BaseFusionRule rule = BaseFusionRule::Mean);

} // namespace wavefuse
