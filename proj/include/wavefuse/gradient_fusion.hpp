#pragma once

#include <vector>

#include "wavefuse/ad_fusion.hpp"
#include "wavefuse/fractional.hpp"
#include "wavefuse/image.hpp"

namespace wavefuse {

/// Forward differences; the last column of gx and last row of gy are zero so
/// the implied divergence is Neumann-compatible.
GradientField image_gradient(const ImagePlanar& img);

/// Per pixel, copies (gx,gy) from the field with the largest magnitude
/// sqrt(gx^2+gy^2); ties go to the lowest input index.
GradientField fuse_gradients(const std::vector<GradientField>& fields);

/// Solves laplacian(u) = div(field) under Neumann boundaries by cosine-basis
/// diagonalization, then shifts u to the requested mean (the Neumann null
/// space). Any incompatible mean component of the divergence is projected
/// out; fields produced by image_gradient are always compatible. Throws a
/// numeric error if the relative residual exceeds 1e-8.
ImagePlanar poisson_reconstruct(const GradientField& field, double target_mean);

/// image_gradient per variant -> fuse_gradients -> poisson_reconstruct,
/// clamped to [0,1].
ImagePlanar gradient_domain_fuse(const LayerStack& variants, double target_mean);

} // namespace wavefuse
