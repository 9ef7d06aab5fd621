#pragma once

#include "wavefuse/image.hpp"

namespace wavefuse {

enum class Conductance { Exponential, Rational };

struct DiffusionParams {
    double kappa = 0.05;  // edge threshold on [0,1] intensities
    double lambda = 0.2;  // explicit step size, stability requires <= 0.25
    int iterations = 10;
    Conductance conductance = Conductance::Rational;

    void validate() const;
};

struct NlmParams {
    int patch_radius = 2;
    int search_radius = 7;
    double h = 0.1;     // filtering strength
    double sigma = 0.0; // assumed noise level subtracted from patch distances

    void validate() const;
};

/// One explicit Perona-Malik update u += lambda * sum_d g(|grad_d u|) grad_d u
/// over the 4-neighborhood with replicated boundaries. Conserves the mean
/// exactly and obeys the discrete extremum principle for lambda <= 0.25.
ImagePlanar perona_malik_step(const ImagePlanar& img, const DiffusionParams& p);

ImagePlanar diffuse(const ImagePlanar& img, const DiffusionParams& p);

/// Non-local means with joint-channel patch distances. Each output pixel is a
/// convex combination of its search window, so constants are preserved
/// exactly.
ImagePlanar nlm_smooth(const ImagePlanar& img, const NlmParams& p);

} // namespace wavefuse
