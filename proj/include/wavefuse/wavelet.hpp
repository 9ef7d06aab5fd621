#pragma once

#include <vector>

#include "wavefuse/image.hpp"

namespace wavefuse {

enum class WaveletBasis { Haar, Db2 };
enum class BoundaryMode { Symmetric };

struct Subbands {
    ImagePlanar ll, lh, hl, hh; // lh = row-lowpass/column-highpass
};

struct DetailTriple {
    ImagePlanar lh, hl, hh;
};

/// J-level 2-D decomposition. details[0] is the finest level; approx is the
/// final LL. Subbands at level j have ceil(H/2^j) x ceil(W/2^j) samples.
struct WaveletPyramid {
    int levels = 0;
    int input_height = 0;
    int input_width = 0;
    WaveletBasis basis = WaveletBasis::Haar;
    BoundaryMode boundary = BoundaryMode::Symmetric;
    ImagePlanar approx;
    std::vector<DetailTriple> details;
};

/// One separable analysis level (rows then columns). Odd extents are extended
/// by one half-sample-symmetric copy so every subband has ceil-half size.
/// Reconstruction through idwt2_level is exact to machine precision: Haar is
/// a plain orthonormal butterfly and Db2 uses the lifting factorization of
/// the D4 filters with symmetric extension applied to the lifting lanes.
Subbands dwt2_level(const ImagePlanar& img, WaveletBasis basis);

ImagePlanar idwt2_level(const Subbands& sb, WaveletBasis basis, int target_height,
                        int target_width);

WaveletPyramid decompose(const ImagePlanar& img, int levels, WaveletBasis basis);

ImagePlanar reconstruct(const WaveletPyramid& pyr);

} // namespace wavefuse
