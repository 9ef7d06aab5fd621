#pragma once

#include <string>

#include "wavefuse/image.hpp"

namespace wavefuse {

/// Reads an 8-bit PNG, binary PPM (P6) or PGM (P5, maxval 255) file. The
/// format is detected from the file contents. Samples map to [0,1] by
/// division by 255; the tag is SRGB for 3-channel data and GRAY for 1-channel.
ImagePlanar load_image(const std::string& path);

/// Writes img as 8-bit PNG/PPM/PGM chosen by the file extension. Samples are
/// clamped to [0,1] and quantized as round(255*x).
void save_image(const ImagePlanar& img, const std::string& path);

} // namespace wavefuse
