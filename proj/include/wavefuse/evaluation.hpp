#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "wavefuse/image.hpp"

namespace wavefuse {

struct MetricReport {
    double entropy = 0.0;           // bits, 256-bin luminance histogram
    double avg_gradient = 0.0;      // mean interior sqrt((gx^2+gy^2)/2)
    double rms_contrast = 0.0;      // luminance standard deviation
    double local_contrast = 0.0;    // mean of 16x16 tile RMS contrasts
    double colorfulness = 0.0;      // Hasler-Susstrunk statistic
    double dark_channel_mean = 0.0; // radius-7 dark channel average
    std::optional<double> rmse_to_reference;
};

/// Koschmieder model I = J*t + A*(1-t). A non-empty t_map (H x W, one
/// channel, values in (0,1]) overrides the scalar t per pixel.
struct HazeModel {
    double t = 0.6;
    ImagePlanar t_map;
    std::array<double, 3> airlight = {0.85, 0.85, 0.85};

    void validate() const;
};

double entropy(const ImagePlanar& img);
double avg_gradient(const ImagePlanar& img);
double rms_contrast(const ImagePlanar& img);
double local_contrast(const ImagePlanar& img, int tile = 16);
double colorfulness(const ImagePlanar& img);
double dark_channel_mean(const ImagePlanar& img, int radius = 7);
double rmse(const ImagePlanar& a, const ImagePlanar& b);
double mean_luminance(const ImagePlanar& img);

ImagePlanar apply_haze(const ImagePlanar& clean, const HazeModel& model);
ImagePlanar apply_underwater_cast(const ImagePlanar& clean,
                                  const std::array<double, 3>& attenuation);

/// All metrics; rmse present iff a reference was given. Single-channel
/// images are treated as gray RGB so every column is defined.
MetricReport report(const ImagePlanar& img, const ImagePlanar* reference = nullptr);

std::string metric_csv_header();
/// One CSV row: image,status,entropy,...,rmse_to_reference (rmse blank when
/// absent). `status` is "ok" here; failed rows are written by the CLI.
std::string metric_csv_row(const std::string& name, const MetricReport& r);

/// splitmix64: tiny deterministic generator so corpora are reproducible
/// across platforms and standard-library versions.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next();
    double uniform(); // [0, 1)
};

/// Deterministic 3-channel test scene. Five structural families selected by
/// index; every scene carries a true-black and a true-white patch plus
/// saturated, roughly channel-balanced structure.
ImagePlanar make_test_scene(int index, int height, int width, std::uint64_t seed);

} // namespace wavefuse
