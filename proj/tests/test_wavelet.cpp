#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "wavefuse/wavelet.hpp"

using namespace wavefuse;

namespace {

ImagePlanar random_plane(int h, int w, std::uint64_t seed) {
    ImagePlanar img = make_gray(h, w);
    std::uint64_t s = seed;
    for (auto& v : img.data) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        v = (s >> 11) * 0x1.0p-53;
    }
    return img;
}

double energy(const ImagePlanar& img) {
    double e = 0.0;
    for (double v : img.data)
        e += v * v;
    return e;
}

} // namespace

TEST_CASE("haar 2x2 quadrants, frozen hand values") {
    // [[1,2],[3,4]]: LL averages to 5, LH carries the vertical step,
    // HL the horizontal step, HH the (zero) diagonal interaction.
    ImagePlanar img = make_gray(2, 2);
    img.data = {1.0, 2.0, 3.0, 4.0};
    Subbands sb = dwt2_level(img, WaveletBasis::Haar);
    CHECK(sb.ll.at(0, 0, 0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(sb.lh.at(0, 0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(sb.hl.at(0, 0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sb.hh.at(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("haar on a constant: LL doubles it, details vanish exactly") {
    ImagePlanar img = make_gray(4, 4, 0.37);
    Subbands sb = dwt2_level(img, WaveletBasis::Haar);
    for (double v : sb.ll.data)
        CHECK(v == doctest::Approx(0.74).epsilon(1e-14));
    for (const ImagePlanar* b : {&sb.lh, &sb.hl, &sb.hh})
        for (double v : b->data)
            CHECK(v == 0.0);
}

TEST_CASE("db2 detail coefficients on a constant are numerically zero") {
    ImagePlanar img = make_gray(8, 8, 0.61);
    Subbands sb = dwt2_level(img, WaveletBasis::Db2);
    for (const ImagePlanar* b : {&sb.lh, &sb.hl, &sb.hh})
        for (double v : b->data)
            CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("subband shapes are ceil-halves") {
    Subbands sb = dwt2_level(random_plane(5, 7, 1), WaveletBasis::Haar);
    CHECK(sb.ll.height == 3);
    CHECK(sb.ll.width == 4);
    CHECK(sb.lh.same_shape(sb.ll));
    CHECK(sb.hl.same_shape(sb.ll));
    CHECK(sb.hh.same_shape(sb.ll));
}

TEST_CASE("single level round trip, both bases, odd and even sizes") {
    for (WaveletBasis basis : {WaveletBasis::Haar, WaveletBasis::Db2})
        for (auto [h, w] : {std::pair{2, 2}, {3, 5}, {8, 8}, {9, 4}, {2, 11}, {16, 17}}) {
            ImagePlanar img = random_plane(h, w, 100 * h + w);
            ImagePlanar back = idwt2_level(dwt2_level(img, basis), basis, h, w);
            CAPTURE(h); CAPTURE(w);
            CHECK(rms_diff(back, img) < 1e-12);
        }
}

TEST_CASE("haar preserves energy on even dimensions") {
    ImagePlanar img = random_plane(64, 64, 9);
    WaveletPyramid pyr = decompose(img, 4, WaveletBasis::Haar);
    double e = energy(pyr.approx);
    for (const DetailTriple& d : pyr.details)
        e += energy(d.lh) + energy(d.hl) + energy(d.hh);
    CHECK(e == doctest::Approx(energy(img)).epsilon(1e-12));
}

TEST_CASE("multilevel decompose/reconstruct across sizes and depths") {
    std::uint64_t seed = 42;
    for (WaveletBasis basis : {WaveletBasis::Haar, WaveletBasis::Db2})
        for (auto [h, w] : {std::pair{8, 8}, {12, 20}, {33, 47}, {64, 3}, {128, 128}})
            for (int levels = 1; levels <= 4; ++levels) {
                int min_dim = h < w ? h : w;
                if (min_dim >> levels < 1)
                    continue;
                ImagePlanar img = random_plane(h, w, ++seed);
                WaveletPyramid pyr = decompose(img, levels, basis);
                CHECK(static_cast<int>(pyr.details.size()) == levels);
                ImagePlanar back = reconstruct(pyr);
                CAPTURE(h); CAPTURE(w); CAPTURE(levels);
                CHECK(rms_diff(back, img) < 1e-10);
            }
}

TEST_CASE("reconstruction is linear in the coefficients") {
    ImagePlanar img = random_plane(24, 18, 4);
    WaveletPyramid pyr = decompose(img, 2, WaveletBasis::Db2);
    WaveletPyramid doubled = pyr;
    for (auto& v : doubled.approx.data) v *= 2.0;
    for (auto& d : doubled.details) {
        for (auto& v : d.lh.data) v *= 2.0;
        for (auto& v : d.hl.data) v *= 2.0;
        for (auto& v : d.hh.data) v *= 2.0;
    }
    ImagePlanar a = reconstruct(pyr), b = reconstruct(doubled);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        CHECK(b.data[i] == doctest::Approx(2.0 * a.data[i]).epsilon(1e-12));
}

TEST_CASE("invalid wavelet inputs") {
    CHECK_THROWS_AS((void)dwt2_level(make_gray(1, 8), WaveletBasis::Haar), Error);
    CHECK_THROWS_AS((void)dwt2_level(ImagePlanar(4, 4, 3, ColorSpace::Srgb), WaveletBasis::Haar),
                    Error);
    CHECK_THROWS_AS((void)decompose(random_plane(8, 8, 1), 0, WaveletBasis::Haar), Error);
    CHECK_THROWS_AS((void)decompose(random_plane(8, 8, 1), 4, WaveletBasis::Haar), Error);

    Subbands sb = dwt2_level(random_plane(6, 6, 2), WaveletBasis::Haar);
    CHECK_THROWS_AS((void)idwt2_level(sb, WaveletBasis::Haar, 9, 6), Error);
    sb.hh = make_gray(2, 2);
    CHECK_THROWS_AS((void)idwt2_level(sb, WaveletBasis::Haar, 6, 6), Error);

    WaveletPyramid pyr = decompose(random_plane(16, 16, 3), 2, WaveletBasis::Haar);
    pyr.details.pop_back();
    CHECK_THROWS_AS((void)reconstruct(pyr), Error);
}
