#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "wavefuse/dcp.hpp"
#include "wavefuse/evaluation.hpp"

using namespace wavefuse;

namespace {

ImagePlanar random_rgb(int h, int w, std::uint64_t seed) {
    ImagePlanar img(h, w, 3, ColorSpace::Srgb);
    Rng rng(seed);
    for (auto& v : img.data)
        v = rng.uniform();
    return img;
}

// brute-force dark channel: min over channels, then min over the clipped window
double dark_at(const ImagePlanar& img, int y, int x, int radius) {
    double best = 1e300;
    for (int yy = std::max(0, y - radius); yy <= std::min(img.height - 1, y + radius); ++yy)
        for (int xx = std::max(0, x - radius); xx <= std::min(img.width - 1, x + radius); ++xx)
            for (int c = 0; c < 3; ++c)
                best = std::min(best, img.at(c, yy, xx));
    return best;
}

} // namespace

TEST_CASE("dark channel matches the brute-force window oracle") {
    for (int radius : {1, 2, 5}) {
        ImagePlanar img = random_rgb(11, 13, 100 + radius);
        ImagePlanar dark = dark_channel(img, radius);
        REQUIRE(dark.channels == 1);
        for (int y = 0; y < 11; ++y)
            for (int x = 0; x < 13; ++x)
                CHECK(dark.at(0, y, x) == dark_at(img, y, x, radius));
    }
}

TEST_CASE("dark channel endpoints") {
    ImagePlanar white = make_rgb(8, 8, 1.0, 1.0, 1.0);
    for (double v : dark_channel(white, 3).data)
        CHECK(v == 1.0);
    ImagePlanar nored = random_rgb(8, 8, 4);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            nored.at(0, y, x) = 0.0;
    for (double v : dark_channel(nored, 3).data)
        CHECK(v == 0.0);
    CHECK_THROWS_AS((void)dark_channel(make_gray(8, 8), 3), Error);
}

TEST_CASE("brightening a haze-free image raises its dark channel") {
    ImagePlanar img = random_rgb(16, 16, 5);
    ImagePlanar brighter = img;
    for (auto& v : brighter.data)
        v = 0.5 + 0.5 * v;
    ImagePlanar d0 = dark_channel(img, 7), d1 = dark_channel(brighter, 7);
    for (std::size_t i = 0; i < d0.data.size(); ++i)
        CHECK(d1.data[i] >= d0.data[i]);
}

TEST_CASE("airlight estimation") {
    DcpParams p;
    SUBCASE("uniform image estimates itself") {
        ImagePlanar img = make_rgb(16, 16, 0.7, 0.6, 0.5);
        auto a = estimate_airlight(img, dark_channel(img, p.patch), p.airlight_fraction);
        CHECK(a[0] == doctest::Approx(0.7));
        CHECK(a[1] == doctest::Approx(0.6));
        CHECK(a[2] == doctest::Approx(0.5));
    }
    SUBCASE("finds the bright haze patch in a dark scene") {
        ImagePlanar img = make_rgb(32, 32, 0.1, 0.15, 0.1);
        // a 6x6 hazy region, brightest in the dark channel
        for (int y = 12; y < 18; ++y)
            for (int x = 12; x < 18; ++x)
                for (int c = 0; c < 3; ++c)
                    img.at(c, y, x) = 0.82;
        auto a = estimate_airlight(img, dark_channel(img, 2), p.airlight_fraction);
        for (int c = 0; c < 3; ++c)
            CHECK(a[c] == doctest::Approx(0.82).epsilon(1e-6));
    }
    SUBCASE("synthetic haze recovers the airlight approximately") {
        // the scene's white patch must outlast the min-filter erosion, so it
        // needs to span more than the 15x15 dark-channel window
        ImagePlanar scene = make_test_scene(1, 128, 128, 7);
        HazeModel model;
        model.t = 0.35;
        model.airlight = {0.8, 0.8, 0.8};
        ImagePlanar hazy = apply_haze(scene, model);
        DcpParams q;
        auto a = estimate_airlight(hazy, dark_channel(hazy, q.patch), q.airlight_fraction);
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(a[c] - 0.8) < 0.1); // biased high by bright content
    }
}

TEST_CASE("guided filter basics") {
    DcpParams p;
    SUBCASE("constant input is a fixed point") {
        ImagePlanar guide = random_rgb(16, 16, 9);
        ImagePlanar flat = make_gray(16, 16, 0.37);
        ImagePlanar out = guided_filter(flat, extract_channel(guide, 0), 4, 1e-3);
        for (double v : out.data)
            CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
    }
    SUBCASE("self-guidance with tiny eps is near identity") {
        ImagePlanar img = extract_channel(random_rgb(24, 24, 11), 1);
        ImagePlanar out = guided_filter(img, img, 3, 1e-12);
        CHECK(rms_diff(out, img) < 1e-5);
    }
    SUBCASE("matches a per-window regression oracle") {
        ImagePlanar guide = extract_channel(random_rgb(7, 6, 13), 0);
        ImagePlanar src = extract_channel(random_rgb(7, 6, 14), 2);
        const int r = 1;
        const double eps = 0.01;
        const int h = 7, w = 6;
        // pass 1: per-window linear fit
        ImagePlanar a = make_gray(h, w), b = make_gray(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double mi = 0, mp = 0, mii = 0, mip = 0;
                int n = 0;
                for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
                    for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                        double i = guide.at(0, yy, xx), pp = src.at(0, yy, xx);
                        mi += i; mp += pp; mii += i * i; mip += i * pp;
                        ++n;
                    }
                mi /= n; mp /= n; mii /= n; mip /= n;
                a.at(0, y, x) = (mip - mi * mp) / ((mii - mi * mi) + eps);
                b.at(0, y, x) = mp - a.at(0, y, x) * mi;
            }
        // pass 2: average the fits over each window
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double ma = 0, mb = 0;
                int n = 0;
                for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
                    for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                        ma += a.at(0, yy, xx);
                        mb += b.at(0, yy, xx);
                        ++n;
                    }
                double want = (ma / n) * guide.at(0, y, x) + mb / n;
                CHECK(guided_filter(src, guide, r, eps).at(0, y, x) ==
                      doctest::Approx(want).epsilon(1e-12));
            }
    }
}

TEST_CASE("transmission map properties") {
    DcpParams p;
    SUBCASE("pure airlight gives the floor") {
        ImagePlanar img = make_rgb(16, 16, 0.8, 0.8, 0.8);
        ImagePlanar t = transmission(img, {0.8, 0.8, 0.8}, p);
        for (double v : t.data)
            CHECK(v == doctest::Approx(p.t_floor).epsilon(1e-9));
    }
    SUBCASE("black scene gives full transmission") {
        ImagePlanar img = make_rgb(16, 16, 0.0, 0.0, 0.0);
        ImagePlanar t = transmission(img, {0.8, 0.8, 0.8}, p);
        for (double v : t.data)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("range is [t_floor, 1] on arbitrary input") {
        ImagePlanar img = random_rgb(32, 32, 21);
        ImagePlanar t = transmission(img, {0.9, 0.85, 0.8}, p);
        CHECK(min_value(t) >= p.t_floor - 1e-12);
        CHECK(max_value(t) <= 1.0 + 1e-12);
    }
    SUBCASE("recovers a constant synthetic transmission approximately") {
        ImagePlanar scene = make_test_scene(2, 64, 64, 3);
        HazeModel model;
        model.t = 0.5;
        model.airlight = {0.8, 0.8, 0.8};
        ImagePlanar hazy = apply_haze(scene, model);
        DcpParams q;
        q.omega = 1.0;
        ImagePlanar t = transmission(hazy, {0.8, 0.8, 0.8}, q);
        CHECK(std::abs(mean_value(t) - 0.5) < 0.1);
    }
}

TEST_CASE("dehazing moves a hazy image toward the clean scene") {
    ImagePlanar scene = make_test_scene(0, 64, 64, 5);
    HazeModel model;
    model.t = 0.6;
    model.airlight = {0.85, 0.85, 0.85};
    ImagePlanar hazy = apply_haze(scene, model);
    ImagePlanar out = dcp_dehaze(hazy, DcpParams{});
    CHECK(out.same_shape(hazy));
    CHECK(min_value(out) >= 0.0);
    CHECK(max_value(out) <= 1.0);
    CHECK(rmse(out, scene) < rmse(hazy, scene));
    CHECK(dark_channel_mean(out) < dark_channel_mean(hazy));
}

TEST_CASE("a dark haze-free card is nearly unchanged") {
    // dark saturated content keeps the dark channel near zero -> t ~ 1
    ImagePlanar img = make_rgb(48, 48, 0.0, 0.0, 0.0);
    Rng rng(77);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            int k = (y / 12 + x / 12) % 3;
            img.at(k, y, x) = 0.25 + 0.3 * rng.uniform();
        }
    ImagePlanar out = dcp_dehaze(img, DcpParams{});
    CHECK(rmse(out, img) < 0.05);
}

TEST_CASE("dcp parameter validation") {
    DcpParams p;
    SUBCASE("omega out of range") { p.omega = 1.5; }
    SUBCASE("t_floor zero") { p.t_floor = 0.0; }
    SUBCASE("negative patch") { p.patch = -1; }
    SUBCASE("airlight fraction out of range") { p.airlight_fraction = 0.0; }
    SUBCASE("negative guided eps") { p.guided_eps = -1.0; }
    CHECK_THROWS_AS((void)dcp_dehaze(random_rgb(16, 16, 1), p), Error);
}
