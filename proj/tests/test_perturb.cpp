#include <doctest.h>

#include "helpers.hpp"
#include "lipfd/errors.hpp"
#include "lipfd/perturb.hpp"
#include "lipfd/rng.hpp"

#include <cmath>

using namespace lipfd;
using namespace lipfd::perturb;

namespace {

double mean_abs_dev(const Image& a, const Image& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.px.size(); ++i) acc += std::abs(a.px[i] - b.px[i]);
    return acc / static_cast<double>(a.px.size());
}

}  // namespace

TEST_SUITE("perturb") {

TEST_CASE("resolve: full severity table") {
    const double expected[7][5] = {
        {16, 32, 48, 64, 80},               // block_wise
        {0.85, 0.725, 0.6, 0.475, 0.35},    // contrast
        {0.4, 0.3, 0.2, 0.1, 0.0},          // saturation
        {7, 9, 13, 17, 21},                 // gaussian_blur
        {0.001, 0.002, 0.005, 0.01, 0.05},  // gaussian_noise
        {2, 3, 4, 5, 6},                    // pixelation
        {30, 32, 35, 38, 40},               // compression
    };
    for (int k = 0; k < kKindCount; ++k) {
        for (int s = 1; s <= kSeverityCount; ++s) {
            PerturbationSpec spec = resolve(static_cast<Kind>(k), s);
            CHECK(spec.param == expected[k][s - 1]);
            CHECK(spec.severity == s);
        }
    }
}

TEST_CASE("resolve: reference entries named in the protocol") {
    CHECK(resolve(Kind::gaussian_blur, 3).param == 13.0);
    CHECK(resolve(Kind::compression, 1).param == 30.0);
    CHECK(resolve(Kind::gaussian_noise, 5).param == 0.05);
}

TEST_CASE("resolve: severity range is enforced") {
    CHECK_THROWS_AS(resolve(Kind::contrast, 0), ArgumentError);
    CHECK_THROWS_AS(resolve(Kind::contrast, 6), ArgumentError);
    CHECK_THROWS_AS(kind_from("sharpen"), ArgumentError);
}

TEST_CASE("kind names round trip") {
    for (int k = 0; k < kKindCount; ++k) {
        auto kind = static_cast<Kind>(k);
        CHECK(kind_from(kind_name(kind)) == kind);
    }
}

TEST_CASE("apply: contrast 1.0 probe is the identity") {
    Image img = testutil::structured_image(64);
    PerturbationSpec probe{Kind::contrast, 0, 1.0};
    Image out = apply(img, probe, 9);
    CHECK(out.px == img.px);
}

TEST_CASE("apply: pixelation factor 2 is constant on 2x2 blocks") {
    Image img = testutil::structured_image(224);
    Image out = apply(img, resolve(Kind::pixelation, 1), 0);
    REQUIRE(out.height == 224);
    REQUIRE(out.width == 224);
    for (int y = 0; y < 224; y += 2) {
        for (int x = 0; x < 224; x += 2) {
            for (int c = 0; c < 3; ++c) {
                double v = out.at(y, x, c);
                CHECK(out.at(y, x + 1, c) == v);
                CHECK(out.at(y + 1, x, c) == v);
                CHECK(out.at(y + 1, x + 1, c) == v);
            }
        }
    }
}

TEST_CASE("apply: seeded kinds are byte-reproducible") {
    Image img = testutil::structured_image(96);
    for (Kind kind : {Kind::gaussian_noise, Kind::block_wise}) {
        PerturbationSpec spec = resolve(kind, 3);
        Image a = apply(img, spec, 1234);
        Image b = apply(img, spec, 1234);
        CHECK(a.px == b.px);
        Image c = apply(img, spec, 1235);
        CHECK(a.px != c.px);
    }
}

TEST_CASE("apply: every kind preserves shape and range") {
    Image img = testutil::structured_image(64);
    for (int k = 0; k < kKindCount; ++k) {
        for (int s : {1, 5}) {
            Image out = apply(img, resolve(static_cast<Kind>(k), s), 7);
            CHECK(out.height == img.height);
            CHECK(out.width == img.width);
            for (double v : out.px) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("apply: saturation severity 5 is grayscale") {
    Image img = testutil::structured_image(32);
    Image out = apply(img, resolve(Kind::saturation, 5), 0);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            CHECK(out.at(y, x, 0) == doctest::Approx(out.at(y, x, 1)).epsilon(1e-6));
            CHECK(out.at(y, x, 1) == doctest::Approx(out.at(y, x, 2)).epsilon(1e-6));
        }
    }
}

TEST_CASE("apply: degradation grows with severity for noise, blur, pixelation") {
    Image img = testutil::structured_image(128);
    for (Kind kind : {Kind::gaussian_noise, Kind::gaussian_blur, Kind::pixelation}) {
        double prev = -1.0;
        for (int s = 1; s <= 5; ++s) {
            Image out = apply(img, resolve(kind, s), 42);
            double dev = mean_abs_dev(img, out);
            CHECK(dev >= prev - 1e-9);
            prev = dev;
        }
    }
}

TEST_CASE("apply: rejects non-finite input") {
    Image img(8, 8);
    img.px[10] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(apply(img, resolve(Kind::contrast, 1), 0), ValidationError);
}

TEST_CASE("apply_to_window: band untouched, frames corrupted, seeds re-derivable") {
    // Build a window whose band and frames are distinguishable.
    std::vector<Image> frames;
    for (int i = 0; i < 3; ++i) frames.push_back(testutil::structured_image(40, 100 + i));
    avdata::SpectrogramSlice slice;
    slice.time_bins = 5;
    slice.freq_bins = 6;
    slice.hop_seconds = 0.01;
    slice.m.resize(30);
    for (size_t i = 0; i < slice.m.size(); ++i) slice.m[i] = static_cast<double>(i % 7);
    Image band = avdata::render_band(slice, 24, 120);
    avdata::WindowSample ws =
        avdata::window_from_composite("w", 0, 1, avdata::compose_window_image(frames, band),
                                      avdata::WindowLayout{40, 24});

    PerturbationSpec spec = resolve(Kind::gaussian_noise, 4);
    avdata::WindowSample out = apply_to_window(ws, spec, 777);

    // Spectrogram band rows are byte-identical.
    for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < out.composite.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                CHECK(out.composite.at(y, x, c) == ws.composite.at(y, x, c));
            }
        }
    }
    // Frame band differs.
    CHECK(out.composite.px != ws.composite.px);

    // Per-frame seeds are seed + frame_index.
    for (size_t i = 0; i < out.frames.size(); ++i) {
        Image expected = apply(ws.frames[i], spec, 777 + static_cast<uint64_t>(i));
        CHECK(out.frames[i].px == expected.px);
    }
    // And the composite tiles match the corrupted frames.
    for (int i = 0; i < 3; ++i) {
        for (int y = 0; y < 40; ++y) {
            for (int x = 0; x < 40; ++x) {
                CHECK(out.composite.at(24 + y, i * 40 + x, 0) ==
                      out.frames[static_cast<size_t>(i)].at(y, x, 0));
            }
        }
    }
}

}  // TEST_SUITE
