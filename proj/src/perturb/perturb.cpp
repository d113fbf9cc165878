#include "lipfd/perturb.hpp"

#include "lipfd/errors.hpp"
#include "lipfd/rng.hpp"

#include <cmath>

namespace lipfd::perturb {

namespace {

// Robustness experiment parameters, severity 1..5 per kind.
constexpr double kBlockCount[5] = {16, 32, 48, 64, 80};
constexpr double kContrast[5] = {0.85, 0.725, 0.6, 0.475, 0.35};
constexpr double kSaturation[5] = {0.4, 0.3, 0.2, 0.1, 0.0};
constexpr double kBlurKernel[5] = {7, 9, 13, 17, 21};
constexpr double kNoiseVar[5] = {0.001, 0.002, 0.005, 0.01, 0.05};
constexpr double kPixelation[5] = {2, 3, 4, 5, 6};
constexpr double kCrf[5] = {30, 32, 35, 38, 40};

constexpr int kBlockSide = 16;
constexpr double kBlockFill = 0.5;

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

Image apply_contrast(const Image& img, double p) {
    if (p == 1.0) return img;  // identity probe, bit-exact
    Image out = img;
    for (double& v : out.px) v = clip01((v - 0.5) * p + 0.5);
    return out;
}

Image apply_saturation(const Image& img, double p) {
    Image out(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double r = img.at(y, x, 0), g = img.at(y, x, 1), b = img.at(y, x, 2);
            // BT.601 full-range YCbCr.
            double yy = 0.299 * r + 0.587 * g + 0.114 * b;
            double cb = 0.5 + (-0.168736 * r - 0.331264 * g + 0.5 * b);
            double cr = 0.5 + (0.5 * r - 0.418688 * g - 0.081312 * b);
            cb = 0.5 + p * (cb - 0.5);
            cr = 0.5 + p * (cr - 0.5);
            double r2 = yy + 1.402 * (cr - 0.5);
            double g2 = yy - 0.344136 * (cb - 0.5) - 0.714136 * (cr - 0.5);
            double b2 = yy + 1.772 * (cb - 0.5);
            out.at(y, x, 0) = clip01(r2);
            out.at(y, x, 1) = clip01(g2);
            out.at(y, x, 2) = clip01(b2);
        }
    }
    return out;
}

Image apply_blocks(const Image& img, int count, uint64_t seed) {
    Image out = img;
    Rng rng(seed);
    int side = std::min({kBlockSide, img.height, img.width});
    for (int n = 0; n < count; ++n) {
        int y0 = static_cast<int>(rng.uniform_int(0, img.height - side));
        int x0 = static_cast<int>(rng.uniform_int(0, img.width - side));
        for (int y = y0; y < y0 + side; ++y) {
            for (int x = x0; x < x0 + side; ++x) {
                out.at(y, x, 0) = kBlockFill;
                out.at(y, x, 1) = kBlockFill;
                out.at(y, x, 2) = kBlockFill;
            }
        }
    }
    return out;
}

Image apply_noise(const Image& img, double variance, uint64_t seed) {
    Image out = img;
    Rng rng(seed);
    double sigma = std::sqrt(variance);
    for (double& v : out.px) v = clip01(v + sigma * rng.normal());
    return out;
}

Image apply_pixelation(const Image& img, int factor) {
    if (factor <= 1) return img;
    int dh = std::max(1, img.height / factor);
    int dw = std::max(1, img.width / factor);
    Image down = resize(img, dh, dw);
    return resize(down, img.height, img.width, /*nearest=*/true);
}

Image apply_compression(const Image& img, double crf) {
    // Still-image fallback for the codec rate factor: map CRF 30..40 onto a
    // decreasing JPEG quality scale.
    int quality = static_cast<int>(std::lround(100.0 - 2.0 * crf));
    quality = quality < 1 ? 1 : (quality > 100 ? 100 : quality);
    return jpeg_roundtrip(img, quality);
}

}  // namespace

Kind kind_from(const std::string& name) {
    if (name == "block_wise") return Kind::block_wise;
    if (name == "contrast") return Kind::contrast;
    if (name == "saturation") return Kind::saturation;
    if (name == "gaussian_blur") return Kind::gaussian_blur;
    if (name == "gaussian_noise") return Kind::gaussian_noise;
    if (name == "pixelation") return Kind::pixelation;
    if (name == "compression") return Kind::compression;
    throw ArgumentError("unknown perturbation kind: " + name);
}

std::string kind_name(Kind kind) {
    switch (kind) {
        case Kind::block_wise: return "block_wise";
        case Kind::contrast: return "contrast";
        case Kind::saturation: return "saturation";
        case Kind::gaussian_blur: return "gaussian_blur";
        case Kind::gaussian_noise: return "gaussian_noise";
        case Kind::pixelation: return "pixelation";
        case Kind::compression: return "compression";
    }
    throw ArgumentError("unknown perturbation kind");
}

PerturbationSpec resolve(Kind kind, int severity) {
    if (severity < 1 || severity > kSeverityCount) {
        throw ArgumentError("severity must be 1..5, got " + std::to_string(severity));
    }
    const double* table = nullptr;
    switch (kind) {
        case Kind::block_wise: table = kBlockCount; break;
        case Kind::contrast: table = kContrast; break;
        case Kind::saturation: table = kSaturation; break;
        case Kind::gaussian_blur: table = kBlurKernel; break;
        case Kind::gaussian_noise: table = kNoiseVar; break;
        case Kind::pixelation: table = kPixelation; break;
        case Kind::compression: table = kCrf; break;
    }
    return PerturbationSpec{kind, severity, table[severity - 1]};
}

Image apply(const Image& image, const PerturbationSpec& spec, uint64_t seed) {
    for (double v : image.px) {
        if (!std::isfinite(v)) throw ValidationError("perturb: non-finite input image");
    }
    switch (spec.kind) {
        case Kind::block_wise:
            return apply_blocks(image, static_cast<int>(spec.param), seed);
        case Kind::contrast:
            return apply_contrast(image, spec.param);
        case Kind::saturation:
            return apply_saturation(image, spec.param);
        case Kind::gaussian_blur: {
            int ksize = static_cast<int>(spec.param);
            double sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8;
            return gaussian_blur(image, ksize, sigma);
        }
        case Kind::gaussian_noise:
            return apply_noise(image, spec.param, seed);
        case Kind::pixelation:
            return apply_pixelation(image, static_cast<int>(spec.param));
        case Kind::compression:
            return apply_compression(image, spec.param);
    }
    throw ArgumentError("unknown perturbation kind");
}

avdata::WindowSample apply_to_window(const avdata::WindowSample& sample,
                                     const PerturbationSpec& spec, uint64_t seed) {
    if (sample.frames.empty()) throw ArgumentError("apply_to_window: sample has no frames");
    avdata::WindowSample out = sample;
    const int side = sample.frames[0].width;
    const int band_h = sample.composite.height - side;
    if (band_h < 0 || sample.composite.width != side * static_cast<int>(sample.frames.size())) {
        throw ValidationError("apply_to_window: composite does not match frame layout");
    }
    for (size_t i = 0; i < out.frames.size(); ++i) {
        out.frames[i] = apply(sample.frames[i], spec, seed + static_cast<uint64_t>(i));
        // Rewrite just this frame's tile; band rows stay untouched.
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                for (int c = 0; c < 3; ++c) {
                    out.composite.at(band_h + y, static_cast<int>(i) * side + x, c) =
                        out.frames[i].at(y, x, c);
                }
            }
        }
    }
    return out;
}

}  // namespace lipfd::perturb
