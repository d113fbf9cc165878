#pragma once

#include "lipfd/avdata.hpp"
#include "lipfd/image.hpp"

#include <cstdint>
#include <string>

namespace lipfd::perturb {

enum class Kind {
    block_wise,
    contrast,
    saturation,
    gaussian_blur,
    gaussian_noise,
    pixelation,
    compression,
};

Kind kind_from(const std::string& name);
std::string kind_name(Kind kind);
constexpr int kKindCount = 7;
constexpr int kSeverityCount = 5;

/// A (kind, severity) pair resolved to its hyperparameter value. `param`
/// carries the table entry; probe specs with out-of-table params can be
/// built directly (e.g. contrast 1.0 as an identity probe).
struct PerturbationSpec {
    Kind kind = Kind::contrast;
    int severity = 0;  // 1..5 for table entries, 0 for manual probes
    double param = 1.0;
};

/// Severity-table lookup. Throws ArgumentError for severity outside 1..5.
PerturbationSpec resolve(Kind kind, int severity);

/// Applies one perturbation. Same shape out, values in [0,1], deterministic
/// under `seed` (only block_wise and gaussian_noise draw randomness).
///
/// Semantics per kind:
///   block_wise     param 16x16 mid-gray blocks at seeded uniform positions
///   contrast       out = (in - 0.5) * param + 0.5 (param 1.0 short-circuits)
///   saturation     Cb/Cr scaled toward 0.5 by param (BT.601)
///   gaussian_blur  square kernel of side param, sigma = 0.3*((param-1)*0.5-1)+0.8
///   gaussian_noise additive zero-mean noise of variance param, clipped
///   pixelation     downscale by factor param, nearest-neighbor upscale
///   compression    JPEG round trip at quality mapped from the rate factor
Image apply(const Image& image, const PerturbationSpec& spec, uint64_t seed);

/// Perturbs the frame band of a window only; the spectrogram band is left
/// byte-identical. Per-frame seeds are seed + frame_index.
avdata::WindowSample apply_to_window(const avdata::WindowSample& sample,
                                     const PerturbationSpec& spec, uint64_t seed);

}  // namespace lipfd::perturb
