#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace lipfd {

/// Every tunable in one place. Parsed from `key=value` files; unknown keys
/// are rejected. serialize() materializes all defaults so the persisted
/// copy next to each artifact is complete.
struct RunConfig {
    // windowing / composite layout
    int window_size = 5;
    int frame_side = 224;
    int band_height = 224;
    std::array<double, 3> crop_ratios{1.0, 0.65, 0.45};
    std::string anchor_mode = "fixed";  // fixed | landmarks

    // audio front-end
    int sample_rate = 16000;
    int mel_bins = 64;
    double mel_window_ms = 25.0;
    double mel_hop_ms = 10.0;
    double log_floor = 1e-10;
    bool denoise = true;

    // model
    std::string backbone = "vit_l14";  // vit_l14 | vit_b16 | tiny
    int d_r = 256;
    int region_c1 = 32;
    int region_c2 = 64;
    int region_input_side = 64;
    int classifier_hidden = 256;
    double k = 1.0;
    double lambda_ra = 1.0;
    bool unfreeze_backbone = false;

    // optimization
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 10;
    int workers = 0;  // 0 = hardware concurrency

    // dataset expansion / augmentation
    int expand_factor = 50;
    double augment_prob = 0.0;

    // evaluation
    double threshold = 0.5;

    // synthetic benchmark
    double synth_clip_seconds = 3.0;
    double synth_fps = 20.0;
    double synth_desync_seconds = 0.4;
    std::string synth_fake_mode = "shift";  // shift | resample

    uint64_t seed = 42;
    std::string cache_root = "cache";

    void validate() const;  // throws ConfigError
};

RunConfig parse_config_file(const std::filesystem::path& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);
std::string serialize_config(const RunConfig& cfg);

/// Default cache root: $LIPFD_CACHE when set, otherwise cfg.cache_root.
std::filesystem::path resolve_cache_root(const RunConfig& cfg);

}  // namespace lipfd
