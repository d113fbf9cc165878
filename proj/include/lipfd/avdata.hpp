#pragma once

#include "lipfd/config.hpp"
#include "lipfd/image.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lipfd::avdata {

/// One clip as described by a manifest line. frame paths and frame_count are
/// resolved (and validated) at load time.
struct ClipRecord {
    std::string clip_id;
    std::filesystem::path frame_dir;
    std::filesystem::path audio_path;
    int label = 0;  // 0 real, 1 fake
    std::string generator;
    std::string split;  // train | val | test
    double fps = 0.0;
    int sample_rate = 0;

    int frame_count = 0;
    std::vector<std::filesystem::path> frames;  // sorted
};

/// Manifest: one record per line, tab-separated `key=value` pairs, keys
/// exactly {clip_id, frame_dir, audio_path, label, generator, split, fps,
/// sample_rate}. Relative paths resolve against the manifest's directory.
std::vector<ClipRecord> load_manifest(const std::filesystem::path& path);

struct MelConfig {
    int sample_rate = 16000;
    int mel_bins = 64;
    double window_ms = 25.0;
    double hop_ms = 10.0;
    double log_floor = 1e-10;

    int window_samples() const;
    int hop_samples() const;
    int fft_size() const;  // next power of two >= window_samples
    double hop_seconds() const { return hop_ms / 1000.0; }

    static MelConfig from(const RunConfig& cfg) {
        MelConfig m;
        m.sample_rate = cfg.sample_rate;
        m.mel_bins = cfg.mel_bins;
        m.window_ms = cfg.mel_window_ms;
        m.hop_ms = cfg.mel_hop_ms;
        m.log_floor = cfg.log_floor;
        return m;
    }
};

/// Full-clip log-mel spectrogram. Values are natural-log magnitude above the
/// configured floor, i.e. ln(max(e, floor)) - ln(floor), so everything is
/// non-negative and digital silence maps to exactly 0.
struct Spectrogram {
    int time_bins = 0;
    int freq_bins = 0;
    double hop_seconds = 0.0;
    std::vector<double> m;  // [time, freq] row-major

    double at(int t, int f) const { return m[static_cast<size_t>(t) * freq_bins + f]; }
};

/// STFT frames are centered (reflect padding), so bin b sits at time b*hop.
Spectrogram compute_spectrogram(const std::vector<double>& audio, int sample_rate,
                                const MelConfig& cfg = {});

/// Triangular HTK-mel filterbank, [mel_bins, fft_size/2+1] row-major.
/// Exposed so tests can locate the bin a given frequency lands in.
std::vector<double> mel_filterbank(const MelConfig& cfg);

struct SpectrogramSlice {
    int time_bins = 0;
    int freq_bins = 0;
    double hop_seconds = 0.0;
    std::vector<double> m;  // [time, freq]
};

/// A model input unit: T consecutive frames plus the time-aligned
/// spectrogram slice, rendered as one composite image (band above frames).
struct WindowSample {
    std::string clip_id;
    int start_frame = 0;
    int t = 0;
    int label = 0;
    std::vector<Image> frames;  // T frames, frame_side x frame_side
    SpectrogramSlice spectrogram;
    Image composite;
};

struct WindowLayout {
    int frame_side = 224;
    int band_height = 224;

    static WindowLayout from(const RunConfig& cfg) {
        return WindowLayout{cfg.frame_side, cfg.band_height};
    }
};

/// Renders a slice as an image band: columns map to time bins
/// (nearest-neighbor), rows to mel bins with low frequencies at the bottom,
/// min-max normalized over the slice, replicated to all three channels.
Image render_band(const SpectrogramSlice& slice, int height, int width);

/// Stacks the band above the horizontal concatenation of the frames.
Image compose_window_image(const std::vector<Image>& frames, const Image& band);

SpectrogramSlice slice_spectrogram(const Spectrogram& spec, double t0, double t1,
                                   double slack_seconds);

/// Loads frames [start, start+t) from disk, resizes them to the layout's
/// frame side, slices the spectrogram to the window's time span and builds
/// the composite.
WindowSample assemble_window(const ClipRecord& clip, int start_frame, int t,
                             const Spectrogram& spec, const WindowLayout& layout);

/// Inverse of the composite layout: splits a cached composite back into
/// frames + band-only sample (the numeric slice is not recoverable from
/// pixels and is left empty).
WindowSample window_from_composite(const std::string& clip_id, int start_frame, int label,
                                   Image composite, const WindowLayout& layout);

struct WindowRef {
    int clip_index = 0;
    std::string clip_id;
    int start_frame = 0;
};

/// Draws up to `factor` distinct start offsets per clip, uniformly without
/// replacement, deterministically under `seed`. Clips with fewer available
/// offsets contribute all of them.
std::vector<WindowRef> expand_dataset(const std::vector<ClipRecord>& records, int t,
                                      int factor, uint64_t seed);

/// Spectral-gating noise reduction. The noise profile is taken from the
/// quietest 10% of analysis frames; bins below 1.5x the profile are
/// attenuated to 10%. Output length equals input length.
std::vector<double> denoise_audio(const std::vector<double>& audio, int sample_rate);

}  // namespace lipfd::avdata
