#pragma once

#include <filesystem>
#include <vector>

namespace lipfd {

/// Mono waveform, samples in [-1, 1].
struct Waveform {
    int sample_rate = 0;
    std::vector<double> samples;

    double duration() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

/// Reads 16-bit PCM WAV. Multichannel input is averaged down to mono.
Waveform read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono WAV.
void write_wav(const Waveform& wav, const std::filesystem::path& path);

/// Linear-interpolation resampler.
Waveform resample_linear(const Waveform& wav, int target_rate);

}  // namespace lipfd
