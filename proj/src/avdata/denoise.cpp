#include "lipfd/avdata.hpp"
#include "lipfd/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace lipfd::avdata {

namespace {

std::mutex g_plan_mutex;

constexpr int kWin = 512;
constexpr int kHop = 128;
constexpr double kProfileQuantile = 0.10;  // quietest 10% of frames
constexpr double kGateThreshold = 1.5;     // multiple of the noise profile
constexpr double kGateGain = 0.1;          // attenuation for gated bins

}  // namespace

std::vector<double> denoise_audio(const std::vector<double>& audio, int sample_rate) {
    if (sample_rate <= 0) throw ArgumentError("denoise_audio: bad sample rate");
    for (double v : audio) {
        if (!std::isfinite(v)) throw ValidationError("denoise_audio: non-finite input");
    }
    const auto n_orig = static_cast<int64_t>(audio.size());
    if (n_orig == 0) return {};
    if (n_orig < kWin) return audio;  // too short to analyze; pass through

    // Reflect-pad one full window at each end so every output sample has
    // full overlap coverage; tiny window weights at the signal edges would
    // otherwise amplify the gating residual.
    std::vector<double> padded(static_cast<size_t>(n_orig) + 2 * kWin);
    for (int64_t i = 0; i < static_cast<int64_t>(padded.size()); ++i) {
        int64_t src = i - kWin;
        if (src < 0) src = -src;
        if (src >= n_orig) src = 2 * n_orig - 2 - src;
        padded[static_cast<size_t>(i)] = audio[static_cast<size_t>(src)];
    }
    const auto n = static_cast<int64_t>(padded.size());

    const int bins = kWin / 2 + 1;
    const int nframes = static_cast<int>((n - kWin) / kHop) + 1;

    std::vector<double> hann(kWin);
    for (int i = 0; i < kWin; ++i) {
        hann[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (kWin - 1));
    }

    double* fwd_in;
    fftw_complex* fwd_out;
    double* bwd_out;
    fftw_complex* bwd_in;
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fwd_in = fftw_alloc_real(kWin);
        fwd_out = fftw_alloc_complex(bins);
        bwd_in = fftw_alloc_complex(bins);
        bwd_out = fftw_alloc_real(kWin);
        fwd = fftw_plan_dft_r2c_1d(kWin, fwd_in, fwd_out, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(kWin, bwd_in, bwd_out, FFTW_ESTIMATE);
    }

    // Pass 1: magnitudes and per-frame energies for the noise profile.
    std::vector<double> mags(static_cast<size_t>(nframes) * bins);
    std::vector<std::pair<double, int>> energies(static_cast<size_t>(nframes));
    std::vector<std::vector<double>> spectra(static_cast<size_t>(nframes),
                                             std::vector<double>(static_cast<size_t>(bins) * 2));
    for (int f = 0; f < nframes; ++f) {
        int64_t start = static_cast<int64_t>(f) * kHop;
        for (int i = 0; i < kWin; ++i) {
            fwd_in[i] = padded[static_cast<size_t>(start + i)] * hann[static_cast<size_t>(i)];
        }
        fftw_execute(fwd);
        double energy = 0.0;
        for (int k = 0; k < bins; ++k) {
            double re = fwd_out[k][0], im = fwd_out[k][1];
            double mag = std::hypot(re, im);
            mags[static_cast<size_t>(f) * bins + k] = mag;
            spectra[static_cast<size_t>(f)][static_cast<size_t>(k) * 2] = re;
            spectra[static_cast<size_t>(f)][static_cast<size_t>(k) * 2 + 1] = im;
            energy += mag * mag;
        }
        energies[static_cast<size_t>(f)] = {energy, f};
    }

    std::sort(energies.begin(), energies.end());
    int profile_frames = std::max(1, static_cast<int>(std::floor(nframes * kProfileQuantile)));
    std::vector<double> profile(static_cast<size_t>(bins), 0.0);
    for (int i = 0; i < profile_frames; ++i) {
        int f = energies[static_cast<size_t>(i)].second;
        for (int k = 0; k < bins; ++k) {
            profile[static_cast<size_t>(k)] += mags[static_cast<size_t>(f) * bins + k];
        }
    }
    for (double& v : profile) v /= profile_frames;

    // Pass 2: gate and rebuild by weighted overlap-add.
    std::vector<double> out(static_cast<size_t>(n), 0.0);
    std::vector<double> norm(static_cast<size_t>(n), 0.0);
    for (int f = 0; f < nframes; ++f) {
        for (int k = 0; k < bins; ++k) {
            double mag = mags[static_cast<size_t>(f) * bins + k];
            double gain = mag > kGateThreshold * profile[static_cast<size_t>(k)] ? 1.0 : kGateGain;
            bwd_in[k][0] = spectra[static_cast<size_t>(f)][static_cast<size_t>(k) * 2] * gain;
            bwd_in[k][1] = spectra[static_cast<size_t>(f)][static_cast<size_t>(k) * 2 + 1] * gain;
        }
        fftw_execute(bwd);
        int64_t start = static_cast<int64_t>(f) * kHop;
        for (int i = 0; i < kWin; ++i) {
            double w = hann[static_cast<size_t>(i)];
            out[static_cast<size_t>(start + i)] += bwd_out[i] / kWin * w;
            norm[static_cast<size_t>(start + i)] += w * w;
        }
    }
    std::vector<double> result(static_cast<size_t>(n_orig));
    for (int64_t i = 0; i < n_orig; ++i) {
        size_t p = static_cast<size_t>(i + kWin);
        result[static_cast<size_t>(i)] =
            norm[p] > 1e-8 ? out[p] / norm[p] : audio[static_cast<size_t>(i)];
    }

    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(fwd_in);
        fftw_free(fwd_out);
        fftw_free(bwd_in);
        fftw_free(bwd_out);
    }
    return result;
}

}  // namespace lipfd::avdata
