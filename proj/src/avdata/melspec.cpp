#include "lipfd/avdata.hpp"
#include "lipfd/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace lipfd::avdata {

namespace {

// The FFTW planner is not thread-safe; executing a plan on its own buffers is.
std::mutex g_fftw_mutex;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Reflected index (no boundary repeat), for centered STFT framing.
int64_t reflect_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

struct FftPlan {
    int n = 0;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    explicit FftPlan(int size) : n(size) {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        in = fftw_alloc_real(static_cast<size_t>(n));
        out = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
};

}  // namespace

int MelConfig::window_samples() const {
    return static_cast<int>(std::lround(window_ms * 1e-3 * sample_rate));
}

int MelConfig::hop_samples() const {
    return static_cast<int>(std::lround(hop_ms * 1e-3 * sample_rate));
}

int MelConfig::fft_size() const {
    int n = 1;
    while (n < window_samples()) n <<= 1;
    return n;
}

std::vector<double> mel_filterbank(const MelConfig& cfg) {
    const int nfft = cfg.fft_size();
    const int bins = nfft / 2 + 1;
    const int nmel = cfg.mel_bins;
    const double mel_lo = hz_to_mel(0.0);
    const double mel_hi = hz_to_mel(cfg.sample_rate / 2.0);

    std::vector<double> pts(static_cast<size_t>(nmel) + 2);
    for (int i = 0; i < nmel + 2; ++i) {
        pts[static_cast<size_t>(i)] =
            mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / static_cast<double>(nmel + 1));
    }

    std::vector<double> fb(static_cast<size_t>(nmel) * bins, 0.0);
    for (int m = 0; m < nmel; ++m) {
        double f0 = pts[static_cast<size_t>(m)];
        double f1 = pts[static_cast<size_t>(m) + 1];
        double f2 = pts[static_cast<size_t>(m) + 2];
        for (int k = 0; k < bins; ++k) {
            double fk = static_cast<double>(k) * cfg.sample_rate / nfft;
            double w = 0.0;
            if (fk > f0 && fk < f1) {
                w = (fk - f0) / (f1 - f0);
            } else if (fk >= f1 && fk < f2) {
                w = (f2 - fk) / (f2 - f1);
            }
            fb[static_cast<size_t>(m) * bins + k] = w;
        }
    }
    return fb;
}

Spectrogram compute_spectrogram(const std::vector<double>& audio, int sample_rate,
                                const MelConfig& cfg_in) {
    MelConfig cfg = cfg_in;
    cfg.sample_rate = sample_rate;
    const int win = cfg.window_samples();
    const int hop = cfg.hop_samples();
    const int nfft = cfg.fft_size();
    const int bins = nfft / 2 + 1;

    if (static_cast<int>(audio.size()) < win) {
        throw ValidationError("audio too short for one analysis window (" +
                              std::to_string(audio.size()) + " < " + std::to_string(win) + ")");
    }
    for (double v : audio) {
        if (!std::isfinite(v)) throw ValidationError("audio contains non-finite samples");
    }

    std::vector<double> hann(static_cast<size_t>(win));
    for (int i = 0; i < win; ++i) {
        hann[static_cast<size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * M_PI * i / static_cast<double>(win - 1));
    }

    std::vector<double> fb = mel_filterbank(cfg);
    const auto n = static_cast<int64_t>(audio.size());
    const int nframes = static_cast<int>(n / hop) + 1;  // centered frames at 0, hop, ...

    Spectrogram spec;
    spec.time_bins = nframes;
    spec.freq_bins = cfg.mel_bins;
    spec.hop_seconds = cfg.hop_seconds();
    spec.m.assign(static_cast<size_t>(nframes) * cfg.mel_bins, 0.0);

    FftPlan fft(nfft);
    std::vector<double> mag(static_cast<size_t>(bins));
    const double log_floor = std::log(cfg.log_floor);

    for (int b = 0; b < nframes; ++b) {
        int64_t center = static_cast<int64_t>(b) * hop;
        int64_t start = center - win / 2;
        for (int i = 0; i < win; ++i) {
            fft.in[i] = audio[static_cast<size_t>(reflect_index(start + i, n))] * hann[static_cast<size_t>(i)];
        }
        for (int i = win; i < nfft; ++i) fft.in[i] = 0.0;
        fftw_execute(fft.plan);
        for (int k = 0; k < bins; ++k) {
            mag[static_cast<size_t>(k)] = std::hypot(fft.out[k][0], fft.out[k][1]);
        }
        for (int m = 0; m < cfg.mel_bins; ++m) {
            const double* w = fb.data() + static_cast<size_t>(m) * bins;
            double e = 0.0;
            for (int k = 0; k < bins; ++k) e += w[k] * mag[static_cast<size_t>(k)];
            double clamped = e > cfg.log_floor ? e : cfg.log_floor;
            spec.m[static_cast<size_t>(b) * cfg.mel_bins + m] = std::log(clamped) - log_floor;
        }
    }
    return spec;
}

}  // namespace lipfd::avdata
