#include "lipfd/evalkit.hpp"

#include "lipfd/errors.hpp"
#include "lipfd/rng.hpp"
#include "lipfd/wav.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lipfd::evalkit {

namespace {

constexpr int kEnvelopeTones = 3;
constexpr double kEnvFreqLo = 1.2, kEnvFreqHi = 3.5;  // Hz; decorrelates within ~0.3 s
constexpr int kCarrierHarmonics = 6;
constexpr double kCarrierBase = 220.0;
constexpr double kNoiseFloor = 0.0015;
constexpr int kBgBlock = 8;

struct EnvelopeSpec {
    double freq[kEnvelopeTones];
    double phase[kEnvelopeTones];

    double at(double t) const {
        double s = 0.0;
        for (int i = 0; i < kEnvelopeTones; ++i) {
            s += std::sin(2.0 * M_PI * freq[i] * t + phase[i]);
        }
        // Map the averaged oscillation into [0.08, 0.92].
        return 0.08 + 0.84 * (s / kEnvelopeTones + 1.0) / 2.0;
    }
};

void fill_ellipse(Image& img, double cx, double cy, double rx, double ry, double r, double g,
                  double b) {
    if (rx <= 0.0 || ry <= 0.0) return;
    int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + ry)));
    for (int y = y0; y <= y1; ++y) {
        double dy = (y - cy) / ry;
        double rem = 1.0 - dy * dy;
        if (rem < 0.0) continue;
        double half = rx * std::sqrt(rem);
        int x0 = std::max(0, static_cast<int>(std::floor(cx - half)));
        int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + half)));
        for (int x = x0; x <= x1; ++x) {
            double dx = (x - cx) / rx;
            if (dx * dx + dy * dy > 1.0) continue;
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    }
}

}  // namespace

std::filesystem::path synth_benchmark(const SynthConfig& cfg,
                                      const std::filesystem::path& out_dir, uint64_t seed) {
    if (cfg.n_clips < 2 || cfg.n_clips % 2 != 0) {
        throw ArgumentError("synth_benchmark: n_clips must be even and >= 2");
    }
    if (cfg.fake_mode != "shift" && cfg.fake_mode != "resample") {
        throw ArgumentError("synth_benchmark: fake_mode must be shift or resample");
    }
    const int nframes = static_cast<int>(std::lround(cfg.fps * cfg.clip_seconds));
    if (nframes < cfg.t) {
        throw ArgumentError("synth_benchmark: clips too short for the window size");
    }
    if (cfg.fake_mode == "shift" && cfg.desync_seconds >= cfg.clip_seconds) {
        throw ArgumentError("synth_benchmark: desync exceeds clip length");
    }

    std::filesystem::create_directories(out_dir / "clips");
    std::filesystem::path manifest_path = out_dir / "manifest.tsv";
    std::ofstream manifest(manifest_path, std::ios::binary);
    if (!manifest) throw ValidationError("cannot write manifest: " + manifest_path.string());

    const int per_class = cfg.n_clips / 2;
    const int train_end = static_cast<int>(std::lround(per_class * 0.7));
    const int val_end = static_cast<int>(std::lround(per_class * 0.8));

    for (int c = 0; c < cfg.n_clips; ++c) {
        const int label = c % 2;
        const int class_rank = c / 2;
        std::ostringstream idss;
        idss << (label == 1 ? "fake" : "real") << "_" << std::setw(4) << std::setfill('0')
             << class_rank;
        const std::string clip_id = idss.str();
        const std::string split =
            class_rank < train_end ? "train" : (class_rank < val_end ? "val" : "test");

        Rng rng(Rng::mix(seed, static_cast<uint64_t>(c)));
        EnvelopeSpec env{};
        for (int i = 0; i < kEnvelopeTones; ++i) {
            env.freq[i] = rng.uniform(kEnvFreqLo, kEnvFreqHi);
            env.phase[i] = rng.uniform(0.0, 2.0 * M_PI);
        }

        // Audio: envelope-modulated harmonic stack plus a small noise floor;
        // covers the frame span with a little slack.
        Waveform wav;
        wav.sample_rate = cfg.sample_rate;
        const auto nsamp = static_cast<size_t>(
            std::lround((cfg.clip_seconds + 0.05) * cfg.sample_rate));
        wav.samples.resize(nsamp);
        double norm = 0.0;
        for (int h = 1; h <= kCarrierHarmonics; ++h) norm += 1.0 / h;
        for (size_t si = 0; si < nsamp; ++si) {
            double t = static_cast<double>(si) / cfg.sample_rate;
            double carrier = 0.0;
            for (int h = 1; h <= kCarrierHarmonics; ++h) {
                carrier += std::sin(2.0 * M_PI * kCarrierBase * h * t) / h;
            }
            carrier /= norm;
            wav.samples[si] = 0.55 * env.at(t) * carrier + kNoiseFloor * rng.normal();
        }

        // Static per-clip background: coarse noise grid plus a face.
        const int side = cfg.frame_side;
        Image base(side, side);
        const int cells = (side + kBgBlock - 1) / kBgBlock;
        std::vector<double> grid(static_cast<size_t>(cells) * cells);
        for (double& v : grid) v = rng.uniform(0.20, 0.42);
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                double v = grid[static_cast<size_t>(y / kBgBlock) * cells + (x / kBgBlock)];
                base.at(y, x, 0) = v;
                base.at(y, x, 1) = v * 0.97;
                base.at(y, x, 2) = v * 0.93;
            }
        }
        double tint = rng.uniform(0.92, 1.05);
        fill_ellipse(base, 0.5 * side, 0.54 * side, 0.36 * side, 0.44 * side, 0.78 * tint,
                     0.66 * tint, 0.58 * tint);
        fill_ellipse(base, 0.36 * side, 0.36 * side, 0.045 * side, 0.045 * side, 0.13, 0.11, 0.11);
        fill_ellipse(base, 0.64 * side, 0.36 * side, 0.045 * side, 0.045 * side, 0.13, 0.11, 0.11);

        std::filesystem::path clip_dir = out_dir / "clips" / clip_id;
        std::filesystem::path frame_dir = clip_dir / "frames";
        std::filesystem::create_directories(frame_dir);

        for (int f = 0; f < nframes; ++f) {
            double tf = (f + 0.5) / cfg.fps;
            double tm = tf;
            if (label == 1) {
                if (cfg.fake_mode == "shift") {
                    tm = std::fmod(tf + cfg.desync_seconds, cfg.clip_seconds);
                } else {
                    tm = std::fmod(tf * 1.37, cfg.clip_seconds);
                }
            }
            double em = env.at(tm);
            Image frame = base;
            double ry = (0.012 + 0.088 * em) * side;
            fill_ellipse(frame, 0.5 * side, 0.75 * side, 0.16 * side, ry, 0.25, 0.08, 0.08);
            std::ostringstream fn;
            fn << "frame_" << std::setw(5) << std::setfill('0') << f << ".png";
            save_png(frame, frame_dir / fn.str());
        }
        write_wav(wav, clip_dir / "audio.wav");

        manifest << "clip_id=" << clip_id << "\tframe_dir=clips/" << clip_id << "/frames"
                 << "\taudio_path=clips/" << clip_id << "/audio.wav"
                 << "\tlabel=" << (label == 1 ? "fake" : "real")
                 << "\tgenerator=" << (label == 1 ? ("synthetic_" + cfg.fake_mode) : "original")
                 << "\tsplit=" << split << "\tfps=" << cfg.fps
                 << "\tsample_rate=" << cfg.sample_rate << "\n";
    }
    manifest.close();
    return manifest_path;
}

}  // namespace lipfd::evalkit
