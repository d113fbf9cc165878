#pragma once

#include "lipfd/avdata.hpp"
#include "lipfd/image.hpp"
#include "lipfd/rng.hpp"
#include "lipfd/wav.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace testutil {

/// Fresh scratch directory under the build tree.
inline std::filesystem::path tmp_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::path("test_tmp") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Deterministic structured probe image: smooth gradients, soft texture and
/// a couple of shapes. Stands in for a natural photo in perturbation tests.
inline lipfd::Image structured_image(int side, uint64_t seed = 7) {
    (void)seed;
    lipfd::Image img(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double gx = static_cast<double>(x) / side;
            double gy = static_cast<double>(y) / side;
            img.at(y, x, 0) = 0.15 + 0.7 * gx;
            img.at(y, x, 1) = 0.5 + 0.3 * std::sin(3.0 * gx) * std::cos(2.5 * gy);
            img.at(y, x, 2) = 0.15 + 0.7 * gy;
        }
    }
    double cx = 0.62 * side, cy = 0.4 * side, r = 0.18 * side;
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double d = std::hypot(x - cx, y - cy);
            if (d < r) {
                double soft = std::min(1.0, (r - d) / (0.15 * r));
                img.at(y, x, 0) = (1 - soft) * img.at(y, x, 0) + soft * 0.85;
                img.at(y, x, 1) = (1 - soft) * img.at(y, x, 1) + soft * 0.25;
                img.at(y, x, 2) = (1 - soft) * img.at(y, x, 2) + soft * 0.15;
            }
        }
    }
    for (int y = side / 5; y < side / 3; ++y) {
        for (int x = side / 5; x < side / 3; ++x) {
            img.at(y, x, 0) = 0.1;
            img.at(y, x, 1) = 0.55;
            img.at(y, x, 2) = 0.8;
        }
    }
    return img;
}

struct TestClip {
    std::filesystem::path frame_dir;
    std::filesystem::path audio_path;
    int nframes = 0;
};

/// Writes a small clip: moving-box frames plus a 440 Hz tone.
inline TestClip write_clip(const std::filesystem::path& dir, const std::string& clip_id,
                           int nframes, int side, double fps, int sample_rate,
                           uint64_t seed = 11) {
    TestClip clip;
    clip.nframes = nframes;
    clip.frame_dir = dir / clip_id / "frames";
    std::filesystem::create_directories(clip.frame_dir);
    lipfd::Rng rng(seed);
    for (int f = 0; f < nframes; ++f) {
        lipfd::Image img(side, side);
        for (double& v : img.px) v = 0.3;
        int bx = (f * 3) % std::max(1, side - 8);
        for (int y = 4; y < std::min(side, 12); ++y) {
            for (int x = bx; x < std::min(side, bx + 8); ++x) {
                img.at(y, x, 0) = 0.9;
            }
        }
        std::ostringstream name;
        name << "f_" << std::setw(4) << std::setfill('0') << f << ".png";
        lipfd::save_png(img, clip.frame_dir / name.str());
    }
    lipfd::Waveform wav;
    wav.sample_rate = sample_rate;
    double dur = nframes / fps + 0.1;
    wav.samples.resize(static_cast<size_t>(dur * sample_rate));
    for (size_t i = 0; i < wav.samples.size(); ++i) {
        double t = static_cast<double>(i) / sample_rate;
        wav.samples[i] = 0.4 * std::sin(2.0 * M_PI * 440.0 * t) + 0.002 * rng.normal();
    }
    clip.audio_path = dir / clip_id / "audio.wav";
    lipfd::write_wav(wav, clip.audio_path);
    return clip;
}

/// One manifest line in the documented format.
inline std::string manifest_line(const std::string& clip_id, const std::string& frame_dir,
                                 const std::string& audio_path, const std::string& label,
                                 const std::string& split = "train", double fps = 25.0,
                                 int sample_rate = 16000) {
    std::ostringstream o;
    o << "clip_id=" << clip_id << "\tframe_dir=" << frame_dir << "\taudio_path=" << audio_path
      << "\tlabel=" << label << "\tgenerator=test\tsplit=" << split << "\tfps=" << fps
      << "\tsample_rate=" << sample_rate;
    return o.str();
}

inline lipfd::avdata::ClipRecord fake_record(const std::string& id, int frame_count,
                                             double fps = 25.0) {
    lipfd::avdata::ClipRecord rec;
    rec.clip_id = id;
    rec.label = 0;
    rec.generator = "test";
    rec.split = "train";
    rec.fps = fps;
    rec.sample_rate = 16000;
    rec.frame_count = frame_count;
    return rec;
}

inline std::vector<uint8_t> read_file_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
