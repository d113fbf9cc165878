#include "lipfd/wav.hpp"

#include "lipfd/errors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace lipfd {

namespace {

uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void wr_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open wav: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw ValidationError("not a RIFF/WAVE file: " + path.string());
    }

    int sample_rate = 0, channels = 0, bits = 0;
    size_t data_off = 0, data_len = 0;
    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const uint8_t* hdr = bytes.data() + pos;
        uint32_t chunk_len = rd_u32(hdr + 4);
        if (std::memcmp(hdr, "fmt ", 4) == 0 && pos + 8 + 16 <= bytes.size()) {
            const uint8_t* f = hdr + 8;
            uint16_t fmt = rd_u16(f);
            channels = rd_u16(f + 2);
            sample_rate = static_cast<int>(rd_u32(f + 4));
            bits = rd_u16(f + 14);
            if (fmt != 1) throw ValidationError("unsupported wav encoding (need PCM): " + path.string());
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_off = pos + 8;
            data_len = std::min<size_t>(chunk_len, bytes.size() - data_off);
        }
        pos += 8 + chunk_len + (chunk_len & 1);
    }
    if (sample_rate <= 0 || channels <= 0 || data_off == 0) {
        throw ValidationError("missing fmt/data chunk: " + path.string());
    }
    if (bits != 16) throw ValidationError("unsupported wav bit depth (need 16): " + path.string());

    size_t frame_bytes = static_cast<size_t>(channels) * 2;
    size_t frames = data_len / frame_bytes;
    Waveform wav;
    wav.sample_rate = sample_rate;
    wav.samples.resize(frames);
    const uint8_t* d = bytes.data() + data_off;
    for (size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            auto raw = static_cast<int16_t>(rd_u16(d + i * frame_bytes + static_cast<size_t>(c) * 2));
            acc += raw / 32768.0;
        }
        wav.samples[i] = acc / channels;
    }
    return wav;
}

void write_wav(const Waveform& wav, const std::filesystem::path& path) {
    if (wav.sample_rate <= 0) throw ArgumentError("write_wav: bad sample rate");
    std::vector<uint8_t> out;
    size_t n = wav.samples.size();
    uint32_t data_len = static_cast<uint32_t>(n * 2);
    out.reserve(44 + data_len);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    wr_u32(out, 36 + data_len);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    wr_u32(out, 16);
    wr_u16(out, 1);  // PCM
    wr_u16(out, 1);  // mono
    wr_u32(out, static_cast<uint32_t>(wav.sample_rate));
    wr_u32(out, static_cast<uint32_t>(wav.sample_rate) * 2);
    wr_u16(out, 2);
    wr_u16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    wr_u32(out, data_len);
    for (double s : wav.samples) {
        double v = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
        auto q = static_cast<int16_t>(std::lround(v * 32767.0));
        wr_u16(out, static_cast<uint16_t>(q));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open for write: " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("write failed: " + path.string());
}

Waveform resample_linear(const Waveform& wav, int target_rate) {
    if (target_rate <= 0) throw ArgumentError("resample: bad target rate");
    if (wav.sample_rate == target_rate || wav.samples.empty()) {
        Waveform out = wav;
        out.sample_rate = target_rate;
        return out;
    }
    double ratio = static_cast<double>(wav.sample_rate) / target_rate;
    size_t out_n = static_cast<size_t>(std::floor(static_cast<double>(wav.samples.size() - 1) / ratio)) + 1;
    Waveform out;
    out.sample_rate = target_rate;
    out.samples.resize(out_n);
    for (size_t i = 0; i < out_n; ++i) {
        double t = static_cast<double>(i) * ratio;
        auto i0 = static_cast<size_t>(t);
        size_t i1 = std::min(i0 + 1, wav.samples.size() - 1);
        double frac = t - static_cast<double>(i0);
        out.samples[i] = wav.samples[i0] * (1.0 - frac) + wav.samples[i1] * frac;
    }
    return out;
}

}  // namespace lipfd
