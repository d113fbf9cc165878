#include "lipfd/avdata.hpp"
#include "lipfd/errors.hpp"

#include <cmath>

namespace lipfd::avdata {

SpectrogramSlice slice_spectrogram(const Spectrogram& spec, double t0, double t1,
                                   double slack_seconds) {
    if (!(t1 > t0)) throw RangeError("slice_spectrogram: empty time span");
    const double hop = spec.hop_seconds;
    int b0 = static_cast<int>(std::ceil(t0 / hop - 1e-9));
    int b1 = static_cast<int>(std::ceil(t1 / hop - 1e-9));
    if (b0 < 0) b0 = 0;
    if (b1 > spec.time_bins) {
        // Audio may legitimately run out up to one frame period early.
        double overshoot = (b1 - spec.time_bins) * hop;
        if (overshoot > slack_seconds + hop + 1e-9) {
            throw RangeError("spectrogram does not cover the requested window span");
        }
        b1 = spec.time_bins;
        if (b1 - b0 < 1) b0 = b1 - 1;
    }
    if (b1 - b0 < 1 || b0 < 0) throw RangeError("spectrogram slice is empty");

    SpectrogramSlice slice;
    slice.time_bins = b1 - b0;
    slice.freq_bins = spec.freq_bins;
    slice.hop_seconds = hop;
    slice.m.assign(static_cast<size_t>(slice.time_bins) * slice.freq_bins, 0.0);
    std::copy(spec.m.begin() + static_cast<int64_t>(b0) * spec.freq_bins,
              spec.m.begin() + static_cast<int64_t>(b1) * spec.freq_bins, slice.m.begin());
    return slice;
}

Image render_band(const SpectrogramSlice& slice, int height, int width) {
    if (slice.time_bins < 1 || slice.freq_bins < 1) throw ArgumentError("render_band: empty slice");
    double lo = slice.m[0], hi = slice.m[0];
    for (double v : slice.m) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    Image band(height, width);
    for (int y = 0; y < height; ++y) {
        // Low frequencies at the bottom of the band.
        int f = (height - 1 - y) * slice.freq_bins / height;
        for (int x = 0; x < width; ++x) {
            int t = x * slice.time_bins / width;
            double v = slice.m[static_cast<size_t>(t) * slice.freq_bins + f];
            double norm = span > 0.0 ? (v - lo) / span : 0.0;
            band.at(y, x, 0) = norm;
            band.at(y, x, 1) = norm;
            band.at(y, x, 2) = norm;
        }
    }
    return band;
}

Image compose_window_image(const std::vector<Image>& frames, const Image& band) {
    if (frames.empty()) throw ArgumentError("compose: no frames");
    const int side = frames[0].width;
    for (const Image& f : frames) {
        if (f.width != side || f.height != side) {
            throw ArgumentError("compose: frames must be square and uniform");
        }
    }
    const int t = static_cast<int>(frames.size());
    if (band.width != side * t) throw ArgumentError("compose: band width must be T * frame side");

    Image out(band.height + side, side * t);
    for (int y = 0; y < band.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = band.at(y, x, c);
        }
    }
    for (int i = 0; i < t; ++i) {
        const Image& f = frames[static_cast<size_t>(i)];
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                for (int c = 0; c < 3; ++c) out.at(band.height + y, i * side + x, c) = f.at(y, x, c);
            }
        }
    }
    return out;
}

WindowSample assemble_window(const ClipRecord& clip, int start_frame, int t,
                             const Spectrogram& spec, const WindowLayout& layout) {
    if (t < 1) throw ArgumentError("assemble_window: window size must be >= 1");
    if (start_frame < 0 || start_frame + t > clip.frame_count) {
        throw RangeError("window [" + std::to_string(start_frame) + ", " +
                         std::to_string(start_frame + t) + ") exceeds clip '" + clip.clip_id +
                         "' with " + std::to_string(clip.frame_count) + " frames");
    }

    WindowSample ws;
    ws.clip_id = clip.clip_id;
    ws.start_frame = start_frame;
    ws.t = t;
    ws.label = clip.label;
    ws.frames.reserve(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) {
        Image f = load_png(clip.frames[static_cast<size_t>(start_frame + i)]);
        ws.frames.push_back(resize(f, layout.frame_side, layout.frame_side));
    }

    const double t0 = start_frame / clip.fps;
    const double t1 = (start_frame + t) / clip.fps;
    ws.spectrogram = slice_spectrogram(spec, t0, t1, 1.0 / clip.fps);
    Image band = render_band(ws.spectrogram, layout.band_height, layout.frame_side * t);
    ws.composite = compose_window_image(ws.frames, band);
    return ws;
}

WindowSample window_from_composite(const std::string& clip_id, int start_frame, int label,
                                   Image composite, const WindowLayout& layout) {
    const int side = layout.frame_side;
    if (composite.height != layout.band_height + side || composite.width % side != 0) {
        throw ValidationError("composite dimensions do not match layout for '" + clip_id + "'");
    }
    const int t = composite.width / side;
    WindowSample ws;
    ws.clip_id = clip_id;
    ws.start_frame = start_frame;
    ws.t = t;
    ws.label = label;
    ws.frames.reserve(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) {
        ws.frames.push_back(crop(composite, layout.band_height, i * side, side, side));
    }
    ws.composite = std::move(composite);
    return ws;
}

}  // namespace lipfd::avdata
