#include "lipfd/regions.hpp"

#include "lipfd/errors.hpp"

#include <cmath>

namespace lipfd::regions {

namespace {

constexpr double kAnchorLine = 0.92;  // bottom edge of face/lip crops, fraction of side

int clamp_int(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// Clamps a square of the given side, centered at (cx, cy), into [x0,x1)x[y0,y1).
RectI clamped_square(double cx, double cy, int side, int bx0, int by0, int bx1, int by1) {
    int x0 = static_cast<int>(std::lround(cx - side / 2.0));
    int y0 = static_cast<int>(std::lround(cy - side / 2.0));
    x0 = clamp_int(x0, bx0, bx1 - side);
    y0 = clamp_int(y0, by0, by1 - side);
    return RectI{x0, y0, side};
}

}  // namespace

AnchorMode anchor_mode_from(const std::string& name) {
    if (name == "fixed") return AnchorMode::fixed;
    if (name == "landmarks") return AnchorMode::landmarks;
    throw ArgumentError("unknown anchor mode: " + name);
}

std::array<RectI, 3> crop_rectangles(int frame_side, const std::array<double, 3>& ratios,
                                     AnchorMode mode,
                                     const std::optional<LandmarkBoxes>& landmarks) {
    if (frame_side <= 0) throw ArgumentError("crop_rectangles: frame side must be positive");
    for (double r : ratios) {
        if (!(r > 0.0 && r <= 1.0)) {
            throw ArgumentError("crop ratio " + std::to_string(r) + " outside (0, 1]");
        }
    }
    if (ratios[0] < ratios[1] || ratios[1] < ratios[2]) {
        throw ArgumentError("crop ratios must be non-increasing");
    }

    std::array<int, 3> sides{};
    for (int j = 0; j < 3; ++j) {
        sides[static_cast<size_t>(j)] =
            std::max(1, static_cast<int>(std::floor(ratios[static_cast<size_t>(j)] * frame_side)));
    }

    RectI head{0, 0, frame_side};  // ratio 1.0 band: full frame, posture + background

    if (mode == AnchorMode::landmarks && landmarks.has_value()) {
        RectI face = clamped_square(landmarks->face_cx, landmarks->face_cy, sides[1], 0, 0,
                                    frame_side, frame_side);
        RectI lip = clamped_square(landmarks->mouth_cx, landmarks->mouth_cy, sides[2], face.x0,
                                   face.y0, face.x1(), face.y1());
        return {head, face, lip};
    }

    // Fixed anchors: horizontally centered, bottom edge on the anchor line.
    int bottom = static_cast<int>(std::floor(kAnchorLine * frame_side));
    auto anchored = [&](int side) {
        int x0 = (frame_side - side) / 2;
        int y0 = clamp_int(bottom - side, 0, frame_side - side);
        return RectI{x0, y0, side};
    };
    return {head, anchored(sides[1]), anchored(sides[2])};
}

CropPyramid crop_pyramid(const avdata::WindowSample& sample, AnchorMode mode,
                         const std::array<double, 3>& ratios,
                         const std::vector<std::optional<LandmarkBoxes>>* landmarks) {
    if (sample.frames.empty()) throw ArgumentError("crop_pyramid: sample has no frames");
    const int side = sample.frames[0].width;
    for (const Image& f : sample.frames) {
        if (f.width != side || f.height != side) {
            throw ArgumentError("crop_pyramid: frames must be square after ingestion");
        }
    }

    CropPyramid pyr;
    pyr.t = static_cast<int>(sample.frames.size());
    pyr.ratios = ratios;
    pyr.head.reserve(sample.frames.size());
    pyr.face.reserve(sample.frames.size());
    pyr.lip.reserve(sample.frames.size());
    pyr.anchors.reserve(sample.frames.size());

    for (size_t i = 0; i < sample.frames.size(); ++i) {
        std::optional<LandmarkBoxes> boxes;
        if (mode == AnchorMode::landmarks) {
            if (landmarks != nullptr && i < landmarks->size()) boxes = (*landmarks)[i];
            if (!boxes.has_value()) pyr.landmark_fallback = true;
        }
        std::array<RectI, 3> rects = crop_rectangles(side, ratios, mode, boxes);
        const Image& f = sample.frames[i];
        pyr.head.push_back(rects[0].side == side && rects[0].x0 == 0 && rects[0].y0 == 0
                               ? f
                               : crop(f, rects[0].y0, rects[0].x0, rects[0].side, rects[0].side));
        pyr.face.push_back(crop(f, rects[1].y0, rects[1].x0, rects[1].side, rects[1].side));
        pyr.lip.push_back(crop(f, rects[2].y0, rects[2].x0, rects[2].side, rects[2].side));
        pyr.anchors.push_back(rects);
    }
    return pyr;
}

}  // namespace lipfd::regions
