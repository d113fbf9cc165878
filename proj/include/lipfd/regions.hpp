#pragma once

#include "lipfd/avdata.hpp"
#include "lipfd/image.hpp"

#include <array>
#include <optional>
#include <vector>

namespace lipfd::regions {

/// Square crop rectangle in source-frame coordinates.
struct RectI {
    int x0 = 0;
    int y0 = 0;
    int side = 0;

    int x1() const { return x0 + side; }
    int y1() const { return y0 + side; }
};

inline bool contains(const RectI& outer, const RectI& inner) {
    return inner.x0 >= outer.x0 && inner.y0 >= outer.y0 && inner.x1() <= outer.x1() &&
           inner.y1() <= outer.y1();
}

enum class AnchorMode { fixed, landmarks };

AnchorMode anchor_mode_from(const std::string& name);

/// Detector output for one frame: face and mouth box centers, in pixels.
struct LandmarkBoxes {
    double face_cx = 0, face_cy = 0;
    double mouth_cx = 0, mouth_cy = 0;
};

/// Three rectangles [head, face, lip] for a square frame. Crop side is
/// floor(ratio * frame_side). Fixed mode: head is the full frame; face and
/// lip are horizontally centered with their bottom edge on the 0.92*side
/// line (clamped into the frame), which keeps the lip rectangle inside the
/// face rectangle for any non-increasing ratio triple. Landmark mode centers
/// the face crop on the face box and the lip crop on the mouth box, clamping
/// face into the frame and lip into the face rectangle.
std::array<RectI, 3> crop_rectangles(int frame_side, const std::array<double, 3>& ratios,
                                     AnchorMode mode,
                                     const std::optional<LandmarkBoxes>& landmarks = std::nullopt);

/// Per-frame crop triplets for one window. head/face/lip each hold T images
/// at native crop resolution; resizing to the encoder input side happens at
/// encode time.
struct CropPyramid {
    int t = 0;
    std::array<double, 3> ratios{1.0, 0.65, 0.45};
    std::vector<Image> head, face, lip;
    std::vector<std::array<RectI, 3>> anchors;
    bool landmark_fallback = false;  // set when landmark mode fell back to fixed

    const std::vector<Image>& scale(int j) const {
        return j == 0 ? head : (j == 1 ? face : lip);
    }
};

/// `landmarks`, when given, supplies one optional detection per frame;
/// frames with no detection fall back to fixed anchors and flag the pyramid.
CropPyramid crop_pyramid(const avdata::WindowSample& sample, AnchorMode mode,
                         const std::array<double, 3>& ratios = {1.0, 0.65, 0.45},
                         const std::vector<std::optional<LandmarkBoxes>>* landmarks = nullptr);

}  // namespace lipfd::regions
