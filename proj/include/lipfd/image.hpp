#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lipfd {

/// RGB image, interleaved doubles in [0,1]. The working type everywhere;
/// 8-bit quantization happens only at the PNG/JPEG boundary.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> px;  // height*width*3

    Image() = default;
    Image(int h, int w) : height(h), width(w), px(static_cast<size_t>(h) * w * 3, 0.0) {}

    double& at(int y, int x, int c) { return px[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    double at(int y, int x, int c) const { return px[(static_cast<size_t>(y) * width + x) * 3 + c]; }

    bool same_size(const Image& o) const { return height == o.height && width == o.width; }
};

Image load_png(const std::filesystem::path& path);
void save_png(const Image& img, const std::filesystem::path& path);
std::vector<uint8_t> encode_png(const Image& img);
Image decode_image(const std::vector<uint8_t>& bytes);

/// JPEG round-trip at the given libjpeg quality (1..100). Used by the
/// compression perturbation.
Image jpeg_roundtrip(const Image& img, int quality);

/// Area-averaged downscale / bilinear upscale; nearest-neighbor when
/// `nearest` is set. No-op if the target size matches.
Image resize(const Image& img, int out_h, int out_w, bool nearest = false);

Image crop(const Image& img, int y0, int x0, int h, int w);

/// Gaussian blur with a square kernel; reflect border handling.
Image gaussian_blur(const Image& img, int ksize, double sigma);

}  // namespace lipfd
