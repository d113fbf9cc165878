#include "lipfd/image.hpp"

#include "lipfd/errors.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <fstream>

namespace lipfd {

namespace {

cv::Mat to_mat_u8(const Image& img) {
    cv::Mat m(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        auto* row = m.ptr<uint8_t>(y);
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = img.at(y, x, c);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                // BGR on the OpenCV side.
                row[x * 3 + (2 - c)] = static_cast<uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    return m;
}

Image from_mat_u8(const cv::Mat& m) {
    Image img(m.rows, m.cols);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) {
            for (int c = 0; c < 3; ++c) {
                img.at(y, x, c) = row[x * 3 + (2 - c)] / 255.0;
            }
        }
    }
    return img;
}

cv::Mat to_mat_f64(const Image& img) {
    cv::Mat m(img.height, img.width, CV_64FC3);
    for (int y = 0; y < img.height; ++y) {
        auto* row = m.ptr<double>(y);
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) row[x * 3 + c] = img.at(y, x, c);
        }
    }
    return m;
}

Image from_mat_f64(const cv::Mat& m) {
    Image img(m.rows, m.cols);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<double>(y);
        for (int x = 0; x < m.cols; ++x) {
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = row[x * 3 + c];
        }
    }
    return img;
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (m.empty()) throw ValidationError("cannot read image: " + path.string());
    return from_mat_u8(m);
}

std::vector<uint8_t> encode_png(const Image& img) {
    std::vector<uint8_t> buf;
    if (!cv::imencode(".png", to_mat_u8(img), buf)) {
        throw Error("png encode failed");
    }
    return buf;
}

void save_png(const Image& img, const std::filesystem::path& path) {
    std::vector<uint8_t> buf = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for write: " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write failed: " + path.string());
}

Image decode_image(const std::vector<uint8_t>& bytes) {
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_COLOR);
    if (m.empty()) throw ValidationError("cannot decode image buffer");
    return from_mat_u8(m);
}

Image jpeg_roundtrip(const Image& img, int quality) {
    std::vector<uint8_t> buf;
    std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, quality};
    if (!cv::imencode(".jpg", to_mat_u8(img), buf, params)) {
        throw Error("jpeg encode failed");
    }
    return decode_image(buf);
}

Image resize(const Image& img, int out_h, int out_w, bool nearest) {
    if (out_h <= 0 || out_w <= 0) throw ArgumentError("resize: non-positive target size");
    if (out_h == img.height && out_w == img.width) return img;
    int interp;
    if (nearest) {
        interp = cv::INTER_NEAREST;
    } else if (out_h <= img.height && out_w <= img.width) {
        interp = cv::INTER_AREA;
    } else {
        interp = cv::INTER_LINEAR;
    }
    cv::Mat src = to_mat_f64(img), dst;
    cv::resize(src, dst, cv::Size(out_w, out_h), 0, 0, interp);
    Image out = from_mat_f64(dst);
    for (double& v : out.px) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return out;
}

Image crop(const Image& img, int y0, int x0, int h, int w) {
    if (y0 < 0 || x0 < 0 || h <= 0 || w <= 0 || y0 + h > img.height || x0 + w > img.width) {
        throw RangeError("crop: rectangle outside image");
    }
    Image out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
        }
    }
    return out;
}

Image gaussian_blur(const Image& img, int ksize, double sigma) {
    if (ksize < 1 || ksize % 2 == 0) throw ArgumentError("gaussian_blur: kernel size must be odd");
    cv::Mat src = to_mat_f64(img), dst;
    cv::GaussianBlur(src, dst, cv::Size(ksize, ksize), sigma, sigma, cv::BORDER_REFLECT_101);
    Image out = from_mat_f64(dst);
    for (double& v : out.px) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return out;
}

}  // namespace lipfd
