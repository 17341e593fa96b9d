#pragma once

// Validation-time preprocessing: decode, plain bilinear resize to a square
// input (no letterboxing), and per-architecture pixel scaling.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "trapsift/backend.hpp"
#include "trapsift/error.hpp"

namespace trapsift {

enum class PixelScale {
    symmetric, ///< [-1, 1], MobileNetV2-style
    unit,      ///< [0, 1], EfficientNet-style
};

enum class ResizeMethod { bilinear };

inline PixelScale parse_pixel_scale(const std::string& s) {
    if (s == "symmetric") return PixelScale::symmetric;
    if (s == "unit") return PixelScale::unit;
    throw ConfigError("unknown pixel scale '" + s + "' (expected symmetric or unit)");
}

inline const char* to_string(PixelScale s) { return s == PixelScale::symmetric ? "symmetric" : "unit"; }

struct PreprocessSpec {
    int target_size = 224;
    PixelScale pixel_scale = PixelScale::symmetric;
    ResizeMethod resize_method = ResizeMethod::bilinear;
};

inline constexpr int kSupportedInputSizes[] = {224, 300, 320, 512};

inline void validate(const PreprocessSpec& spec) {
    for (int s : kSupportedInputSizes)
        if (s == spec.target_size) return;
    throw ConfigError("unsupported input size " + std::to_string(spec.target_size) + " (expected 224, 300, 320 or 512)");
}

/// Rejects a spec whose size disagrees with the model's declared input resolution.
inline void validate(const PreprocessSpec& spec, const BackendMetadata& meta) {
    validate(spec);
    if (meta.input_resolution && *meta.input_resolution != spec.target_size)
        throw ConfigError("preprocess size " + std::to_string(spec.target_size) + " does not match model input " +
                          std::to_string(*meta.input_resolution));
}

/// Decodes to 8-bit RGB.
inline cv::Mat decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw DecodeError("empty image data");
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat bgr;
    try {
        bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw DecodeError(std::string("cannot decode image: ") + e.what());
    }
    if (bgr.empty()) throw DecodeError("cannot decode image");
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return rgb;
}

inline Tensor preprocess(const cv::Mat& rgb, const PreprocessSpec& spec) {
    validate(spec);
    if (rgb.empty() || rgb.type() != CV_8UC3) throw DecodeError("expected a non-empty 8-bit 3-channel image");
    cv::Mat resized;
    cv::resize(rgb, resized, cv::Size(spec.target_size, spec.target_size), 0, 0, cv::INTER_LINEAR);
    cv::Mat scaled;
    if (spec.pixel_scale == PixelScale::unit)
        resized.convertTo(scaled, CV_32FC3, 1.0 / 255.0);
    else
        resized.convertTo(scaled, CV_32FC3, 1.0 / 127.5, -1.0);
    // 255 / 127.5 - 1 rounds just above 1 in float.
    cv::min(scaled, cv::Scalar::all(1.0), scaled);
    cv::max(scaled, cv::Scalar::all(spec.pixel_scale == PixelScale::unit ? 0.0 : -1.0), scaled);

    Tensor t{spec.target_size, spec.target_size, 3, {}};
    t.data.resize(static_cast<std::size_t>(spec.target_size) * spec.target_size * 3);
    for (int y = 0; y < spec.target_size; ++y) {
        const float* row = scaled.ptr<float>(y);
        std::copy(row, row + spec.target_size * 3, t.data.begin() + static_cast<std::ptrdiff_t>(y) * spec.target_size * 3);
    }
    return t;
}

inline Tensor preprocess(std::span<const std::uint8_t> image_bytes, const PreprocessSpec& spec) {
    return preprocess(decode_image(image_bytes), spec);
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace trapsift
