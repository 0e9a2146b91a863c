#pragma once

#include <string>

#include "pap/types.hpp"

namespace pap {

/// Loads an 8-bit RGB PNG. Byte values map to [0,1] by division by 255.
/// Throws on unreadable files, non-RGB content, or zero-dimension images.
FundusImage load_image(const std::string& path);

/// Writes an 8-bit RGB PNG. Values are quantized by round(v * 255),
/// half away from zero.
void save_image(const FundusImage& img, const std::string& path);

/// Grayscale variants used for mask and saliency artifacts.
GrayImage load_gray(const std::string& path);
void save_gray(const GrayImage& img, const std::string& path);

inline std::uint8_t quantize_byte(double v) {
    double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<std::uint8_t>(clamped * 255.0 + 0.5);
}

}  // namespace pap
