#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pap {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Binary class: 0 = pseudopapilledema, 1 = papilledema.
enum class Label : int { pseudopapilledema = 0, papilledema = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }

inline Label label_from_value(int v) {
    if (v != 0 && v != 1) throw Error("label value must be 0 or 1, got " + std::to_string(v));
    return static_cast<Label>(v);
}

/// RGB raster with unit-interval intensities, one plane per channel.
/// Planes are row-major: plane[c][y * width + x], c in {0:red, 1:green, 2:blue}.
struct FundusImage {
    int width = 0;
    int height = 0;
    std::vector<double> plane[3];

    FundusImage() = default;
    FundusImage(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw Error("image dimensions must be positive");
        for (auto& p : plane) p.assign(static_cast<size_t>(w) * h, fill);
    }

    size_t pixels() const { return static_cast<size_t>(width) * height; }
    double& at(int c, int x, int y) { return plane[c][static_cast<size_t>(y) * width + x]; }
    double at(int c, int x, int y) const { return plane[c][static_cast<size_t>(y) * width + x]; }
};

/// Single-plane raster, unit-interval intensities.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw Error("image dimensions must be positive");
        values.assign(static_cast<size_t>(w) * h, fill);
    }

    size_t pixels() const { return static_cast<size_t>(width) * height; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

/// Boolean raster. Stored as bytes (0/1) so rows can be scanned without bit math.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw Error("mask dimensions must be positive");
        values.assign(static_cast<size_t>(w) * h, fill ? 1 : 0);
    }

    size_t pixels() const { return static_cast<size_t>(width) * height; }
    bool at(int x, int y) const { return values[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { values[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count() const {
        size_t n = 0;
        for (auto v : values) n += v;
        return n;
    }
    bool empty_mask() const { return count() == 0; }

    bool operator==(const BinaryMask& o) const {
        return width == o.width && height == o.height && values == o.values;
    }
};

/// Circle in subpixel image coordinates (a pixel is a unit square centered
/// on its integer coordinates).
struct Circle {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct BoundingBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool valid() const { return x0 < x1 && y0 < y1; }
    double center_x() const { return 0.5 * (x0 + x1 - 1); }
    double center_y() const { return 0.5 * (y0 + y1 - 1); }
};

inline void check_unit_interval(const FundusImage& img, const char* where) {
    for (const auto& p : img.plane)
        for (double v : p)
            if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(where) + ": intensity outside [0,1]");
}

}  // namespace pap
