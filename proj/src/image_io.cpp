#include "pap/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace pap {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// Reads the full 8-bit byte raster; channels = 1 (gray) or 3 (rgb) after
// the requested transform set.
void read_png_bytes(const std::string& path, int want_channels, int& width, int& height,
                    std::vector<std::uint8_t>& bytes) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error("cannot open image file: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw Error("not a PNG file: " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw Error("libpng init failure");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw Error("libpng init failure");
    if (setjmp(png_jmpbuf(r.png))) throw Error("failed to decode PNG: " + path);

    png_init_io(r.png, fp.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    png_uint_32 w = png_get_image_width(r.png, r.info);
    png_uint_32 h = png_get_image_height(r.png, r.info);
    int color = png_get_color_type(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);

    if (w == 0 || h == 0) throw Error("zero-dimension image: " + path);
    if (depth == 16) png_set_strip_16(r.png);

    if (want_channels == 3) {
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
        else if (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_RGB_ALPHA)
            throw Error("non-RGB content in image: " + path);
        if (color == PNG_COLOR_TYPE_RGB_ALPHA) png_set_strip_alpha(r.png);
    } else {
        if (color != PNG_COLOR_TYPE_GRAY) throw Error("expected grayscale image: " + path);
        if (depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    }

    png_read_update_info(r.png, r.info);
    size_t rowbytes = png_get_rowbytes(r.png, r.info);
    if (rowbytes != static_cast<size_t>(w) * want_channels)
        throw Error("unexpected channel layout in image: " + path);

    bytes.resize(static_cast<size_t>(w) * h * want_channels);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * rowbytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    width = static_cast<int>(w);
    height = static_cast<int>(h);
}

void write_png_bytes(const std::string& path, int width, int height, int channels,
                     const std::vector<std::uint8_t>& bytes) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw Error("cannot write image file: " + path);

    PngWriter wr;
    wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!wr.png) throw Error("libpng init failure");
    wr.info = png_create_info_struct(wr.png);
    if (!wr.info) throw Error("libpng init failure");
    if (setjmp(png_jmpbuf(wr.png))) throw Error("failed to encode PNG: " + path);

    png_init_io(wr.png, fp.get());
    int color = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(wr.png, wr.info, width, height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);

    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<size_t>(y) * width * channels);
    png_write_image(wr.png, rows.data());
    png_write_end(wr.png, nullptr);
}

}  // namespace

FundusImage load_image(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> bytes;
    read_png_bytes(path, 3, w, h, bytes);

    FundusImage img(w, h);
    const double inv = 1.0 / 255.0;
    for (size_t i = 0; i < img.pixels(); ++i) {
        img.plane[0][i] = bytes[3 * i + 0] * inv;
        img.plane[1][i] = bytes[3 * i + 1] * inv;
        img.plane[2][i] = bytes[3 * i + 2] * inv;
    }
    return img;
}

void save_image(const FundusImage& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0) throw Error("cannot save empty image");
    std::vector<std::uint8_t> bytes(img.pixels() * 3);
    for (size_t i = 0; i < img.pixels(); ++i) {
        bytes[3 * i + 0] = quantize_byte(img.plane[0][i]);
        bytes[3 * i + 1] = quantize_byte(img.plane[1][i]);
        bytes[3 * i + 2] = quantize_byte(img.plane[2][i]);
    }
    write_png_bytes(path, img.width, img.height, 3, bytes);
}

GrayImage load_gray(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> bytes;
    read_png_bytes(path, 1, w, h, bytes);
    GrayImage img(w, h);
    const double inv = 1.0 / 255.0;
    for (size_t i = 0; i < img.pixels(); ++i) img.values[i] = bytes[i] * inv;
    return img;
}

void save_gray(const GrayImage& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0) throw Error("cannot save empty image");
    std::vector<std::uint8_t> bytes(img.pixels());
    for (size_t i = 0; i < img.pixels(); ++i) bytes[i] = quantize_byte(img.values[i]);
    write_png_bytes(path, img.width, img.height, 1, bytes);
}

}  // namespace pap
