#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flnip {

// 8-bit single-channel raster, row-major. Dimensions are at least 3x3 so
// that every pixel processing stage can form a full 3x3 window somewhere.
// Immutable by convention after construction; safe to share across threads.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::vector<std::uint8_t> px);

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool operator==(const GrayImage&) const = default;
};

// An image together with its corpus identity.
struct LabeledImage {
    std::string id;
    std::string category;
    GrayImage image;
};

// Parses Netpbm P2 (ASCII) or P5 (binary) with maxval <= 255. '#' comments
// are accepted between header tokens. The raster is returned as stored: a
// maxval below 255 does not trigger any rescaling.
GrayImage decode_pgm(std::string_view bytes);

// Emits canonical binary PGM: "P5\n<w> <h>\n255\n" followed by the raster.
// decode_pgm(encode_pgm(x)) == x for every valid image.
std::string encode_pgm(const GrayImage& img);

// BT.601 luma conversion, round half up. rgb holds row-major R,G,B triplets.
GrayImage rgb_to_gray(const std::vector<std::uint8_t>& rgb, int width, int height);

} // namespace flnip
