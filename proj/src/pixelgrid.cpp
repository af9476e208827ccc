#include "flnip/pixelgrid.hpp"

#include <cmath>
#include <cstdio>

#include "flnip/errors.hpp"

namespace flnip {

namespace {

constexpr long kMaxDimension = 1000000;
constexpr long kMaxPixelCount = 100000000;

struct Cursor {
    std::string_view data;
    std::size_t pos = 0;

    bool eof() const { return pos >= data.size(); }
    char peek() const { return data[pos]; }
    char take() { return data[pos++]; }
};

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

// Skips whitespace and '#' comments (which run to end of line).
void skip_separators(Cursor& c) {
    while (!c.eof()) {
        if (is_space(c.peek())) {
            c.take();
        } else if (c.peek() == '#') {
            while (!c.eof() && c.take() != '\n') {
            }
        } else {
            return;
        }
    }
}

// Reads a nonnegative decimal integer, or -1 when none is present.
long read_number(Cursor& c) {
    skip_separators(c);
    if (c.eof() || c.peek() < '0' || c.peek() > '9') {
        return -1;
    }
    long value = 0;
    while (!c.eof() && c.peek() >= '0' && c.peek() <= '9') {
        value = value * 10 + (c.take() - '0');
        if (value > kMaxPixelCount) {
            return -2;
        }
    }
    return value;
}

} // namespace

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> px)
    : width(w), height(h), pixels(std::move(px)) {
    if (width < 3 || height < 3) {
        throw ImageTooSmall("image dimensions must be at least 3x3, got " +
                            std::to_string(width) + "x" + std::to_string(height));
    }
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
        throw SizeMismatch("pixel buffer holds " + std::to_string(pixels.size()) +
                           " values, expected " + std::to_string(std::size_t(width) * height));
    }
}

GrayImage decode_pgm(std::string_view bytes) {
    Cursor c{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw MalformedHeader("not a P2/P5 PGM stream");
    }
    const bool binary = bytes[1] == '5';
    c.pos = 2;

    const long width = read_number(c);
    const long height = read_number(c);
    const long maxval = read_number(c);
    if (width <= 0 || height <= 0 || width > kMaxDimension || height > kMaxDimension ||
        width * height > kMaxPixelCount) {
        throw MalformedHeader("bad image dimensions");
    }
    if (maxval <= 0) {
        throw MalformedHeader("bad maxval");
    }
    if (maxval > 255) {
        throw MaxvalTooLarge("maxval " + std::to_string(maxval) + " exceeds 255");
    }
    if (width < 3 || height < 3) {
        throw ImageTooSmall("decoded image is " + std::to_string(width) + "x" +
                            std::to_string(height) + ", minimum is 3x3");
    }

    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<std::uint8_t> pixels;
    pixels.reserve(count);

    if (binary) {
        // Exactly one whitespace byte separates the header from the raster.
        if (c.eof() || !is_space(c.peek())) {
            throw MalformedHeader("missing separator before binary payload");
        }
        c.take();
        if (bytes.size() - c.pos < count) {
            throw TruncatedPayload("binary payload holds " +
                                   std::to_string(bytes.size() - c.pos) + " of " +
                                   std::to_string(count) + " bytes");
        }
        for (std::size_t i = 0; i < count; ++i) {
            pixels.push_back(static_cast<std::uint8_t>(c.take()));
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = read_number(c);
            if (v < 0 || v > 255) {
                throw TruncatedPayload("ASCII payload defective at sample " +
                                       std::to_string(i));
            }
            pixels.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::string encode_pgm(const GrayImage& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " +
                      std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    return out;
}

GrayImage rgb_to_gray(const std::vector<std::uint8_t>& rgb, int width, int height) {
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (rgb.size() != count * 3) {
        throw SizeMismatch("rgb buffer holds " + std::to_string(rgb.size()) +
                           " values, expected " + std::to_string(count * 3));
    }
    std::vector<std::uint8_t> gray(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        double v = std::floor(luma + 0.5);  // round half up
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        gray[i] = static_cast<std::uint8_t>(v);
    }
    return GrayImage(width, height, std::move(gray));
}

} // namespace flnip
