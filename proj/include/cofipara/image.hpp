#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cofipara {

// 8-bit RGB raster, row-major, interleaved channels.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // height * width * 3

    bool empty() const { return data.empty(); }

    std::uint8_t at(int y, int x, int c) const {
        return data[static_cast<std::size_t>((y * width + x) * 3 + c)];
    }
    std::uint8_t& at(int y, int x, int c) {
        return data[static_cast<std::size_t>((y * width + x) * 3 + c)];
    }

    static Image filled(int height, int width, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

// Binary PPM (P6, maxval 255) reader; rejects non-RGB inputs.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& img);

// Nearest-neighbor resize to a square of the given side.
Image resize_square(const Image& img, int side);

}  // namespace cofipara
