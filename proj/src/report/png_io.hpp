#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace caa::report {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major

    std::uint8_t& at(int y, int x) { return pixels[std::size_t(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return pixels[std::size_t(y) * width + x]; }
};

// 8-bit grayscale PNG; byte-deterministic for identical input.
void write_png_gray(const std::string& path, const GrayImage& image);

} // namespace caa::report
