#include "report/png_io.hpp"

#include <png.h>

#include <cstring>
#include <filesystem>

#include "core/error.hpp"

namespace caa::report {

void write_png_gray(const std::string& path, const GrayImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != std::size_t(image.width) * std::size_t(image.height))
        raise(ErrorKind::InvalidArgument, "malformed grayscale image buffer");

    std::filesystem::path dir = std::filesystem::path(path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);

    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    png.width = png_uint_32(image.width);
    png.height = png_uint_32(image.height);
    png.format = PNG_FORMAT_GRAY;

    if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(),
                                 png_int_32(image.width), nullptr))
        raise(ErrorKind::Io, std::string("PNG write failed: ") + png.message);
}

} // namespace caa::report
