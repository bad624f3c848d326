#include "magniglyph/png_io.hpp"

#include "magniglyph/errors.hpp"

#include <png.h>

#include <cstring>
#include <vector>

namespace magniglyph {

namespace {

struct PngImage {
    png_image image;

    PngImage() {
        std::memset(&image, 0, sizeof image);
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> read_raw(const std::filesystem::path& path, png_uint_32 format,
                                   int& width, int& height) {
    PngImage png;
    if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
        throw IoError("cannot read PNG " + path.string() + ": " + png.image.message);
    }
    png.image.format = format;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
    if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
        throw IoError("cannot decode PNG " + path.string() + ": " + png.image.message);
    }
    width = static_cast<int>(png.image.width);
    height = static_cast<int>(png.image.height);
    return buffer;
}

void write_raw(const std::filesystem::path& path, png_uint_32 format, int width, int height,
               const std::uint8_t* data) {
    PngImage png;
    png.image.width = static_cast<png_uint_32>(width);
    png.image.height = static_cast<png_uint_32>(height);
    png.image.format = format;
    if (!png_image_write_to_file(&png.image, path.c_str(), 0, data, 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + png.image.message);
    }
}

} // namespace

Raster read_png(const std::filesystem::path& path) {
    int w = 0;
    int h = 0;
    const auto rgba = read_raw(path, PNG_FORMAT_RGBA, w, h);
    Raster out(w, h);
    auto& px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = {rgba[4 * i], rgba[4 * i + 1], rgba[4 * i + 2]};
    }
    return out;
}

void write_png(const std::filesystem::path& path, const Raster& image) {
    static_assert(sizeof(Rgb) == 3, "Rgb must be tightly packed");
    write_raw(path, PNG_FORMAT_RGB, image.width(), image.height(),
              reinterpret_cast<const std::uint8_t*>(image.pixels().data()));
}

Mask read_mask_png(const std::filesystem::path& path) {
    int w = 0;
    int h = 0;
    const auto gray = read_raw(path, PNG_FORMAT_GRAY, w, h);
    Mask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.set(x, y, gray[static_cast<std::size_t>(y) * w + x] >= 128);
        }
    }
    return out;
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
    std::vector<std::uint8_t> gray(mask.bits().size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = mask.bits()[i] ? 255 : 0;
    }
    write_raw(path, PNG_FORMAT_GRAY, mask.width(), mask.height(), gray.data());
}

} // namespace magniglyph
