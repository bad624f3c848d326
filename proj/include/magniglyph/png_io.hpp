#pragma once

#include "magniglyph/raster.hpp"

#include <filesystem>

namespace magniglyph {

/// Reads any PNG as 8-bit RGB; an alpha channel is discarded, not composited.
Raster read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& image);

/// Masks are 8-bit grayscale PNGs: 0 = false, 255 = true. On read, values >= 128 are true.
Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

} // namespace magniglyph
