#pragma once

#include "magniglyph/raster.hpp"

#include <cstdint>

namespace magniglyph {

/// Round half up and clamp into the 8-bit channel range.
std::uint8_t to_channel(double value);

/// Copies `region` clipped to the image. Throws ValidationError("empty crop region")
/// when nothing of the region lies inside.
Raster crop(const Raster& src, const Rect& region);
Mask crop(const Mask& src, const Rect& region);

/// Bilinear resize. Source sample position for destination index d is
/// (d + 0.5) * src/dst - 0.5, clamped to the border.
Raster scale_bilinear(const Raster& src, int new_width, int new_height);

/// Nearest-neighbour resize with the same half-pixel-center convention.
Mask scale_nearest(const Mask& src, int new_width, int new_height);

/// Writes src into a copy of dst wherever src_mask is set, shifted by (dx, dy).
/// Destination coordinates outside dst are dropped.
Raster blit_masked(const Raster& dst, const Raster& src, const Mask& src_mask, int dx, int dy);

/// Rec. 601 luma, unrounded.
Plane to_luma(const Raster& src);

/// Square (Chebyshev) dilation by `radius` pixels.
Mask dilate(const Mask& src, int radius);

/// Places `local` (in rect-local coordinates) into a full-size mask at `at`.
Mask place_mask(const Mask& local, const Rect& at, Size canvas);

} // namespace magniglyph
