#pragma once

#include "magniglyph/raster.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace magniglyph::font {

inline constexpr int kCellWidth = 5;
inline constexpr int kCellHeight = 7;

/// Seven rows, five bits each; bit 4 is the leftmost column.
using Glyph = std::array<std::uint8_t, kCellHeight>;

/// The 36 supported characters, A-Z then 0-9.
std::string_view alphabet();

std::optional<Glyph> glyph(char c);

/// Glyph rendered as a mask with each font bit expanded to scale x scale pixels,
/// cropped to the tight bounding box of its set pixels.
Mask render(char c, int scale);

} // namespace magniglyph::font
