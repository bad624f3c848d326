#include "magniglyph/raster.hpp"

#include "magniglyph/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace magniglyph {

Rect Rect::intersect(const Rect& other) const {
    return {std::max(x0, other.x0), std::max(y0, other.y0), std::min(x1, other.x1),
            std::min(y1, other.y1)};
}

Raster::Raster(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw ValidationError("raster dimensions must be positive, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw ValidationError("mask dimensions must be positive, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    }
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t Mask::popcount() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask& Mask::operator|=(const Mask& other) {
    if (other.size() != size()) {
        throw ValidationError("mask union: dimension mismatch");
    }
    std::transform(bits_.begin(), bits_.end(), other.bits_.begin(), bits_.begin(),
                   [](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>(a | b); });
    return *this;
}

} // namespace magniglyph
