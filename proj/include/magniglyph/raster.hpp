#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace magniglyph {

struct Size {
    int width = 0;
    int height = 0;

    friend bool operator==(const Size&, const Size&) = default;
};

/// Axis-aligned pixel rectangle; x0/y0 inclusive, x1/y1 exclusive.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    double center_x() const { return (x0 + x1) / 2.0; }
    double center_y() const { return (y0 + y1) / 2.0; }
    Size size() const { return {width(), height()}; }

    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    bool inside(Size image) const { return x0 >= 0 && y0 >= 0 && x1 <= image.width && y1 <= image.height; }

    /// Intersection; may be empty.
    Rect intersect(const Rect& other) const;

    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBlack{0, 0, 0};

/// Dense 8-bit RGB image, row-major.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, Rgb fill = kBlack);

    int width() const { return width_; }
    int height() const { return height_; }
    Size size() const { return {width_, height_}; }
    Rect bounds() const { return {0, 0, width_, height_}; }
    bool empty() const { return pixels_.empty(); }

    Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
    const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }

    std::vector<Rgb>& pixels() { return pixels_; }
    const std::vector<Rgb>& pixels() const { return pixels_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Binary per-pixel map. Bits are stored as bytes holding 0 or 1.
class Mask {
public:
    Mask() = default;
    Mask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    Size size() const { return {width_, height_}; }
    Rect bounds() const { return {0, 0, width_, height_}; }

    bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool value) { bits_[index(x, y)] = value ? 1 : 0; }

    std::size_t popcount() const;
    bool any() const { return popcount() > 0; }
    bool all() const { return popcount() == bits_.size(); }

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    Mask& operator|=(const Mask& other);

    friend bool operator==(const Mask&, const Mask&) = default;
    friend auto operator<=>(const Mask&, const Mask&) = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Real-valued single-channel plane (luma, SSIM maps).
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

} // namespace magniglyph
