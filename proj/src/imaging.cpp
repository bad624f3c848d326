#include "magniglyph/imaging.hpp"

#include "magniglyph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace magniglyph {

namespace {

Rect clip_or_throw(Size size, const Rect& region) {
    const Rect clipped = region.intersect({0, 0, size.width, size.height});
    if (clipped.empty()) {
        throw ValidationError("empty crop region");
    }
    return clipped;
}

void require_target_size(int w, int h) {
    if (w < 1 || h < 1) {
        throw ValidationError("scale target must be at least 1x1, got " + std::to_string(w) + "x" +
                              std::to_string(h));
    }
}

// Source coordinate of destination sample d, clamped to [0, src_size - 1].
double source_coord(int d, int src_size, int dst_size) {
    const double s = (d + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(src_size - 1));
}

// floor((d + 0.5) * src / dst) in exact integer arithmetic.
int nearest_index(int d, int src_size, int dst_size) {
    const long long num = (2LL * d + 1) * src_size;
    const long long idx = num / (2LL * dst_size);
    return static_cast<int>(std::min<long long>(idx, src_size - 1));
}

} // namespace

std::uint8_t to_channel(double value) {
    const double rounded = std::floor(value + 0.5);
    return static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
}

Raster crop(const Raster& src, const Rect& region) {
    const Rect r = clip_or_throw(src.size(), region);
    Raster out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            out.at(x, y) = src.at(r.x0 + x, r.y0 + y);
        }
    }
    return out;
}

Mask crop(const Mask& src, const Rect& region) {
    const Rect r = clip_or_throw(src.size(), region);
    Mask out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            out.set(x, y, src.get(r.x0 + x, r.y0 + y));
        }
    }
    return out;
}

Raster scale_bilinear(const Raster& src, int new_width, int new_height) {
    require_target_size(new_width, new_height);
    Raster out(new_width, new_height);
    const int sw = src.width();
    const int sh = src.height();
    for (int y = 0; y < new_height; ++y) {
        const double sy = source_coord(y, sh, new_height);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy = sy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double sx = source_coord(x, sw, new_width);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx = sx - x0;

            const Rgb& p00 = src.at(x0, y0);
            const Rgb& p10 = src.at(x1, y0);
            const Rgb& p01 = src.at(x0, y1);
            const Rgb& p11 = src.at(x1, y1);
            auto lerp = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
                const double top = a + (b - a) * fx;
                const double bottom = c + (d - c) * fx;
                return to_channel(top + (bottom - top) * fy);
            };
            out.at(x, y) = {lerp(p00.r, p10.r, p01.r, p11.r), lerp(p00.g, p10.g, p01.g, p11.g),
                            lerp(p00.b, p10.b, p01.b, p11.b)};
        }
    }
    return out;
}

Mask scale_nearest(const Mask& src, int new_width, int new_height) {
    require_target_size(new_width, new_height);
    Mask out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        const int sy = nearest_index(y, src.height(), new_height);
        for (int x = 0; x < new_width; ++x) {
            out.set(x, y, src.get(nearest_index(x, src.width(), new_width), sy));
        }
    }
    return out;
}

Raster blit_masked(const Raster& dst, const Raster& src, const Mask& src_mask, int dx, int dy) {
    if (src.size() != src_mask.size()) {
        throw ValidationError("blit_masked: source is " + std::to_string(src.width()) + "x" +
                              std::to_string(src.height()) + " but mask is " +
                              std::to_string(src_mask.width()) + "x" +
                              std::to_string(src_mask.height()));
    }
    Raster out = dst;
    const Rect visible = Rect{dx, dy, dx + src.width(), dy + src.height()}.intersect(dst.bounds());
    for (int y = visible.y0; y < visible.y1; ++y) {
        for (int x = visible.x0; x < visible.x1; ++x) {
            if (src_mask.get(x - dx, y - dy)) {
                out.at(x, y) = src.at(x - dx, y - dy);
            }
        }
    }
    return out;
}

Plane to_luma(const Raster& src) {
    Plane out(src.width(), src.height());
    std::transform(src.pixels().begin(), src.pixels().end(), out.values.begin(), [](const Rgb& p) {
        return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    });
    return out;
}

Mask dilate(const Mask& src, int radius) {
    if (radius < 0) {
        throw ValidationError("dilation radius must be non-negative");
    }
    if (radius == 0) {
        return src;
    }
    const int w = src.width();
    const int h = src.height();
    Mask horizontal(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius) && !hit; ++k) {
                hit = src.get(k, y);
            }
            horizontal.set(x, y, hit);
        }
    }
    Mask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius) && !hit; ++k) {
                hit = horizontal.get(x, k);
            }
            out.set(x, y, hit);
        }
    }
    return out;
}

Mask place_mask(const Mask& local, const Rect& at, Size canvas) {
    if (local.size() != at.size()) {
        throw ValidationError("place_mask: mask does not match target rectangle");
    }
    Mask out(canvas.width, canvas.height);
    const Rect visible = at.intersect({0, 0, canvas.width, canvas.height});
    for (int y = visible.y0; y < visible.y1; ++y) {
        for (int x = visible.x0; x < visible.x1; ++x) {
            if (local.get(x - at.x0, y - at.y0)) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

} // namespace magniglyph
