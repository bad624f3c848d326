#include "magniglyph/synth.hpp"

#include "magniglyph/errors.hpp"
#include "magniglyph/font.hpp"
#include "magniglyph/imaging.hpp"
#include "magniglyph/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace magniglyph {

using nlohmann::json;

namespace {

Rgb random_color(Rng& rng, Rgb lo, Rgb hi) {
    auto ch = [&](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>(rng.uniform_int(a, b)); };
    return {ch(lo.r, hi.r), ch(lo.g, hi.g), ch(lo.b, hi.b)};
}

double luma(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

Raster make_background(const SynthSpec& spec, Rng& rng) {
    const auto [w, h] = spec.image_size;
    if (spec.flat_background) {
        return Raster(w, h, random_color(rng, spec.background_min, spec.background_max));
    }
    // Low-frequency field: a coarse grid of random colors, bilinearly upsampled.
    Raster control(4, 3);
    for (auto& p : control.pixels()) p = random_color(rng, spec.background_min, spec.background_max);
    return scale_bilinear(control, w, h);
}

Rgb mean_color(const Raster& r) {
    double s[3] = {0, 0, 0};
    for (const auto& p : r.pixels()) {
        s[0] += p.r;
        s[1] += p.g;
        s[2] += p.b;
    }
    const double n = static_cast<double>(r.pixels().size());
    return {to_channel(s[0] / n), to_channel(s[1] / n), to_channel(s[2] / n)};
}

Rgb pick_foreground(const SynthSpec& spec, Rgb background, Rng& rng) {
    Rgb best = random_color(rng, spec.foreground_min, spec.foreground_max);
    for (int attempt = 0; attempt < 64; ++attempt) {
        if (std::abs(luma(best) - luma(background)) >= spec.min_contrast) return best;
        const Rgb next = random_color(rng, spec.foreground_min, spec.foreground_max);
        if (std::abs(luma(next) - luma(background)) > std::abs(luma(best) - luma(background))) {
            best = next;
        }
    }
    return best;
}

void fill_rect(Raster& img, const Rect& r, Rgb color) {
    const Rect v = r.intersect(img.bounds());
    for (int y = v.y0; y < v.y1; ++y)
        for (int x = v.x0; x < v.x1; ++x) img.at(x, y) = color;
}

void fill_ellipse(Raster& img, const Rect& r, Rgb color) {
    const double cx = r.center_x() - 0.5;
    const double cy = r.center_y() - 0.5;
    const double rx = r.width() / 2.0;
    const double ry = r.height() / 2.0;
    const Rect v = r.intersect(img.bounds());
    for (int y = v.y0; y < v.y1; ++y) {
        for (int x = v.x0; x < v.x1; ++x) {
            const double dx = (x - cx) / rx;
            const double dy = (y - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) img.at(x, y) = color;
        }
    }
}

bool overlaps_any(const Rect& r, const std::vector<CharAnnotation>& chars) {
    return std::any_of(chars.begin(), chars.end(),
                       [&](const CharAnnotation& c) { return !r.intersect(c.bbox).empty(); });
}

void add_distractors(const SynthSpec& spec, const std::vector<CharAnnotation>& chars, int scale,
                     Raster& plate, Rng& rng) {
    const auto [w, h] = spec.image_size;
    for (int d = 0; d < spec.distractor_count; ++d) {
        const Rgb color = random_color(rng, {0, 0, 0}, {255, 255, 255});
        if (spec.distractor_placement == DistractorPlacement::Random || chars.empty()) {
            const int rw = rng.uniform_int(2 * scale, 6 * scale);
            const int rh = rng.uniform_int(2 * scale, 6 * scale);
            const int x0 = rng.uniform_int(-rw / 2, w - rw / 2);
            const int y0 = rng.uniform_int(-rh / 2, h - rh / 2);
            const Rect r{x0, y0, x0 + rw, y0 + rh};
            if (rng.uniform_int(0, 1) == 0) {
                fill_rect(plate, r, color);
            } else {
                fill_ellipse(plate, r, color);
            }
            continue;
        }
        // Touching a glyph box from above or below, so any rectangle grown
        // around that glyph covers part of it.
        const auto& target = chars[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(chars.size()) - 1))];
        const int rw = target.bbox.width() + rng.uniform_int(0, 2 * scale);
        const int rh = rng.uniform_int(scale, 3 * scale);
        const int x0 = target.bbox.x0 + (target.bbox.width() - rw) / 2;
        const bool above_first = rng.uniform_int(0, 1) == 0;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const bool above = (attempt == 0) == above_first;
            const int y0 = above ? target.bbox.y0 - rh : target.bbox.y1;
            const Rect r{x0, y0, x0 + rw, y0 + rh};
            if (r.inside(spec.image_size) && !overlaps_any(r, chars)) {
                fill_rect(plate, r, color);
                break;
            }
        }
    }
}

} // namespace

void SynthSpec::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ValidationError(std::string("synth spec: ") + what);
    };
    require(image_size.width >= 1 && image_size.height >= 1, "image size must be positive");
    require(char_count_min >= 0 && char_count_min <= char_count_max, "bad char_count range");
    require(glyph_scale_min >= 1 && glyph_scale_min <= glyph_scale_max, "bad glyph_scale range");
    require(char_gap_min >= 0 && char_gap_min <= char_gap_max, "bad char_gap range");
    require(distractor_count >= 0, "distractor_count must be >= 0");
    require(font::kCellWidth * glyph_scale_min <= image_size.width &&
                font::kCellHeight * glyph_scale_min <= image_size.height,
            "glyphs do not fit inside the image");
    for (auto [lo, hi] : {std::pair{background_min, background_max}, std::pair{foreground_min, foreground_max}}) {
        require(lo.r <= hi.r && lo.g <= hi.g && lo.b <= hi.b, "color range min exceeds max");
    }
}

SynthScene synth_scene(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto [w, h] = spec.image_size;

    SynthScene out;
    out.plate = make_background(spec, rng);

    const int count = rng.uniform_int(spec.char_count_min, spec.char_count_max);
    const int scale = rng.uniform_int(spec.glyph_scale_min, spec.glyph_scale_max);
    std::vector<char> text;
    std::vector<Mask> glyphs;
    for (int i = 0; i < count; ++i) {
        const auto letters = font::alphabet();
        text.push_back(letters[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(letters.size()) - 1))]);
        glyphs.push_back(font::render(text.back(), scale));
    }

    // Rows of glyphs; a single line is a grid with one row.
    const int per_row = spec.layout == Layout::SingleLine
                            ? std::max(count, 1)
                            : std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))));
    const int margin = 1;
    const int glyph_h = font::kCellHeight * scale;
    std::vector<std::vector<int>> gaps;
    int block_w = 0;
    for (int start = 0; start < count; start += per_row) {
        std::vector<int> row_gaps;
        int row_w = 0;
        for (int i = start; i < std::min(count, start + per_row); ++i) {
            if (i > start) {
                row_gaps.push_back(rng.uniform_int(spec.char_gap_min, spec.char_gap_max));
                row_w += row_gaps.back();
            }
            row_w += glyphs[static_cast<std::size_t>(i)].width();
        }
        block_w = std::max(block_w, row_w);
        gaps.push_back(std::move(row_gaps));
    }
    const int rows = static_cast<int>(gaps.size());
    std::vector<int> row_gap;
    for (int r = 1; r < rows; ++r) row_gap.push_back(rng.uniform_int(spec.char_gap_min, spec.char_gap_max) + scale);
    int block_h = rows * glyph_h;
    for (int g : row_gap) block_h += g;

    if (count > 0 && (block_w > w - 2 * margin || block_h > h - 2 * margin)) {
        throw ValidationError("layout overflow: " + std::to_string(count) + " glyphs at scale " +
                              std::to_string(scale) + " need " + std::to_string(block_w) + "x" +
                              std::to_string(block_h) + " inside a " + std::to_string(w) + "x" +
                              std::to_string(h) + " image");
    }

    out.annotation.image_id = "synth_" + std::to_string(spec.seed);
    out.annotation.image_size = spec.image_size;
    if (count > 0) {
        const int left = rng.uniform_int(margin, w - margin - block_w);
        int top = rng.uniform_int(margin, h - margin - block_h);
        for (int r = 0; r < rows; ++r) {
            int x = left;
            for (int i = r * per_row; i < std::min(count, (r + 1) * per_row); ++i) {
                if (i > r * per_row) x += gaps[static_cast<std::size_t>(r)][static_cast<std::size_t>(i - r * per_row - 1)];
                const Mask& m = glyphs[static_cast<std::size_t>(i)];
                out.annotation.characters.push_back(
                    {std::string(1, text[static_cast<std::size_t>(i)]), Rect{x, top, x + m.width(), top + m.height()}, m});
                x += m.width();
            }
            if (r + 1 < rows) top += glyph_h + row_gap[static_cast<std::size_t>(r)];
        }
    }

    add_distractors(spec, out.annotation.characters, scale, out.plate, rng);

    const Rgb ink = pick_foreground(spec, mean_color(out.plate), rng);
    out.image = out.plate;
    for (const auto& ch : out.annotation.characters) {
        for (int y = 0; y < ch.bbox.height(); ++y)
            for (int x = 0; x < ch.bbox.width(); ++x)
                if (ch.mask.get(x, y)) out.image.at(ch.bbox.x0 + x, ch.bbox.y0 + y) = ink;
    }
    return out;
}

namespace {

Rgb rgb_from_json(const json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 3 || std::any_of(v.begin(), v.end(), [](int c) { return c < 0 || c > 255; })) {
        throw ValidationError("synth spec: colors are [r, g, b] with channels in 0..255");
    }
    return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
}

json rgb_to_json(Rgb c) { return {c.r, c.g, c.b}; }

std::pair<int, int> range_from_json(const json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 2) throw ValidationError("synth spec: ranges are [min, max]");
    return {v[0], v[1]};
}

} // namespace

SynthSpec synth_spec_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("synth spec must be a JSON object");
    SynthSpec s;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "seed") {
                s.seed = value.get<std::uint64_t>();
            } else if (key == "size") {
                const auto [w, h] = range_from_json(value);
                s.image_size = {w, h};
            } else if (key == "char_count") {
                std::tie(s.char_count_min, s.char_count_max) = range_from_json(value);
            } else if (key == "glyph_scale") {
                std::tie(s.glyph_scale_min, s.glyph_scale_max) = range_from_json(value);
            } else if (key == "char_gap") {
                std::tie(s.char_gap_min, s.char_gap_max) = range_from_json(value);
            } else if (key == "background") {
                s.background_min = rgb_from_json(value.at(0));
                s.background_max = rgb_from_json(value.at(1));
            } else if (key == "foreground") {
                s.foreground_min = rgb_from_json(value.at(0));
                s.foreground_max = rgb_from_json(value.at(1));
            } else if (key == "min_contrast") {
                s.min_contrast = value.get<double>();
            } else if (key == "flat_background") {
                s.flat_background = value.get<bool>();
            } else if (key == "distractors") {
                s.distractor_count = value.get<int>();
            } else if (key == "distractor_placement") {
                const auto p = value.get<std::string>();
                if (p == "random") s.distractor_placement = DistractorPlacement::Random;
                else if (p == "adjacent") s.distractor_placement = DistractorPlacement::Adjacent;
                else throw ValidationError("synth spec: distractor_placement is 'random' or 'adjacent'");
            } else if (key == "layout") {
                const auto l = value.get<std::string>();
                if (l == "single-line") s.layout = Layout::SingleLine;
                else if (l == "grid") s.layout = Layout::Grid;
                else throw ValidationError("synth spec: layout is 'single-line' or 'grid'");
            } else if (key != "count") {
                throw ValidationError("synth spec: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

json to_json(const SynthSpec& s) {
    return {{"seed", s.seed},
            {"size", {s.image_size.width, s.image_size.height}},
            {"char_count", {s.char_count_min, s.char_count_max}},
            {"glyph_scale", {s.glyph_scale_min, s.glyph_scale_max}},
            {"char_gap", {s.char_gap_min, s.char_gap_max}},
            {"background", {rgb_to_json(s.background_min), rgb_to_json(s.background_max)}},
            {"foreground", {rgb_to_json(s.foreground_min), rgb_to_json(s.foreground_max)}},
            {"min_contrast", s.min_contrast},
            {"flat_background", s.flat_background},
            {"distractors", s.distractor_count},
            {"distractor_placement", s.distractor_placement == DistractorPlacement::Random ? "random" : "adjacent"},
            {"layout", s.layout == Layout::SingleLine ? "single-line" : "grid"}};
}

} // namespace magniglyph
