#include "magniglyph/magnifier.hpp"

#include "magniglyph/errors.hpp"
#include "magniglyph/imaging.hpp"

#include <cmath>
#include <string>

namespace magniglyph {

namespace {

constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::ComponentCenter, "component-center"},
    {Strategy::RectLowerRight, "rect-lower-right"},
    {Strategy::ImageCenter, "image-center"},
    {Strategy::DetectionPaste, "detection-paste"},
};

void require_rate(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw ValidationError("magnification rate must be a positive number");
    }
}

Rect centered_rect(double cx, double cy, Size size) {
    const int x0 = static_cast<int>(std::lround(cx - size.width / 2.0));
    const int y0 = static_cast<int>(std::lround(cy - size.height / 2.0));
    return {x0, y0, x0 + size.width, y0 + size.height};
}

PlacedComponent rect_component(const Raster& image, const CharAnnotation& ch, double rate) {
    const int w = scaled_length(ch.bbox.width(), rate);
    const int h = scaled_length(ch.bbox.height(), rate);
    return {scale_bilinear(crop(image, ch.bbox), w, h), Mask(w, h, true),
            place_component_center(ch.bbox, {w, h})};
}

} // namespace

std::string_view to_string(Strategy s) {
    for (const auto& [value, name] : kStrategyNames) {
        if (value == s) return name;
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (const auto& [value, n] : kStrategyNames) {
        if (n == name) return value;
    }
    throw ValidationError("unknown strategy '" + std::string(name) +
                          "' (expected component-center, rect-lower-right, image-center or "
                          "detection-paste)");
}

void MagnifyConfig::validate() const {
    require_rate(rate);
    inpaint.validate();
}

int scaled_length(int length, double rate) {
    require_rate(rate);
    return std::max(1, static_cast<int>(std::lround(rate * length)));
}

ScaledComponent scale_component(const CharAnnotation& ch, const Raster& src, double rate) {
    const int w = scaled_length(ch.bbox.width(), rate);
    const int h = scaled_length(ch.bbox.height(), rate);
    if (ch.mask.size() != ch.bbox.size()) {
        throw ValidationError("scale_component: mask does not match bbox");
    }
    Raster local = crop(src, ch.bbox);
    if (local.size() != ch.bbox.size()) {
        throw ValidationError("scale_component: bbox lies outside the image");
    }
    for (int y = 0; y < local.height(); ++y) {
        for (int x = 0; x < local.width(); ++x) {
            if (!ch.mask.get(x, y)) local.at(x, y) = kBlack;
        }
    }
    return {scale_bilinear(local, w, h), scale_nearest(ch.mask, w, h)};
}

Rect place_component_center(const Rect& bbox, Size new_size) {
    return centered_rect(bbox.center_x(), bbox.center_y(), new_size);
}

Rect place_image_center(const Rect& bbox, Size new_size, Size image_size, double rate) {
    require_rate(rate);
    const double cx = image_size.width / 2.0;
    const double cy = image_size.height / 2.0;
    return centered_rect(cx + rate * (bbox.center_x() - cx), cy + rate * (bbox.center_y() - cy),
                         new_size);
}

Composite compose(const Raster& base, std::span<const PlacedComponent> components, Priority priority) {
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    Composite out{base, Mask(base.width(), base.height()),
                  std::vector<std::size_t>(components.size(), 0)};
    std::vector<std::size_t> owner(base.pixels().size(), kNone);

    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        if (c.pixels.size() != c.mask.size() || c.pixels.size() != c.target.size()) {
            throw ValidationError("compose: component " + std::to_string(k) +
                                  " has mismatched pixel, mask and target sizes");
        }
        const Rect visible = c.target.intersect(base.bounds());
        for (int y = visible.y0; y < visible.y1; ++y) {
            for (int x = visible.x0; x < visible.x1; ++x) {
                if (!c.mask.get(x - c.target.x0, y - c.target.y0)) continue;
                std::size_t& who = owner[static_cast<std::size_t>(y) * base.width() + x];
                if (priority == Priority::UpperLeft && who != kNone) continue;
                out.image.at(x, y) = c.pixels.at(x - c.target.x0, y - c.target.y0);
                out.mask.set(x, y, true);
                who = k;
            }
        }
    }
    for (std::size_t who : owner) {
        if (who != kNone) ++out.visible[who];
    }
    return out;
}

Raster restore_background(const Raster& erased, const Raster& original, const Mask& text_mask) {
    if (erased.size() != original.size() || erased.size() != text_mask.size()) {
        throw ValidationError("restore_background: dimension mismatch");
    }
    Raster out = erased;
    for (std::size_t i = 0; i < out.pixels().size(); ++i) {
        if (!text_mask.bits()[i]) out.pixels()[i] = original.pixels()[i];
    }
    return out;
}

MagnifiedScene magnify_scene(const Raster& image, const SceneAnnotation& ann, const MagnifyConfig& cfg) {
    cfg.validate();
    validate(ann);
    if (image.size() != ann.image_size) {
        throw ValidationError("image '" + ann.image_id + "': annotation size does not match the image");
    }

    MagnifiedScene scene;
    scene.erased = erase_text(image, ann, cfg.inpaint);
    scene.components = extract_components(image, ann);
    const Raster base = restore_background(scene.erased, image, scene.components.mask);

    const auto order = order_components(ann);
    std::vector<PlacedComponent> placed;
    placed.reserve(order.size());
    for (std::size_t idx : order) {
        const auto& ch = ann.characters[idx];
        switch (cfg.strategy) {
        case Strategy::ComponentCenter:
        case Strategy::ImageCenter: {
            ScaledComponent sc = scale_component(ch, image, cfg.rate);
            const Rect target = cfg.strategy == Strategy::ComponentCenter
                                    ? place_component_center(ch.bbox, sc.size())
                                    : place_image_center(ch.bbox, sc.size(), image.size(), cfg.rate);
            placed.push_back({std::move(sc.pixels), std::move(sc.mask), target});
            break;
        }
        case Strategy::RectLowerRight:
        case Strategy::DetectionPaste:
            placed.push_back(rect_component(image, ch, cfg.rate));
            break;
        }
    }

    const Priority priority = (cfg.strategy == Strategy::ComponentCenter ||
                               cfg.strategy == Strategy::ImageCenter)
                                  ? Priority::UpperLeft
                                  : Priority::LowerRight;
    const Raster& canvas = cfg.strategy == Strategy::DetectionPaste ? image : base;
    Composite composite = compose(canvas, placed, priority);
    scene.image = std::move(composite.image);
    scene.magnified_union_mask = std::move(composite.mask);
    scene.magnified_components =
        compose(Raster(image.width(), image.height()), placed, priority).image;

    scene.per_char.resize(ann.characters.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& p = placed[k];
        CharPlacement& info = scene.per_char[order[k]];
        info.original = ann.characters[order[k]].bbox;
        info.target = p.target;
        const Rect clipped = p.target.intersect(image.bounds());
        if (!clipped.empty()) info.clipped = clipped;
        info.scaled_pixels = p.mask.popcount();
        info.visible_pixels = composite.visible[k];
    }
    return scene;
}

Raster detection_paste_baseline(const Raster& image, const SceneAnnotation& ann, double rate) {
    require_rate(rate);
    if (image.size() != ann.image_size) {
        throw ValidationError("image '" + ann.image_id + "': annotation size does not match the image");
    }
    std::vector<PlacedComponent> placed;
    for (std::size_t idx : order_components(ann)) {
        placed.push_back(rect_component(image, ann.characters[idx], rate));
    }
    return compose(image, placed, Priority::LowerRight).image;
}

} // namespace magniglyph
