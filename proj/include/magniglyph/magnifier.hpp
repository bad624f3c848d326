#pragma once

#include "magniglyph/annotations.hpp"
#include "magniglyph/eraser.hpp"
#include "magniglyph/raster.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace magniglyph {

enum class Strategy {
    ComponentCenter, ///< pixel masks scaled about each character's own center
    RectLowerRight,  ///< full rectangular crops, later characters overwrite earlier ones
    ImageCenter,     ///< positions and sizes scaled about the image center
    DetectionPaste,  ///< baseline: no erasing, rectangles pasted over the original
};

enum class Priority { UpperLeft, LowerRight };

std::string_view to_string(Strategy s);
/// Accepts the kebab-case names printed by to_string.
Strategy parse_strategy(std::string_view name);

struct MagnifyConfig {
    double rate = 1.2;
    Strategy strategy = Strategy::ComponentCenter;
    InpaintConfig inpaint;

    void validate() const;
};

/// round(rate * length), at least 1.
int scaled_length(int length, double rate);

struct ScaledComponent {
    Raster pixels; ///< bilinear-scaled crop with non-character pixels zeroed first
    Mask mask;     ///< nearest-scaled character mask
    Size size() const { return pixels.size(); }
};

ScaledComponent scale_component(const CharAnnotation& ch, const Raster& src, double rate);

/// Rectangle of `new_size` whose center is within half a pixel of the bbox center.
Rect place_component_center(const Rect& bbox, Size new_size);

/// Rectangle of `new_size` centered at c + rate * (bbox_center - c), c the image center.
Rect place_image_center(const Rect& bbox, Size new_size, Size image_size, double rate);

struct PlacedComponent {
    Raster pixels;
    Mask mask;
    Rect target; ///< same size as pixels; may extend past the canvas
};

struct Composite {
    Raster image;
    Mask mask;                         ///< union of pixels written by any component
    std::vector<std::size_t> visible;  ///< per component, pixels it owns in the result
};

/// Pastes components in the given order. Upper-left priority never overwrites a
/// pixel an earlier component wrote; lower-right priority always overwrites.
Composite compose(const Raster& base, std::span<const PlacedComponent> components, Priority priority);

struct CharPlacement {
    Rect original;
    Rect target;                 ///< unclipped
    std::optional<Rect> clipped; ///< target clipped to the image; empty when fully off-image
    std::size_t scaled_pixels = 0;
    std::size_t visible_pixels = 0;
};

struct MagnifiedScene {
    Raster image;
    Mask magnified_union_mask;
    std::vector<CharPlacement> per_char; ///< indexed like ann.characters

    Raster erased;          ///< erase_text output
    Components components;  ///< extracted character components
    Raster magnified_components; ///< the same composition drawn over black
};

/// Erased image with every pixel outside `text_mask` taken back from the original.
/// This is the canvas magnified components are composed onto.
Raster restore_background(const Raster& erased, const Raster& original, const Mask& text_mask);

MagnifiedScene magnify_scene(const Raster& image, const SceneAnnotation& ann, const MagnifyConfig& cfg);

/// Baseline: each character's bbox crop (background included) scaled by `rate`
/// and pasted centered on the original box, in reading order, over the original.
Raster detection_paste_baseline(const Raster& image, const SceneAnnotation& ann, double rate);

} // namespace magniglyph
