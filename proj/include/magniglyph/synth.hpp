#pragma once

#include "magniglyph/annotations.hpp"
#include "magniglyph/raster.hpp"

#include <json.hpp>

#include <cstdint>

namespace magniglyph {

enum class Layout { SingleLine, Grid };
enum class DistractorPlacement { Random, Adjacent };

/// Parameters of a procedural scene. Every range is inclusive.
struct SynthSpec {
    std::uint64_t seed = 0;
    Size image_size{160, 64};
    int char_count_min = 3;
    int char_count_max = 6;
    /// Pixels per font bit; glyphs are 5*scale by 7*scale at most.
    int glyph_scale_min = 2;
    int glyph_scale_max = 4;
    /// Horizontal background pixels between neighbouring glyph boxes.
    int char_gap_min = 1;
    int char_gap_max = 4;
    Rgb background_min{40, 40, 40};
    Rgb background_max{220, 220, 220};
    Rgb foreground_min{0, 0, 0};
    Rgb foreground_max{255, 255, 255};
    /// Minimum luma distance between text color and mean background color.
    double min_contrast = 60.0;
    bool flat_background = false;
    int distractor_count = 0;
    DistractorPlacement distractor_placement = DistractorPlacement::Random;
    Layout layout = Layout::SingleLine;

    void validate() const;
};

struct SynthScene {
    Raster image;
    SceneAnnotation annotation;
    Raster plate; ///< background with distractors, before text was drawn
};

/// Pure function of `spec`. Throws ValidationError("layout overflow ...") when the
/// drawn glyphs cannot fit.
SynthScene synth_scene(const SynthSpec& spec);

/// Missing keys keep their defaults; unknown keys are rejected.
SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);

} // namespace magniglyph
