#pragma once

#include "magniglyph/annotations.hpp"
#include "magniglyph/raster.hpp"

#include <array>

namespace magniglyph {

struct InpaintConfig {
    int max_iterations = 2000;
    /// Converged once no channel of any hole pixel moves more than this in one sweep.
    double tolerance = 0.05;
    /// Pixels to grow the text mask by before filling.
    int dilation_radius = 1;

    void validate() const;
};

/// Real-valued fill before rounding; one plane per channel.
struct DiffusionField {
    std::array<Plane, 3> channels;
    int sweeps = 0;
};

/// Harmonic fill of `hole` by Jacobi sweeps of the 4-neighbour average with
/// the non-hole pixels held fixed. Neighbours outside the image are skipped.
DiffusionField diffuse(const Raster& image, const Mask& hole, const InpaintConfig& cfg);

/// Fills `hole` exactly as given (no dilation) and rounds; pixels outside
/// the hole are copied verbatim.
Raster inpaint(const Raster& image, const Mask& hole, const InpaintConfig& cfg);

/// The hole erase_text fills: the union of character masks dilated by cfg.dilation_radius.
Mask erase_region(const SceneAnnotation& ann, const InpaintConfig& cfg);

Raster erase_text(const Raster& image, const SceneAnnotation& ann, const InpaintConfig& cfg);

} // namespace magniglyph
