#pragma once

#include "magniglyph/raster.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magniglyph {

/// One character component: a bounding box in image coordinates and a
/// pixel mask cropped to that box.
struct CharAnnotation {
    std::optional<std::string> label;
    Rect bbox;
    Mask mask;

    friend bool operator==(const CharAnnotation&, const CharAnnotation&) = default;
};

struct SceneAnnotation {
    std::string image_id;
    std::string image_path; ///< relative to the annotation document; may be empty in memory
    Size image_size;
    std::vector<CharAnnotation> characters;

    friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

/// Parses an annotation document. Mask paths resolve against `base_dir`.
/// Throws ValidationError for schema or invariant violations and IoError for
/// unreadable mask files; messages name the image_id and character index.
std::vector<SceneAnnotation> parse_annotations(std::string_view document,
                                               const std::filesystem::path& base_dir);
std::vector<SceneAnnotation> load_annotations(const std::filesystem::path& path);

/// Writes the document to `path` and every character mask next to it under
/// `masks/<image_id>_<k>.png`. Inverse of load_annotations.
void save_annotations(const std::filesystem::path& path, const std::vector<SceneAnnotation>& scenes);

/// Throws ValidationError if any invariant of `scene` is broken.
void validate(const SceneAnnotation& scene);

struct Components {
    Raster image; ///< original colors at character pixels, black elsewhere
    Mask mask;    ///< union of all character masks
};

Components extract_components(const Raster& image, const SceneAnnotation& ann);

/// Union of character masks placed at their boxes, in image coordinates.
Mask union_mask(const SceneAnnotation& ann);

/// Reading order for horizontal layouts: line band (vertical center divided by
/// the median character height), then left edge, then top edge.
std::vector<std::size_t> order_components(const SceneAnnotation& ann);

} // namespace magniglyph
