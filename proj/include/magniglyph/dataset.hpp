#pragma once

#include "magniglyph/annotations.hpp"
#include "magniglyph/magnifier.hpp"
#include "magniglyph/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace magniglyph {

/// One training/evaluation unit for a single (image, rate) pair.
struct SamplePack {
    std::string image_id;
    double rate = 1.0;
    Strategy strategy = Strategy::ComponentCenter;
    int dilation_radius = 1;

    Raster original;
    Raster erased;
    Raster component_image;
    Mask component_mask;
    Raster magnified_component_image;
    Mask magnified_mask;
    Raster magnified_scene;
    std::optional<Raster> plate; ///< synthetic scenes only

    SceneAnnotation annotation;
    std::vector<CharPlacement> placements; ///< indexed like annotation.characters
};

SamplePack generate_sample(const Raster& image, const SceneAnnotation& ann, double rate,
                           const MagnifyConfig& cfg);

/// Re-derives the composite from the pack's own images and throws
/// ValidationError on the first inconsistency:
///   component_image = original on component_mask, black elsewhere;
///   erased = original outside component_mask dilated by dilation_radius;
///   magnified_scene = magnified_component_image on magnified_mask, else erased on
///   component_mask, else original.
void check_pack(const SamplePack& pack);

/// Layout: original.png erased.png component.png component_mask.png
/// mag_component.png mag_mask.png magnified.png meta.json, plus annotation.json
/// with masks/ (and plate.png when present).
void write_pack(const std::filesystem::path& dir, const SamplePack& pack);
SamplePack read_pack(const std::filesystem::path& dir);

/// "<image_id>_r<rate>", with path separators in the id replaced.
std::string pack_id(const std::string& image_id, double rate);

struct CorpusEntry {
    Raster image;
    SceneAnnotation annotation;
    std::optional<Raster> plate;
};

struct ManifestEntry {
    std::string dir; ///< relative to the manifest
    std::string image_id;
    double rate = 1.0;
    std::string split; ///< "train" or "test"

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetOptions {
    std::vector<double> rates{1.2, 1.5};
    double train_fraction = 0.9;
    std::uint64_t seed = 0;
    MagnifyConfig magnify;
    int jobs = 1;
};

/// Writes one pack per (image, rate) under `out_dir` plus `manifest.json`.
/// Images, not packs, are split: every rate of an image lands in the same split.
std::vector<ManifestEntry> generate_dataset(std::span<const CorpusEntry> corpus,
                                            const DatasetOptions& options,
                                            const std::filesystem::path& out_dir);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

/// Which corpus images go to training, as a seeded permutation prefix.
std::vector<bool> train_split(std::size_t image_count, double train_fraction, std::uint64_t seed);

} // namespace magniglyph
