#pragma once

#include "magniglyph/raster.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace magniglyph {

/// Gaussian-windowed SSIM constants.
struct SsimConfig {
    int window_size = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    std::vector<double> taps() const;
};

/// SSIM at every window position fully inside the planes (no padding). The
/// result is (W - window + 1) x (H - window + 1).
Plane ssim_map(const Plane& a, const Plane& b, const SsimConfig& cfg = {});

double mssim(const Plane& a, const Plane& b, const SsimConfig& cfg = {});
/// Mean SSIM of the luma planes.
double mssim(const Raster& a, const Raster& b, const SsimConfig& cfg = {});

/// The rectangle regional_ssim actually measures: `region` clipped to the image,
/// grown symmetrically to at least one window per axis, then shifted back inside.
Rect measurement_region(const Rect& region, Size image, const SsimConfig& cfg = {});

double regional_ssim(const Raster& a, const Raster& b, const Rect& region, const SsimConfig& cfg = {});

enum class RegionSource { Magnified, Original };
enum class Pooling { Pooled, PerImage };

struct EvalItem {
    std::string image_id;
    Raster pred;
    Raster gt;
    /// One entry per character; nullopt skips a character (e.g. pushed fully off-image).
    std::vector<std::optional<Rect>> regions;
};

struct CharScore {
    std::size_t char_index = 0;
    Rect region; ///< as measured
    double ssim = 0.0;
};

struct ImageScores {
    std::string image_id;
    std::vector<CharScore> chars;
    std::optional<double> mean;
};

struct EvalReport {
    std::vector<ImageScores> per_image;
    std::optional<double> grand_mean;         ///< pooled over all characters
    std::optional<double> mean_of_image_means; ///< images without regions excluded
    std::size_t region_count = 0;

    std::optional<double> headline(Pooling pooling) const {
        return pooling == Pooling::Pooled ? grand_mean : mean_of_image_means;
    }
};

/// Scores every region of every item. Throws ValidationError naming the image_id
/// on a pred/gt size mismatch. `jobs` only affects speed.
EvalReport evaluate(std::span<const EvalItem> items, const SsimConfig& cfg = {}, int jobs = 1);

} // namespace magniglyph
