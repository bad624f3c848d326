#include "magniglyph/metrics.hpp"

#include "magniglyph/errors.hpp"
#include "magniglyph/imaging.hpp"
#include "magniglyph/parallel.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace magniglyph {

namespace {

// Valid-mode separable correlation with symmetric taps.
Plane filter_valid(const Plane& src, const std::vector<double>& taps) {
    const int k = static_cast<int>(taps.size());
    const int ow = src.width - k + 1;
    const int oh = src.height - k + 1;
    Plane rows(ow, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += taps[i] * src.at(x + i, y);
            rows.at(x, y) = acc;
        }
    }
    Plane out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += taps[i] * rows.at(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

Plane product(const Plane& a, const Plane& b) {
    Plane out(a.width, a.height);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

double mean_of(const Plane& p) {
    return std::accumulate(p.values.begin(), p.values.end(), 0.0) / static_cast<double>(p.values.size());
}

// Grows [lo, hi) symmetrically to at least `want`, then slides it into [0, limit).
void expand_axis(int& lo, int& hi, int want, int limit) {
    const int have = hi - lo;
    if (have < want) {
        const int extra = want - have;
        lo -= extra / 2;
        hi += extra - extra / 2;
    }
    if (lo < 0) {
        hi -= lo;
        lo = 0;
    }
    if (hi > limit) {
        lo -= hi - limit;
        hi = limit;
    }
}

} // namespace

std::vector<double> SsimConfig::taps() const {
    if (window_size < 1 || !(sigma > 0.0)) {
        throw ValidationError("SSIM window must be positive");
    }
    std::vector<double> g(static_cast<std::size_t>(window_size));
    const double mid = (window_size - 1) / 2.0;
    for (int i = 0; i < window_size; ++i) {
        const double d = i - mid;
        g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    }
    const double sum = std::accumulate(g.begin(), g.end(), 0.0);
    for (double& v : g) v /= sum;
    return g;
}

Plane ssim_map(const Plane& a, const Plane& b, const SsimConfig& cfg) {
    if (a.width != b.width || a.height != b.height) {
        throw ValidationError("ssim_map: planes differ in size");
    }
    if (a.width < cfg.window_size || a.height < cfg.window_size) {
        throw ValidationError("ssim_map: image " + std::to_string(a.width) + "x" +
                              std::to_string(a.height) + " is smaller than the " +
                              std::to_string(cfg.window_size) + "x" +
                              std::to_string(cfg.window_size) + " window");
    }
    const auto taps = cfg.taps();
    const Plane mu_a = filter_valid(a, taps);
    const Plane mu_b = filter_valid(b, taps);
    const Plane e_aa = filter_valid(product(a, a), taps);
    const Plane e_bb = filter_valid(product(b, b), taps);
    const Plane e_ab = filter_valid(product(a, b), taps);

    const double c1 = cfg.c1();
    const double c2 = cfg.c2();
    Plane out(mu_a.width, mu_a.height);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double ma = mu_a.values[i];
        const double mb = mu_b.values[i];
        const double var_a = e_aa.values[i] - ma * ma;
        const double var_b = e_bb.values[i] - mb * mb;
        const double cov = e_ab.values[i] - ma * mb;
        out.values[i] = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                        ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return out;
}

double mssim(const Plane& a, const Plane& b, const SsimConfig& cfg) {
    return mean_of(ssim_map(a, b, cfg));
}

double mssim(const Raster& a, const Raster& b, const SsimConfig& cfg) {
    if (a.size() != b.size()) {
        throw ValidationError("mssim: images differ in size");
    }
    return mssim(to_luma(a), to_luma(b), cfg);
}

Rect measurement_region(const Rect& region, Size image, const SsimConfig& cfg) {
    Rect r = region.intersect({0, 0, image.width, image.height});
    if (r.empty()) {
        throw ValidationError("SSIM region lies outside the image");
    }
    if (image.width < cfg.window_size || image.height < cfg.window_size) {
        throw ValidationError("SSIM region cannot reach the " + std::to_string(cfg.window_size) +
                              "x" + std::to_string(cfg.window_size) + " window inside a " +
                              std::to_string(image.width) + "x" + std::to_string(image.height) +
                              " image");
    }
    expand_axis(r.x0, r.x1, cfg.window_size, image.width);
    expand_axis(r.y0, r.y1, cfg.window_size, image.height);
    return r;
}

double regional_ssim(const Raster& a, const Raster& b, const Rect& region, const SsimConfig& cfg) {
    if (a.size() != b.size()) {
        throw ValidationError("regional_ssim: images differ in size");
    }
    const Rect r = measurement_region(region, a.size(), cfg);
    return mssim(crop(a, r), crop(b, r), cfg);
}

EvalReport evaluate(std::span<const EvalItem> items, const SsimConfig& cfg, int jobs) {
    for (const auto& item : items) {
        if (item.pred.size() != item.gt.size()) {
            throw ValidationError("image '" + item.image_id + "': prediction is " +
                                  std::to_string(item.pred.width()) + "x" +
                                  std::to_string(item.pred.height()) + " but ground truth is " +
                                  std::to_string(item.gt.width()) + "x" +
                                  std::to_string(item.gt.height()));
        }
    }

    EvalReport report;
    report.per_image.resize(items.size());
    parallel_for(items.size(), jobs, [&](std::size_t i) {
        const EvalItem& item = items[i];
        ImageScores& scores = report.per_image[i];
        scores.image_id = item.image_id;
        for (std::size_t k = 0; k < item.regions.size(); ++k) {
            if (!item.regions[k]) continue;
            const Rect r = measurement_region(*item.regions[k], item.gt.size(), cfg);
            scores.chars.push_back({k, r, mssim(crop(item.pred, r), crop(item.gt, r), cfg)});
        }
        if (!scores.chars.empty()) {
            double sum = 0.0;
            for (const auto& c : scores.chars) sum += c.ssim;
            scores.mean = sum / static_cast<double>(scores.chars.size());
        }
    });

    double pooled = 0.0;
    double image_sum = 0.0;
    std::size_t images_with_regions = 0;
    for (const auto& scores : report.per_image) {
        for (const auto& c : scores.chars) pooled += c.ssim;
        report.region_count += scores.chars.size();
        if (scores.mean) {
            image_sum += *scores.mean;
            ++images_with_regions;
        }
    }
    if (report.region_count > 0) {
        report.grand_mean = pooled / static_cast<double>(report.region_count);
        report.mean_of_image_means = image_sum / static_cast<double>(images_with_regions);
    }
    return report;
}

} // namespace magniglyph
