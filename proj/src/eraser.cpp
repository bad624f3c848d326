#include "magniglyph/eraser.hpp"

#include "magniglyph/errors.hpp"
#include "magniglyph/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace magniglyph {

namespace {

struct HoleGraph {
    std::vector<std::size_t> pixels;     // linear indices of hole pixels
    std::vector<std::size_t> nbr_start;  // CSR offsets into nbrs, size pixels+1
    std::vector<std::size_t> nbrs;       // in-bounds 4-neighbour linear indices
};

HoleGraph build_graph(const Mask& hole) {
    HoleGraph g;
    const int w = hole.width();
    const int h = hole.height();
    g.nbr_start.push_back(0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!hole.get(x, y)) {
                continue;
            }
            g.pixels.push_back(static_cast<std::size_t>(y) * w + x);
            if (x > 0) g.nbrs.push_back(static_cast<std::size_t>(y) * w + x - 1);
            if (x + 1 < w) g.nbrs.push_back(static_cast<std::size_t>(y) * w + x + 1);
            if (y > 0) g.nbrs.push_back(static_cast<std::size_t>(y - 1) * w + x);
            if (y + 1 < h) g.nbrs.push_back(static_cast<std::size_t>(y + 1) * w + x);
            g.nbr_start.push_back(g.nbrs.size());
        }
    }
    return g;
}

// Seeds hole pixels layer by layer from the outside in, each layer averaging
// the neighbours known after the previous layer. Order-independent.
void onion_seed(const HoleGraph& g, std::vector<std::uint8_t>& known,
                std::array<std::vector<double>, 3>& v) {
    std::vector<std::size_t> pending(g.pixels.size());
    for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = i;

    while (!pending.empty()) {
        std::vector<std::size_t> layer;
        std::vector<std::array<double, 3>> values;
        std::vector<std::size_t> rest;
        for (std::size_t i : pending) {
            std::array<double, 3> sum{};
            int count = 0;
            for (std::size_t k = g.nbr_start[i]; k < g.nbr_start[i + 1]; ++k) {
                const std::size_t n = g.nbrs[k];
                if (known[n]) {
                    for (int c = 0; c < 3; ++c) sum[c] += v[c][n];
                    ++count;
                }
            }
            if (count == 0) {
                rest.push_back(i);
                continue;
            }
            layer.push_back(i);
            values.push_back({sum[0] / count, sum[1] / count, sum[2] / count});
        }
        for (std::size_t j = 0; j < layer.size(); ++j) {
            const std::size_t p = g.pixels[layer[j]];
            for (int c = 0; c < 3; ++c) v[c][p] = values[j][c];
            known[p] = 1;
        }
        pending.swap(rest);
    }
}

} // namespace

void InpaintConfig::validate() const {
    if (max_iterations < 1) {
        throw ValidationError("inpaint max_iterations must be >= 1");
    }
    if (!(tolerance >= 0.0)) {
        throw ValidationError("inpaint tolerance must be >= 0");
    }
    if (dilation_radius < 0) {
        throw ValidationError("inpaint dilation_radius must be >= 0");
    }
}

DiffusionField diffuse(const Raster& image, const Mask& hole, const InpaintConfig& cfg) {
    cfg.validate();
    if (image.size() != hole.size()) {
        throw ValidationError("inpaint: image is " + std::to_string(image.width()) + "x" +
                              std::to_string(image.height()) + " but hole mask is " +
                              std::to_string(hole.width()) + "x" + std::to_string(hole.height()));
    }
    if (hole.all()) {
        throw ValidationError("mask covers entire image");
    }

    const std::size_t n = image.pixels().size();
    std::array<std::vector<double>, 3> cur;
    for (int c = 0; c < 3; ++c) cur[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Rgb& p = image.pixels()[i];
        cur[0][i] = p.r;
        cur[1][i] = p.g;
        cur[2][i] = p.b;
    }

    DiffusionField field;
    const HoleGraph g = build_graph(hole);
    if (!g.pixels.empty()) {
        std::vector<std::uint8_t> known(n);
        for (std::size_t i = 0; i < n; ++i) known[i] = hole.bits()[i] ? 0 : 1;
        onion_seed(g, known, cur);

        auto next = cur;
        for (int it = 0; it < cfg.max_iterations; ++it) {
            double max_change = 0.0;
            for (std::size_t i = 0; i < g.pixels.size(); ++i) {
                const std::size_t p = g.pixels[i];
                const std::size_t b = g.nbr_start[i];
                const std::size_t e = g.nbr_start[i + 1];
                const double inv = 1.0 / static_cast<double>(e - b);
                for (int c = 0; c < 3; ++c) {
                    double sum = 0.0;
                    for (std::size_t k = b; k < e; ++k) sum += cur[c][g.nbrs[k]];
                    const double value = sum * inv;
                    max_change = std::max(max_change, std::abs(value - cur[c][p]));
                    next[c][p] = value;
                }
            }
            cur.swap(next);
            ++field.sweeps;
            if (max_change <= cfg.tolerance) {
                break;
            }
        }
    }

    for (int c = 0; c < 3; ++c) {
        field.channels[c] = Plane(image.width(), image.height());
        field.channels[c].values = std::move(cur[c]);
    }
    return field;
}

Raster inpaint(const Raster& image, const Mask& hole, const InpaintConfig& cfg) {
    const DiffusionField field = diffuse(image, hole, cfg);
    Raster out = image;
    auto& px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (hole.bits()[i]) {
            px[i] = {to_channel(field.channels[0].values[i]), to_channel(field.channels[1].values[i]),
                     to_channel(field.channels[2].values[i])};
        }
    }
    return out;
}

Mask erase_region(const SceneAnnotation& ann, const InpaintConfig& cfg) {
    cfg.validate();
    return dilate(union_mask(ann), cfg.dilation_radius);
}

Raster erase_text(const Raster& image, const SceneAnnotation& ann, const InpaintConfig& cfg) {
    if (image.size() != ann.image_size) {
        throw ValidationError("image '" + ann.image_id + "': annotation size does not match the image");
    }
    const Mask hole = erase_region(ann, cfg);
    if (!hole.any()) {
        return image;
    }
    return inpaint(image, hole, cfg);
}

} // namespace magniglyph
