#include "magniglyph/dataset.hpp"

#include "magniglyph/errors.hpp"
#include "magniglyph/imaging.hpp"
#include "magniglyph/parallel.hpp"
#include "magniglyph/png_io.hpp"
#include "magniglyph/report.hpp"
#include "magniglyph/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace magniglyph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json rect_json(const Rect& r) { return {r.x0, r.y0, r.x1, r.y1}; }

Rect rect_from(const json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 4) throw ValidationError("rectangle must be [x0, y0, x1, y1]");
    return {v[0], v[1], v[2], v[3]};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

[[noreturn]] void inconsistent(const SamplePack& pack, const std::string& what, int x = -1, int y = -1) {
    std::string msg = "pack '" + pack_id(pack.image_id, pack.rate) + "': " + what;
    if (x >= 0) msg += " at (" + std::to_string(x) + ", " + std::to_string(y) + ")";
    throw ValidationError(msg);
}

} // namespace

std::string pack_id(const std::string& image_id, double rate) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), rate);
    std::string id = image_id;
    std::replace_if(id.begin(), id.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
    return id + "_r" + std::string(buf.data(), res.ptr);
}

SamplePack generate_sample(const Raster& image, const SceneAnnotation& ann, double rate,
                           const MagnifyConfig& cfg) {
    if (cfg.strategy == Strategy::DetectionPaste) {
        throw ValidationError("training packs cannot use the detection-paste baseline");
    }
    MagnifyConfig effective = cfg;
    effective.rate = rate;
    MagnifiedScene scene = magnify_scene(image, ann, effective);

    SamplePack pack;
    pack.image_id = ann.image_id;
    pack.rate = rate;
    pack.strategy = cfg.strategy;
    pack.dilation_radius = cfg.inpaint.dilation_radius;
    pack.original = image;
    pack.erased = std::move(scene.erased);
    pack.component_image = std::move(scene.components.image);
    pack.component_mask = std::move(scene.components.mask);
    pack.magnified_component_image = std::move(scene.magnified_components);
    pack.magnified_mask = std::move(scene.magnified_union_mask);
    pack.magnified_scene = std::move(scene.image);
    pack.annotation = ann;
    pack.placements = std::move(scene.per_char);
    return pack;
}

void check_pack(const SamplePack& pack) {
    const Size size = pack.original.size();
    for (const Size s : {pack.erased.size(), pack.component_image.size(), pack.component_mask.size(),
                         pack.magnified_component_image.size(), pack.magnified_mask.size(),
                         pack.magnified_scene.size()}) {
        if (s != size) inconsistent(pack, "images differ in size");
    }
    if (pack.plate && pack.plate->size() != size) inconsistent(pack, "plate differs in size");
    if (pack.annotation.image_size != size) inconsistent(pack, "annotation size differs from images");
    if (pack.placements.size() != pack.annotation.characters.size()) {
        inconsistent(pack, "placement count differs from character count");
    }
    if (union_mask(pack.annotation) != pack.component_mask) {
        inconsistent(pack, "component mask is not the union of character masks");
    }

    const Mask erased_region = dilate(pack.component_mask, pack.dilation_radius);
    for (int y = 0; y < size.height; ++y) {
        for (int x = 0; x < size.width; ++x) {
            const bool text = pack.component_mask.get(x, y);
            const Rgb& orig = pack.original.at(x, y);
            if (pack.component_image.at(x, y) != (text ? orig : kBlack)) {
                inconsistent(pack, "component image pixel mismatch", x, y);
            }
            if (!erased_region.get(x, y) && pack.erased.at(x, y) != orig) {
                inconsistent(pack, "erased image changed a pixel outside the erased region", x, y);
            }
            const Rgb& expected = pack.magnified_mask.get(x, y) ? pack.magnified_component_image.at(x, y)
                                  : text                         ? pack.erased.at(x, y)
                                                                 : orig;
            if (pack.magnified_scene.at(x, y) != expected) {
                inconsistent(pack, "magnified scene does not match its composition", x, y);
            }
        }
    }
}

void write_pack(const fs::path& dir, const SamplePack& pack) {
    fs::create_directories(dir);
    write_png(dir / "original.png", pack.original);
    write_png(dir / "erased.png", pack.erased);
    write_png(dir / "component.png", pack.component_image);
    write_mask_png(dir / "component_mask.png", pack.component_mask);
    write_png(dir / "mag_component.png", pack.magnified_component_image);
    write_mask_png(dir / "mag_mask.png", pack.magnified_mask);
    write_png(dir / "magnified.png", pack.magnified_scene);
    if (pack.plate) write_png(dir / "plate.png", *pack.plate);

    SceneAnnotation ann = pack.annotation;
    ann.image_path = "original.png";
    save_annotations(dir / "annotation.json", {ann});

    json chars = json::array();
    for (std::size_t k = 0; k < pack.placements.size(); ++k) {
        const auto& p = pack.placements[k];
        chars.push_back({{"bbox", rect_json(p.original)},
                         {"magnified_bbox", rect_json(p.target)},
                         {"magnified_bbox_clipped", p.clipped ? rect_json(*p.clipped) : json(nullptr)},
                         {"scaled_pixels", p.scaled_pixels},
                         {"visible_pixels", p.visible_pixels}});
    }
    const json meta = {{"image_id", pack.image_id},
                       {"rate", pack.rate},
                       {"strategy", std::string(to_string(pack.strategy))},
                       {"dilation_radius", pack.dilation_radius},
                       {"has_plate", pack.plate.has_value()},
                       {"chars", chars}};
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

SamplePack read_pack(const fs::path& dir) {
    const json meta = parse_json_file(dir / "meta.json");
    SamplePack pack;
    try {
        pack.image_id = meta.at("image_id").get<std::string>();
        pack.rate = meta.at("rate").get<double>();
        pack.strategy = parse_strategy(meta.at("strategy").get<std::string>());
        pack.dilation_radius = meta.at("dilation_radius").get<int>();
        for (const auto& c : meta.at("chars")) {
            CharPlacement p;
            p.original = rect_from(c.at("bbox"));
            p.target = rect_from(c.at("magnified_bbox"));
            if (!c.at("magnified_bbox_clipped").is_null()) p.clipped = rect_from(c.at("magnified_bbox_clipped"));
            p.scaled_pixels = c.at("scaled_pixels").get<std::size_t>();
            p.visible_pixels = c.at("visible_pixels").get<std::size_t>();
            pack.placements.push_back(p);
        }
        if (meta.at("has_plate").get<bool>()) pack.plate = read_png(dir / "plate.png");
    } catch (const json::exception& e) {
        throw ValidationError((dir / "meta.json").string() + ": " + e.what());
    }
    pack.original = read_png(dir / "original.png");
    pack.erased = read_png(dir / "erased.png");
    pack.component_image = read_png(dir / "component.png");
    pack.component_mask = read_mask_png(dir / "component_mask.png");
    pack.magnified_component_image = read_png(dir / "mag_component.png");
    pack.magnified_mask = read_mask_png(dir / "mag_mask.png");
    pack.magnified_scene = read_png(dir / "magnified.png");

    auto scenes = load_annotations(dir / "annotation.json");
    if (scenes.size() != 1) throw ValidationError((dir / "annotation.json").string() + ": expected one record");
    pack.annotation = std::move(scenes.front());
    return pack;
}

std::vector<bool> train_split(std::size_t image_count, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
        throw ValidationError("train fraction must lie in [0, 1]");
    }
    std::vector<std::size_t> perm(image_count);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = image_count; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(perm[i - 1], perm[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(image_count)));
    std::vector<bool> train(image_count, false);
    for (std::size_t i = 0; i < n_train; ++i) train[perm[i]] = true;
    return train;
}

std::vector<ManifestEntry> generate_dataset(std::span<const CorpusEntry> corpus, const DatasetOptions& options,
                                            const fs::path& out_dir) {
    if (corpus.empty()) throw ValidationError("dataset corpus is empty");
    if (options.rates.empty()) throw ValidationError("at least one magnification rate is required");
    for (double r : options.rates) {
        if (!(r > 0.0)) throw ValidationError("magnification rates must be positive");
    }
    options.magnify.validate();
    const auto train = train_split(corpus.size(), options.train_fraction, options.seed);

    std::vector<ManifestEntry> manifest;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (double rate : options.rates) {
            const auto& id = corpus[i].annotation.image_id;
            manifest.push_back({pack_id(id, rate), id, rate, train[i] ? "train" : "test"});
        }
    }
    {
        auto dirs = std::vector<std::string>();
        for (const auto& m : manifest) dirs.push_back(m.dir);
        std::sort(dirs.begin(), dirs.end());
        if (std::adjacent_find(dirs.begin(), dirs.end()) != dirs.end()) {
            throw ValidationError("duplicate image_id/rate pair in corpus");
        }
    }

    fs::create_directories(out_dir);
    const std::size_t n_rates = options.rates.size();
    parallel_for(manifest.size(), options.jobs, [&](std::size_t k) {
        const CorpusEntry& entry = corpus[k / n_rates];
        SamplePack pack = generate_sample(entry.image, entry.annotation, manifest[k].rate, options.magnify);
        pack.plate = entry.plate;
        write_pack(out_dir / manifest[k].dir, pack);
    });

    json doc = json::array();
    for (const auto& m : manifest) {
        doc.push_back({{"dir", m.dir}, {"image_id", m.image_id}, {"rate", m.rate}, {"split", m.split}});
    }
    write_text_file(out_dir / "manifest.json", doc.dump(2) + "\n");
    return manifest;
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest_path) {
    const json doc = parse_json_file(manifest_path);
    std::vector<ManifestEntry> out;
    try {
        for (const auto& e : doc) {
            out.push_back({e.at("dir").get<std::string>(), e.at("image_id").get<std::string>(),
                           e.at("rate").get<double>(), e.at("split").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw ValidationError(manifest_path.string() + ": " + e.what());
    }
    return out;
}

} // namespace magniglyph
