#include "magniglyph/annotations.hpp"

#include "magniglyph/errors.hpp"
#include "magniglyph/imaging.hpp"
#include "magniglyph/png_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

namespace magniglyph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string where(const std::string& image_id, std::optional<std::size_t> char_index) {
    std::string s = "image '" + image_id + "'";
    if (char_index) {
        s += " char " + std::to_string(*char_index);
    }
    return s;
}

[[noreturn]] void fail(const std::string& image_id, std::optional<std::size_t> char_index,
                       const std::string& what) {
    throw ValidationError(where(image_id, char_index) + ": " + what);
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

template <class T>
T field(const json& obj, const char* key, const std::string& image_id,
        std::optional<std::size_t> char_index) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(image_id, char_index, std::string("missing key '") + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(image_id, char_index, std::string("key '") + key + "' has the wrong type");
    }
}

std::string mask_file_name(const std::string& image_id, std::size_t k) {
    std::string stem = image_id;
    std::replace_if(stem.begin(), stem.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
    return "masks/" + stem + "_" + std::to_string(k) + ".png";
}

} // namespace

void validate(const SceneAnnotation& scene) {
    const auto& id = scene.image_id;
    if (scene.image_size.width < 1 || scene.image_size.height < 1) {
        fail(id, std::nullopt, "image size must be positive");
    }
    for (std::size_t k = 0; k < scene.characters.size(); ++k) {
        const auto& ch = scene.characters[k];
        if (ch.bbox.empty()) {
            fail(id, k, "bbox is empty");
        }
        if (!ch.bbox.inside(scene.image_size)) {
            fail(id, k, "bbox lies outside the image");
        }
        if (ch.mask.size() != ch.bbox.size()) {
            fail(id, k, "mask is " + std::to_string(ch.mask.width()) + "x" +
                            std::to_string(ch.mask.height()) + " but bbox is " +
                            std::to_string(ch.bbox.width()) + "x" +
                            std::to_string(ch.bbox.height()));
        }
        if (!ch.mask.any()) {
            fail(id, k, "mask is empty");
        }
        if (ch.label && utf8_length(*ch.label) != 1) {
            fail(id, k, "label must be a single character");
        }
    }
}

std::vector<SceneAnnotation> parse_annotations(std::string_view document, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("annotation document is not valid JSON: ") + e.what());
    }
    if (!root.is_array()) {
        throw ValidationError("annotation document must be a JSON list");
    }

    std::vector<SceneAnnotation> scenes;
    scenes.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& rec = root[i];
        if (!rec.is_object() || !rec.contains("image_id") || !rec["image_id"].is_string()) {
            throw ValidationError("record " + std::to_string(i) + ": missing string 'image_id'");
        }
        SceneAnnotation scene;
        scene.image_id = rec["image_id"].get<std::string>();
        scene.image_path = field<std::string>(rec, "image", scene.image_id, std::nullopt);
        const auto size = field<std::vector<int>>(rec, "size", scene.image_id, std::nullopt);
        if (size.size() != 2) {
            fail(scene.image_id, std::nullopt, "'size' must be [width, height]");
        }
        scene.image_size = {size[0], size[1]};

        const auto chars = field<json>(rec, "chars", scene.image_id, std::nullopt);
        if (!chars.is_array()) {
            fail(scene.image_id, std::nullopt, "'chars' must be a list");
        }
        for (std::size_t k = 0; k < chars.size(); ++k) {
            const json& c = chars[k];
            CharAnnotation ch;
            if (!c.is_object() || !c.contains("label")) {
                fail(scene.image_id, k, "missing key 'label'");
            }
            if (c["label"].is_string()) {
                ch.label = c["label"].get<std::string>();
            } else if (!c["label"].is_null()) {
                fail(scene.image_id, k, "'label' must be a string or null");
            }
            const auto box = field<std::vector<int>>(c, "bbox", scene.image_id, k);
            if (box.size() != 4) {
                fail(scene.image_id, k, "'bbox' must be [x0, y0, x1, y1]");
            }
            ch.bbox = {box[0], box[1], box[2], box[3]};
            if (ch.bbox.empty()) {
                fail(scene.image_id, k, "bbox is empty");
            }
            if (!ch.bbox.inside(scene.image_size)) {
                fail(scene.image_id, k, "bbox lies outside the image");
            }
            const auto mask_rel = field<std::string>(c, "mask", scene.image_id, k);
            try {
                ch.mask = read_mask_png(base_dir / mask_rel);
            } catch (const IoError& e) {
                throw IoError(where(scene.image_id, k) + ": " + e.what());
            }
            scene.characters.push_back(std::move(ch));
        }
        validate(scene);
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

std::vector<SceneAnnotation> load_annotations(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open annotation document " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_annotations(ss.str(), path.parent_path());
}

void save_annotations(const fs::path& path, const std::vector<SceneAnnotation>& scenes) {
    const fs::path dir = path.parent_path();
    json root = json::array();
    for (const auto& scene : scenes) {
        validate(scene);
        json chars = json::array();
        for (std::size_t k = 0; k < scene.characters.size(); ++k) {
            const auto& ch = scene.characters[k];
            const std::string rel = mask_file_name(scene.image_id, k);
            fs::create_directories((dir / rel).parent_path());
            write_mask_png(dir / rel, ch.mask);
            chars.push_back({{"label", ch.label ? json(*ch.label) : json(nullptr)},
                             {"bbox", {ch.bbox.x0, ch.bbox.y0, ch.bbox.x1, ch.bbox.y1}},
                             {"mask", rel}});
        }
        root.push_back({{"image_id", scene.image_id},
                        {"image", scene.image_path},
                        {"size", {scene.image_size.width, scene.image_size.height}},
                        {"chars", chars}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write annotation document " + path.string());
    }
    out << root.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Mask union_mask(const SceneAnnotation& ann) {
    Mask out(ann.image_size.width, ann.image_size.height);
    for (const auto& ch : ann.characters) {
        for (int y = 0; y < ch.bbox.height(); ++y) {
            for (int x = 0; x < ch.bbox.width(); ++x) {
                if (ch.mask.get(x, y)) {
                    out.set(ch.bbox.x0 + x, ch.bbox.y0 + y, true);
                }
            }
        }
    }
    return out;
}

Components extract_components(const Raster& image, const SceneAnnotation& ann) {
    if (image.size() != ann.image_size) {
        throw ValidationError(where(ann.image_id, std::nullopt) +
                              ": annotation size does not match the image");
    }
    Components out{Raster(image.width(), image.height()), union_mask(ann)};
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            if (out.mask.get(x, y)) {
                out.image.at(x, y) = image.at(x, y);
            }
        }
    }
    return out;
}

std::vector<std::size_t> order_components(const SceneAnnotation& ann) {
    const auto& chars = ann.characters;
    std::vector<std::size_t> order(chars.size());
    std::iota(order.begin(), order.end(), 0);
    if (chars.size() < 2) {
        return order;
    }

    std::vector<int> heights;
    heights.reserve(chars.size());
    for (const auto& ch : chars) {
        heights.push_back(ch.bbox.height());
    }
    std::sort(heights.begin(), heights.end());
    const std::size_t n = heights.size();
    const double median =
        n % 2 == 1 ? heights[n / 2] : (heights[n / 2 - 1] + heights[n / 2]) / 2.0;

    auto band = [&](const CharAnnotation& ch) {
        return static_cast<long long>(std::floor(ch.bbox.center_y() / median));
    };
    // Everything after the top edge only breaks ties between otherwise equal
    // boxes, so the result does not depend on the input order.
    auto key = [&](std::size_t i) {
        const auto& ch = chars[i];
        return std::tuple<long long, int, int, int, int, const Mask&,
                          const std::optional<std::string>&>(band(ch), ch.bbox.x0, ch.bbox.y0,
                                                             ch.bbox.x1, ch.bbox.y1, ch.mask,
                                                             ch.label);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    return order;
}

} // namespace magniglyph
