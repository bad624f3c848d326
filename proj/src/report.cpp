#include "magniglyph/report.hpp"

#include "magniglyph/errors.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>

namespace magniglyph {

using nlohmann::json;

namespace {

json optional_number(std::optional<double> v) {
    return v ? json(*v) : json(nullptr);
}

std::string shortest(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

json to_json(const EvalReport& report) {
    json images = json::array();
    for (const auto& img : report.per_image) {
        json chars = json::array();
        for (const auto& c : img.chars) {
            chars.push_back({{"char_index", c.char_index},
                             {"region", {c.region.x0, c.region.y0, c.region.x1, c.region.y1}},
                             {"ssim", c.ssim}});
        }
        images.push_back({{"image_id", img.image_id}, {"chars", chars}, {"mean", optional_number(img.mean)}});
    }
    json mean_per_image = json::array();
    for (const auto& img : report.per_image) mean_per_image.push_back(optional_number(img.mean));
    return {{"per_image", images},
            {"mean_per_image", mean_per_image},
            {"grand_mean", optional_number(report.grand_mean)},
            {"mean_of_image_means", optional_number(report.mean_of_image_means)},
            {"region_count", report.region_count}};
}

std::string to_csv(const EvalReport& report) {
    std::string out = "image_id,char_index,x0,y0,x1,y1,ssim\n";
    for (const auto& img : report.per_image) {
        for (const auto& c : img.chars) {
            out += csv_field(img.image_id) + ',' + std::to_string(c.char_index) + ',' +
                   std::to_string(c.region.x0) + ',' + std::to_string(c.region.y0) + ',' +
                   std::to_string(c.region.x1) + ',' + std::to_string(c.region.y1) + ',' +
                   shortest(c.ssim) + '\n';
        }
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

std::string format_score(std::optional<double> score) {
    if (!score) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *score);
    return buf;
}

} // namespace magniglyph
