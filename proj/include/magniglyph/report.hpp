#pragma once

#include "magniglyph/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace magniglyph {

nlohmann::json to_json(const EvalReport& report);

/// Flat rows: image_id,char_index,x0,y0,x1,y1,ssim
std::string to_csv(const EvalReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Fixed three-decimal rendering used on the console.
std::string format_score(std::optional<double> score);

} // namespace magniglyph
