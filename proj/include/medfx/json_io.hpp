#pragma once

#include <json.hpp>

#include <string>

namespace medfx {

/// Placeholder for a number rendered with format_number; render_json swaps it
/// for the bare digits. Non-finite values become null.
nlohmann::ordered_json json_number(double value);

/// dump() with every json_number placeholder replaced by its digits.
std::string render_json(const nlohmann::ordered_json &doc, int indent = -1);

} // namespace medfx
