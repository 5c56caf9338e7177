#include "medfx/format.hpp"
#include "medfx/json_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace medfx {

std::string format_number(double value) {
    if (std::isnan(value))
        return "NA";
    if (std::isinf(value))
        return value > 0 ? "Inf" : "-Inf";
    if (value == 0.0)
        return "0";
    char buffer[64];
    const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 12);
    return std::string(buffer, res.ptr);
}

std::string csv_escape(const std::string &cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos)
        return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream &out, const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out << ',';
        out << csv_escape(cells[i]);
    }
    out << '\n';
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r' || i + 1 != line.size()) {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

} // namespace medfx

namespace medfx {

namespace {
constexpr std::string_view kNumberTag = "\x1fnum:";
}

nlohmann::ordered_json json_number(double value) {
    if (!std::isfinite(value))
        return nullptr;
    return std::string(kNumberTag) + format_number(value);
}

std::string render_json(const nlohmann::ordered_json &doc, int indent) {
    const std::string text = doc.dump(indent);
    const std::string tag = "\"\\u001fnum:";
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        const auto start = text.find(tag, pos);
        if (start == std::string::npos)
            break;
        const auto end = text.find('"', start + tag.size());
        out.append(text, pos, start - pos);
        out.append(text, start + tag.size(), end - start - tag.size());
        pos = end + 1;
    }
    out.append(text, pos, std::string::npos);
    return out;
}

} // namespace medfx
