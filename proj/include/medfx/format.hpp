#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace medfx {

/// Locale-independent rendering with 12 significant digits. NaN renders as
/// "NA" and infinities as "Inf"/"-Inf".
std::string format_number(double value);

/// Quotes a CSV cell only when it contains a separator, quote or newline.
std::string csv_escape(const std::string &cell);

void write_csv_row(std::ostream &out, const std::vector<std::string> &cells);

/// Splits one CSV line honoring double-quoted cells.
std::vector<std::string> split_csv_line(const std::string &line);

} // namespace medfx
