#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace logtriage::csv {

// Quote a field if it contains a comma, quote, or newline; embedded quotes
// are doubled per the usual CSV convention.
std::string escape(std::string_view field);

// Join fields into one CSV record (no trailing newline).
std::string join(const std::vector<std::string>& fields);

// Split one CSV record into fields, honouring quotes. Throws
// std::invalid_argument on an unterminated quoted field.
std::vector<std::string> split_line(std::string_view line);

} // namespace logtriage::csv
