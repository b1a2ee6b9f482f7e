#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace embeval::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // Physical line each data row started on (1-based; header is line 1).
    std::vector<long long> row_lines;
};

// RFC-4180-ish: comma separated, double quotes escape commas/quotes/newlines.
// Every record must have the same field count as the header.
Table read_csv(const std::string& path);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// %.17g - enough digits that reading the text back yields the same double.
std::string format_double(double value);

// Full-string double parse; returns false on trailing junk or empty input.
bool parse_double(const std::string& text, double& out);

}  // namespace embeval::csv
