#include "embeval/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "embeval/error.hpp"

namespace embeval::csv {

namespace {

[[noreturn]] void fail(const std::string& path, long long line, const std::string& what) {
    throw InputError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    Table table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    long long line = 1;
    long long record_line = 1;
    bool any_char_in_record = false;

    auto end_record = [&] {
        record.push_back(field);
        field.clear();
        if (table.header.empty()) {
            table.header = record;
        } else {
            if (record.size() != table.header.size())
                fail(path, record_line,
                     "wrong column count (got " + std::to_string(record.size()) + ", expected " +
                         std::to_string(table.header.size()) + ")");
            table.rows.push_back(record);
            table.row_lines.push_back(record_line);
        }
        record.clear();
        any_char_in_record = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            any_char_in_record = true;
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                any_char_in_record = true;
                break;
            case ',':
                record.push_back(field);
                field.clear();
                any_char_in_record = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any_char_in_record || !record.empty() || !field.empty()) end_record();
                ++line;
                record_line = line;
                break;
            default:
                field += c;
                any_char_in_record = true;
                break;
        }
    }
    if (in_quotes) fail(path, record_line, "unterminated quoted field");
    if (any_char_in_record || !record.empty() || !field.empty()) end_record();

    if (table.header.empty()) throw InputError(path + ": empty file");
    return table;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n\r") != std::string::npos) {
            out << '"';
            for (char c : f) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + text.size();
}

}  // namespace embeval::csv
