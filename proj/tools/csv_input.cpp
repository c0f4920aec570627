#include "csv_input.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace mixsep::cli {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    if (*first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::vector<double> read_numeric_column(const std::filesystem::path& path, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");

    std::vector<double> out;
    std::optional<std::size_t> index;
    if (column.empty()) index = 0;
    else if (auto v = parse_number(column); v && *v >= 0 && std::floor(*v) == *v) index = static_cast<std::size_t>(*v);

    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_fields(line);

        if (!seen_content) {
            seen_content = true;
            if (!index) {
                for (std::size_t i = 0; i < fields.size(); ++i)
                    if (fields[i] == column) index = i;
                if (!index) throw InputError("column '" + column + "' not found in header of '" + path.string() + "'");
                continue;
            }
            if (*index < fields.size() && !parse_number(fields[*index])) continue;  // header line
        }
        if (*index >= fields.size())
            throw InputError("line " + std::to_string(line_no) + ": missing column " + std::to_string(*index));
        const auto v = parse_number(fields[*index]);
        if (!v)
            throw InputError("line " + std::to_string(line_no) + ": non-numeric value '" + fields[*index] + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw InputError("no observations in '" + path.string() + "' (n = 0)");
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace mixsep::cli
