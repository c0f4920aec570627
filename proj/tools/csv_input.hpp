#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixsep::cli {

/// Bad user input; the command exits with status 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads one numeric column from a CSV file. `column` is a header name, a
/// 0-based index, or empty for the first column. A first line that does not
/// parse as a number is taken as the header.
std::vector<double> read_numeric_column(const std::filesystem::path& path, const std::string& column = {});

/// Writes `text` to `path`, or to stdout when path is "-" or empty.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mixsep::cli
