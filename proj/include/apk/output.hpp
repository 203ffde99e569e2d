#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apk {

/// Shortest decimal text that reads back to the same double ("inf", "-inf",
/// "nan" for non-finite values).
std::string format_double(double value);

/// Comma-free list "a;b;c" used for list-valued config keys in manifests.
std::string format_list(std::span<const double> values);

/**
 * RFC 4180 style CSV writer (CRLF-free: plain '\n' line ends). An optional
 * metadata comment goes on the first line, prefixed by '#'. Text cells are
 * quoted when they contain a comma, quote or newline.
 */
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::string& comment = "");

    void row(std::span<const double> values);
    void row(const std::vector<std::string>& cells);

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
};

std::string csv_escape(const std::string& cell);

/// "key = value" lines, one per entry.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

/// Creates the directory (and parents) or throws IoError.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace apk
