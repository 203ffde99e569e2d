#include "apk/output.hpp"

#include <charconv>
#include <cmath>

#include "apk/errors.hpp"

namespace apk {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_list(std::span<const double> values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) out += ';';
        out += format_double(values[k]);
    }
    return out;
}

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::string& comment)
    : path_(path), out_(path), columns_(header.size()) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    if (!comment.empty()) out_ << "# " << comment << '\n';
    row(header);
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw IoError("CSV row width does not match header in " + path_.string());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) out_ << ',';
        out_ << format_double(values[k]);
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw IoError("CSV row width does not match header in " + path_.string());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k > 0) out_ << ',';
        out_ << csv_escape(cells[k]);
    }
    out_ << '\n';
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace apk
