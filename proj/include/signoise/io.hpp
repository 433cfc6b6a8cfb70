#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace signoise::io {

/// One parsed CSV record together with the physical line it started on.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source_name);

  /// Next record, or nullopt at end of input. Throws ParseError on an
  /// unterminated quote.
  std::optional<CsvRecord> next();

  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 1;
};

/// Header-name → column-index lookup with an optional rename map
/// (schema field → column name in the file).
class CsvHeader {
 public:
  CsvHeader(const CsvRecord& header, const std::map<std::string, std::string>& field_map);

  std::optional<std::size_t> find(std::string_view field) const;
  std::size_t require(std::string_view field, const std::string& source) const;
  std::size_t width() const { return width_; }

 private:
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::string, std::less<>> field_map_;
  std::size_t width_ = 0;
};

/// Strict decimal/scientific parse; no trailing characters allowed.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

/// Quote a CSV field if it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Writes `content` to `path` through a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Reads a `field=column` mapping file (blank lines and '#' comments ignored).
std::map<std::string, std::string> read_field_map(const std::filesystem::path& path);

}  // namespace signoise::io
