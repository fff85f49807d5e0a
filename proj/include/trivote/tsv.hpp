#ifndef TRIVOTE_TSV_HPP
#define TRIVOTE_TSV_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trivote {

// Plain tab-separated values: no quoting, one record per line, optional
// trailing '\r' stripped. Fields must not contain tabs or newlines.
std::vector<std::string> split_tsv_line(std::string_view line);

class TsvReader {
 public:
  // Opens `path` and consumes the header row. Throws DataError when the file
  // cannot be opened or has no header.
  explicit TsvReader(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  // Index of a header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  // Throws DataError naming the file when the header is missing.
  std::size_t require_column(std::string_view name) const;

  // Reads the next non-empty row. Returns false at end of file. A row whose
  // field count differs from the header is a DataError.
  bool next(std::vector<std::string>& fields);
  // 1-based line number of the row most recently returned by next().
  std::size_t line_number() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_ = 0;
};

class TsvWriter {
 public:
  // Creates parent directories as needed. Throws DataError on failure.
  explicit TsvWriter(const std::filesystem::path& path);
  void write_row(const std::vector<std::string>& fields);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace trivote

#endif  // TRIVOTE_TSV_HPP
