#include "trivote/tsv.hpp"

#include <fmt/format.h>

#include "trivote/error.hpp"

namespace trivote {

std::vector<std::string> split_tsv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

TsvReader::TsvReader(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw DataError(fmt::format("{}: no such file", path.string()));
  }
  in_.open(path, std::ios::binary);
  if (!in_) throw DataError(fmt::format("{}: cannot open file", path.string()));
  std::string line;
  if (!std::getline(in_, line)) {
    throw DataError(fmt::format("{}: missing header row", path.string()));
  }
  ++line_;
  // Tolerate a UTF-8 byte order mark.
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  header_ = split_tsv_line(line);
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (!index_.emplace(header_[i], i).second) {
      throw DataError(
          fmt::format("{}: duplicate header '{}'", path.string(), header_[i]));
    }
  }
}

std::optional<std::size_t> TsvReader::column(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TsvReader::require_column(std::string_view name) const {
  auto c = column(name);
  if (!c) {
    throw DataError(
        fmt::format("{}: missing column '{}'", path_.string(), name));
  }
  return *c;
}

bool TsvReader::next(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty() || line == "\r") continue;
    fields = split_tsv_line(line);
    if (fields.size() != header_.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}",
                                  path_.string(), line_, header_.size(),
                                  fields.size()));
    }
    return true;
  }
  return false;
}

TsvWriter::TsvWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw DataError(fmt::format("{}: cannot write file", path.string()));
}

void TsvWriter::write_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].find_first_of("\t\n\r") != std::string::npos) {
      throw DataError(fmt::format(
          "{}: field '{}' contains a tab or newline", path_.string(), fields[i]));
    }
    if (i) out_ << '\t';
    out_ << fields[i];
  }
  out_ << '\n';
}

void TsvWriter::close() {
  out_.close();
  if (out_.fail()) throw DataError(fmt::format("{}: write failed", path_.string()));
}

}  // namespace trivote
