#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "trivote/corpus.hpp"
#include "trivote/error.hpp"
#include "trivote/tsv.hpp"

namespace trivote {

LabeledDataset load_dataset(const std::filesystem::path& path,
                            const ColumnMapping& mapping,
                            const LoadOptions& options) {
  TsvReader reader(path);
  const std::size_t id_col = reader.require_column(mapping.id);
  const std::size_t lang_col = reader.require_column(mapping.language);
  const std::size_t text_col = reader.require_column(mapping.text);
  std::optional<std::size_t> source_col;
  if (mapping.source) source_col = reader.column(*mapping.source);
  std::optional<std::size_t> label_col;
  if (options.labeled) label_col = reader.require_column(mapping.label);

  const std::string file = path.string();
  std::vector<Sample> samples;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::size_t line = reader.line_number();
    auto fail = [&](const std::string& what) {
      return DataError(fmt::format("{}:{}: {}", file, line, what));
    };

    Sample s;
    s.id = f[id_col];
    if (s.id.empty()) throw fail("empty id");
    if (auto [it, inserted] = first_seen.emplace(s.id, line); !inserted) {
      throw fail(fmt::format("duplicate id '{}' (first seen on line {})", s.id,
                             it->second));
    }

    auto lang = parse_language(f[lang_col]);
    if (!lang) {
      throw fail(fmt::format("unknown language '{}' (expected en or es)",
                             f[lang_col]));
    }
    s.language = *lang;

    if (source_col) {
      auto src = parse_source(f[*source_col]);
      if (!src) {
        throw fail(fmt::format("unknown source '{}' (expected twitter or gab)",
                               f[*source_col]));
      }
      s.source = *src;
    }

    if (label_col) {
      auto label = parse_label(f[*label_col]);
      if (!label) {
        throw fail(fmt::format(
            "unparseable label '{}' (expected sexist, non-sexist, 1 or 0)",
            f[*label_col]));
      }
      s.label = *label;
    }

    s.text = options.normalize ? normalize_text(f[text_col]) : f[text_col];
    if (s.text.empty()) {
      throw fail(fmt::format("sample '{}' has empty text after normalization", s.id));
    }
    samples.push_back(std::move(s));
  }

  std::string name = options.name ? *options.name : path.stem().string();
  return LabeledDataset(std::move(name), std::move(samples), options.labeled);
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                   const ColumnMapping& mapping) {
  const bool any_source = std::any_of(
      ds.begin(), ds.end(), [](const Sample& s) { return s.source.has_value(); });
  const bool write_source = mapping.source && any_source;

  TsvWriter w(path);
  std::vector<std::string> header{mapping.id};
  if (write_source) header.push_back(*mapping.source);
  header.push_back(mapping.language);
  header.push_back(mapping.text);
  if (ds.labeled()) header.push_back(mapping.label);
  w.write_row(header);

  for (const Sample& s : ds) {
    std::vector<std::string> row{s.id};
    if (write_source) {
      if (!s.source) {
        throw DataError(fmt::format("{}: sample '{}' has no source to write",
                                    path.string(), s.id));
      }
      row.emplace_back(to_string(*s.source));
    }
    row.emplace_back(to_string(s.language));
    row.push_back(s.text);
    if (ds.labeled()) row.emplace_back(to_string(*s.label));
    w.write_row(row);
  }
  w.close();
}

}  // namespace trivote
