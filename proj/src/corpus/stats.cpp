#include <fmt/format.h>

#include "trivote/corpus.hpp"
#include "trivote/error.hpp"

namespace trivote {

std::int64_t DatasetStats::count(Language l, Label y) const {
  auto it = by_language_label.find({l, y});
  return it == by_language_label.end() ? 0 : it->second;
}

std::int64_t DatasetStats::count(Language l, Label y, Source s) const {
  auto it = by_source.find({l, y, s});
  return it == by_source.end() ? 0 : it->second;
}

DatasetStats dataset_stats(const LabeledDataset& ds) {
  if (!ds.labeled()) {
    throw DataError(fmt::format("{}: statistics need a labeled dataset", ds.name()));
  }
  DatasetStats st;
  st.dataset = ds.name();
  for (const Sample& s : ds) {
    ++st.by_language_label[{s.language, *s.label}];
    if (s.source) ++st.by_source[{s.language, *s.label, *s.source}];
  }
  st.total = static_cast<std::int64_t>(ds.size());
  return st;
}

std::string render_stats_text(const std::vector<DatasetStats>& stats) {
  std::string out = fmt::format("{:<12} {:<9} {:<11} {}\n", "Data set",
                                "Language", "Label", "Number of sentences");
  for (const DatasetStats& st : stats) {
    for (const auto& [key, n] : st.by_language_label) {
      out += fmt::format("{:<12} {:<9} {:<11} {}\n", st.dataset,
                         to_string(key.first), to_string(key.second), n);
    }
    out += fmt::format("{:<12} {:<21} {}\n", st.dataset, "total", st.total);
  }

  bool any_source = false;
  for (const DatasetStats& st : stats) any_source |= !st.by_source.empty();
  if (any_source) {
    out += fmt::format("\n{:<12} {:<9} {:<11} {:<8} {}\n", "Data set",
                       "Language", "Label", "Source", "Number of sentences");
    for (const DatasetStats& st : stats) {
      for (const auto& [key, n] : st.by_source) {
        const auto& [lang, label, source] = key;
        out += fmt::format("{:<12} {:<9} {:<11} {:<8} {}\n", st.dataset,
                           to_string(lang), to_string(label), to_string(source), n);
      }
    }
  }
  return out;
}

nlohmann::json stats_to_json(const std::vector<DatasetStats>& stats) {
  nlohmann::json cells = nlohmann::json::array();
  nlohmann::json source_cells = nlohmann::json::array();
  nlohmann::json totals = nlohmann::json::object();
  for (const DatasetStats& st : stats) {
    for (const auto& [key, n] : st.by_language_label) {
      cells.push_back({{"dataset", st.dataset},
                       {"language", to_string(key.first)},
                       {"label", to_string(key.second)},
                       {"count", n}});
    }
    for (const auto& [key, n] : st.by_source) {
      const auto& [lang, label, source] = key;
      source_cells.push_back({{"dataset", st.dataset},
                              {"language", to_string(lang)},
                              {"label", to_string(label)},
                              {"source", to_string(source)},
                              {"count", n}});
    }
    totals[st.dataset] = st.total;
  }
  return {{"cells", cells}, {"source_cells", source_cells}, {"totals", totals}};
}

}  // namespace trivote
