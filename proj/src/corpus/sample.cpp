#include <unordered_set>

#include <fmt/format.h>

#include "trivote/corpus.hpp"
#include "trivote/error.hpp"

namespace trivote {

std::string_view to_string(Source s) {
  return s == Source::kTwitter ? "twitter" : "gab";
}

std::string_view to_string(Language l) {
  return l == Language::kEn ? "en" : "es";
}

std::string_view to_string(Label l) {
  return l == Label::kSexist ? "sexist" : "non-sexist";
}

std::optional<Source> parse_source(std::string_view s) {
  if (s == "twitter") return Source::kTwitter;
  if (s == "gab") return Source::kGab;
  return std::nullopt;
}

std::optional<Language> parse_language(std::string_view s) {
  if (s == "en") return Language::kEn;
  if (s == "es") return Language::kEs;
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "sexist" || s == "1") return Label::kSexist;
  if (s == "non-sexist" || s == "0") return Label::kNonSexist;
  return std::nullopt;
}

LabeledDataset::LabeledDataset(std::string name, std::vector<Sample> samples,
                               bool labeled)
    : name_(std::move(name)), samples_(std::move(samples)), labeled_(labeled) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.id.empty()) {
      throw DataError(fmt::format("{}: sample {} has an empty id", name_, i));
    }
    if (!seen.insert(s.id).second) {
      throw DataError(fmt::format("{}: duplicate id '{}'", name_, s.id));
    }
    if (s.text.empty()) {
      throw DataError(fmt::format("{}: sample '{}' has empty text", name_, s.id));
    }
    if (labeled_ && !s.label) {
      throw DataError(fmt::format("{}: sample '{}' has no label", name_, s.id));
    }
  }
}

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
  ColumnMapping m;
  if (!j.is_object()) throw ConfigError("column mapping must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "source" && value.is_null()) {
      m.source.reset();
      continue;
    }
    if (!value.is_string()) {
      throw ConfigError(fmt::format("column mapping '{}' must be a string", key));
    }
    auto v = value.get<std::string>();
    if (key == "id") m.id = v;
    else if (key == "source") m.source = v;
    else if (key == "language") m.language = v;
    else if (key == "text") m.text = v;
    else if (key == "label") m.label = v;
    else throw ConfigError(fmt::format("unknown column mapping key '{}'", key));
  }
  return m;
}

nlohmann::json ColumnMapping::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["source"] = source ? nlohmann::json(*source) : nlohmann::json(nullptr);
  j["language"] = language;
  j["text"] = text;
  j["label"] = label;
  return j;
}

}  // namespace trivote
