#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/evaluation.hpp"

namespace trivote {
namespace {

struct PublishedRow {
  std::string_view tag;
  double accuracy, f1;
  double twitter, gab;
  double en, es;
};

// Shared-task test set, as published.
constexpr PublishedRow kPublished[] = {
    {kModelOneTag, 0.7370, 0.7360, 0.7271, 0.7709, 0.7197, 0.7546},
    {kModelTwoTag, 0.7280, 0.7275, 0.7312, 0.7169, 0.7351, 0.7208},
    {kModelThreeTag, 0.7287, 0.7287, 0.7312, 0.7200, 0.7486, 0.7083},
    {kFinalTag, 0.7553, 0.7551, 0.7504, 0.7719, 0.7559, 0.7546},
};

const PublishedRow* published_row(std::string_view tag) {
  for (const PublishedRow& r : kPublished) {
    if (r.tag == tag) return &r;
  }
  return nullptr;
}

// Columns compare at printed precision, so equal printed values tie.
long long rounded(double v) { return std::llround(v * 10000.0); }

std::string mark(double v, const std::optional<long long>& best) {
  std::string s = format_decimal_comma(v);
  return best && rounded(v) == *best ? s + "*" : s;
}

std::optional<long long> column_best(const std::vector<std::optional<double>>& values) {
  std::optional<long long> best;
  for (const auto& v : values) {
    if (v && (!best || rounded(*v) > *best)) best = rounded(*v);
  }
  return best;
}

std::string strip_trailing_spaces(const std::string& text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) {
      const std::size_t last = text.find_last_not_of(' ', end - 1);
      if (last != std::string::npos && last >= start) out.append(text, start, last + 1 - start);
    }
    if (end < text.size()) out += '\n';
    start = end + 1;
  }
  return out;
}

nlohmann::json metrics_json(const MetricsReport& m) {
  return {{"n", m.n},
          {"accuracy", m.accuracy},
          {"f1", m.f1},
          {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp},
                         {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}},
          {"warnings", m.warnings}};
}

nlohmann::json baseline_json(const std::optional<BaselineCell>& b) {
  if (!b) return nullptr;
  nlohmann::json j{{"accuracy", b->accuracy}};
  if (b->f1) j["f1"] = *b->f1;
  return j;
}

constexpr int kModelWidth = 38;

}  // namespace

std::string display_name(std::string_view tag) {
  if (tag == kModelOneTag) return "Basic Model One";
  if (tag == kModelTwoTag) return "Basic Model Two";
  if (tag == kModelThreeTag) return "Basic Model Three";
  if (tag == kFinalTag) return "Final Model (with voting mechanism)";
  return std::string(tag);
}

std::optional<BaselineCell> published_baseline(std::string_view tag) {
  const PublishedRow* r = published_row(tag);
  if (!r) return std::nullopt;
  return BaselineCell{r->accuracy, r->f1};
}

std::optional<BaselineCell> published_baseline(std::string_view tag, Source s) {
  const PublishedRow* r = published_row(tag);
  if (!r) return std::nullopt;
  return BaselineCell{s == Source::kTwitter ? r->twitter : r->gab, std::nullopt};
}

std::optional<BaselineCell> published_baseline(std::string_view tag, Language l) {
  const PublishedRow* r = published_row(tag);
  if (!r) return std::nullopt;
  return BaselineCell{l == Language::kEn ? r->en : r->es, std::nullopt};
}

std::string format_decimal_comma(double v) {
  std::string s = fmt::format("{:.4f}", v);
  for (char& c : s) {
    if (c == '.') c = ',';
  }
  return s;
}

RenderedReport render_report(const std::vector<SystemReport>& systems,
                             const RenderOptions& options) {
  if (systems.empty()) throw ConfigError("report needs at least one model");
  const Averaging averaging = systems.front().overall.averaging;
  RenderedReport out;
  std::string& text = out.text;

  // Overall accuracy and F-measure.
  text += fmt::format("Evaluation Results: Accuracy and F-Measure (F1 averaging: {})\n",
                      to_string(averaging));
  {
    std::vector<std::optional<double>> acc, f1, pacc, pf1;
    for (const SystemReport& s : systems) {
      acc.emplace_back(s.overall.accuracy);
      f1.emplace_back(s.overall.f1);
      auto b = published_baseline(s.tag);
      pacc.push_back(b ? std::optional<double>(b->accuracy) : std::nullopt);
      pf1.push_back(b ? b->f1 : std::nullopt);
    }
    const auto best_acc = column_best(acc), best_f1 = column_best(f1);
    const auto best_pacc = column_best(pacc), best_pf1 = column_best(pf1);

    text += fmt::format("{:<{}} {:>6}  {:<9} {:<9}", "Model", kModelWidth, "N", "Accuracy", "F1");
    if (options.baseline) text += fmt::format(" | {:<15} {:<9}", "Published Acc.", "Published F1");
    text += '\n';
    for (std::size_t i = 0; i < systems.size(); ++i) {
      const SystemReport& s = systems[i];
      text += fmt::format("{:<{}} {:>6}  {:<9} {:<9}", display_name(s.tag), kModelWidth,
                          s.overall.n, mark(*acc[i], best_acc), mark(*f1[i], best_f1));
      if (options.baseline) {
        text += fmt::format(" | {:<15} {:<9}", pacc[i] ? mark(*pacc[i], best_pacc) : "-",
                            pf1[i] ? mark(*pf1[i], best_pf1) : "-");
      }
      text += '\n';
    }
  }

  // Per-axis accuracy sections.
  auto section = [&](const char* title, const char* axis_header,
                     const std::vector<std::string>& keys,
                     const std::function<const BreakdownReport&(const SystemReport&)>& pick,
                     const std::function<std::optional<BaselineCell>(const std::string&,
                                                                     const std::string&)>& published) {
    text += fmt::format("\n{}\n", title);
    text += fmt::format("{:<8} {:<{}} {:>6}  {:<9} {:<9}", axis_header, "Model", kModelWidth, "N",
                        "Accuracy", "F1");
    if (options.baseline) text += fmt::format(" | {:<15}", "Published Acc.");
    text += '\n';
    for (const std::string& key : keys) {
      std::vector<const SystemReport*> present;
      std::vector<std::optional<double>> acc, f1, pacc;
      for (const SystemReport& s : systems) {
        auto it = pick(s).cells.find(key);
        if (it == pick(s).cells.end()) continue;
        present.push_back(&s);
        acc.emplace_back(it->second.accuracy);
        f1.emplace_back(it->second.f1);
        auto b = published(s.tag, key);
        pacc.push_back(b ? std::optional<double>(b->accuracy) : std::nullopt);
      }
      if (present.empty()) continue;
      const auto best_acc = column_best(acc), best_f1 = column_best(f1), best_pacc = column_best(pacc);
      for (std::size_t i = 0; i < present.size(); ++i) {
        const MetricsReport& m = pick(*present[i]).cells.at(key);
        text += fmt::format("{:<8} {:<{}} {:>6}  {:<9} {:<9}", i == 0 ? key : "",
                            display_name(present[i]->tag), kModelWidth, m.n,
                            mark(*acc[i], best_acc), mark(*f1[i], best_f1));
        if (options.baseline) text += fmt::format(" | {:<15}", pacc[i] ? mark(*pacc[i], best_pacc) : "-");
        text += '\n';
      }
    }
  };

  bool any_source = false;
  for (const SystemReport& s : systems) any_source |= !s.by_source.cells.empty();
  if (any_source) {
    section("Evaluation Results by Data Source: Accuracy", "Source", {"twitter", "gab"},
            [](const SystemReport& s) -> const BreakdownReport& { return s.by_source; },
            [](const std::string& tag, const std::string& key) {
              return published_baseline(tag, *parse_source(key));
            });
  }
  section("Evaluation Results by Language: Accuracy", "Language", {"en", "es"},
          [](const SystemReport& s) -> const BreakdownReport& { return s.by_language; },
          [](const std::string& tag, const std::string& key) {
            return published_baseline(tag, *parse_language(key));
          });
  text += "\n* best value in the column";
  if (options.baseline) text += "; published columns are the shared-task results as originally reported";
  text += '\n';

  // Machine-readable document.
  nlohmann::json models = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (const SystemReport& s : systems) {
    nlohmann::json entry;
    entry["display_name"] = display_name(s.tag);
    entry["overall"] = metrics_json(s.overall);
    entry["by_source"] = nlohmann::json::object();
    for (const auto& [k, m] : s.by_source.cells) entry["by_source"][k] = metrics_json(m);
    entry["by_language"] = nlohmann::json::object();
    for (const auto& [k, m] : s.by_language.cells) entry["by_language"][k] = metrics_json(m);
    if (options.baseline) {
      entry["published_baseline"] = {
          {"overall", baseline_json(published_baseline(s.tag))},
          {"by_source",
           {{"twitter", baseline_json(published_baseline(s.tag, Source::kTwitter))},
            {"gab", baseline_json(published_baseline(s.tag, Source::kGab))}}},
          {"by_language",
           {{"en", baseline_json(published_baseline(s.tag, Language::kEn))},
            {"es", baseline_json(published_baseline(s.tag, Language::kEs))}}}};
    }
    models[s.tag] = std::move(entry);
    order.push_back(s.tag);
  }
  out.document = {{"metadata", {{"averaging", to_string(averaging)},
                                {"baseline", options.baseline},
                                {"model_order", order}}},
                  {"models", models}};
  out.text = strip_trailing_spaces(out.text);
  return out;
}

}  // namespace trivote
