#include <numeric>

#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/evaluation.hpp"

namespace trivote {
namespace {

Fraction reduced(std::int64_t num, std::int64_t den) {
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Fraction{num / g, den / g} : Fraction{num, den};
}

Fraction add(const Fraction& a, const Fraction& b) {
  return reduced(a.num * b.den + b.num * a.den, a.den * b.den);
}

std::string axis_value(const PredictionRecord& r, Axis axis) {
  switch (axis) {
    case Axis::kSource:
      if (!r.source) throw DataError(fmt::format("record '{}' has no source", r.id));
      return std::string(to_string(*r.source));
    case Axis::kLanguage:
      if (!r.language) throw DataError(fmt::format("record '{}' has no language", r.id));
      return std::string(to_string(*r.language));
    case Axis::kModel:
      if (r.model_tag.empty()) throw DataError(fmt::format("record '{}' has no model tag", r.id));
      return r.model_tag;
  }
  return {};
}

}  // namespace

std::string_view to_string(Averaging a) {
  return a == Averaging::kMacro ? "macro" : "positive_class";
}

Averaging parse_averaging(std::string_view s) {
  if (s == "macro") return Averaging::kMacro;
  if (s == "positive_class") return Averaging::kPositiveClass;
  throw ConfigError(fmt::format("unknown F-measure averaging '{}' (expected macro or positive_class)", s));
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::kSource: return "source";
    case Axis::kLanguage: return "language";
    case Axis::kModel: return "model";
  }
  return "source";
}

Confusion confusion(std::span<const PredictionRecord> records) {
  if (records.empty()) throw DataError("no prediction records to score");
  Confusion c;
  for (const PredictionRecord& r : records) {
    if ((r.gold != 0 && r.gold != 1) || (r.predicted != 0 && r.predicted != 1)) {
      throw DataError(fmt::format("record '{}' has a non-binary label", r.id));
    }
    if (r.gold == 1) {
      ++(r.predicted == 1 ? c.tp : c.fn);
    } else {
      ++(r.predicted == 1 ? c.fp : c.tn);
    }
  }
  return c;
}

Fraction accuracy_fraction(const Confusion& c) { return reduced(c.tp + c.tn, c.n()); }

Fraction class_f1_fraction(const Confusion& c, int positive, bool* degenerate) {
  // For class 0 the roles of tp/tn and fp/fn swap.
  const std::int64_t hit = positive == 1 ? c.tp : c.tn;
  const std::int64_t misses = c.fp + c.fn;
  const std::int64_t den = 2 * hit + misses;
  if (degenerate) *degenerate = den == 0;
  if (den == 0) return {0, 1};
  return reduced(2 * hit, den);
}

Fraction f_measure_fraction(const Confusion& c, Averaging averaging,
                            std::vector<std::string>* warnings) {
  bool pos_degenerate = false, neg_degenerate = false;
  const Fraction pos = class_f1_fraction(c, 1, &pos_degenerate);
  if (averaging == Averaging::kPositiveClass) {
    if (pos_degenerate && warnings) {
      warnings->push_back("class 1 (sexist) absent from gold and predictions; F1 set to 0");
    }
    return pos;
  }
  const Fraction neg = class_f1_fraction(c, 0, &neg_degenerate);
  if (warnings) {
    if (pos_degenerate) warnings->push_back("class 1 (sexist) absent from gold and predictions; its F1 counts as 0");
    if (neg_degenerate) warnings->push_back("class 0 (non-sexist) absent from gold and predictions; its F1 counts as 0");
  }
  const Fraction sum = add(pos, neg);
  return reduced(sum.num, 2 * sum.den);
}

double accuracy(std::span<const PredictionRecord> records) {
  return accuracy_fraction(confusion(records)).value();
}

double f_measure(std::span<const PredictionRecord> records, Averaging averaging) {
  return f_measure_fraction(confusion(records), averaging).value();
}

MetricsReport metrics(std::span<const PredictionRecord> records, Averaging averaging) {
  MetricsReport m;
  m.confusion = confusion(records);
  m.n = m.confusion.n();
  m.averaging = averaging;
  m.accuracy = accuracy_fraction(m.confusion).value();
  m.f1 = f_measure_fraction(m.confusion, averaging, &m.warnings).value();
  return m;
}

BreakdownReport breakdown(std::span<const PredictionRecord> records, Axis axis,
                          Averaging averaging) {
  if (records.empty()) throw DataError("no prediction records to break down");
  std::map<std::string, std::vector<PredictionRecord>> groups;
  for (const PredictionRecord& r : records) groups[axis_value(r, axis)].push_back(r);
  BreakdownReport b;
  b.axis = axis;
  for (const auto& [key, group] : groups) b.cells.emplace(key, metrics(group, averaging));
  return b;
}

SystemReport evaluate_system(std::string tag, std::span<const PredictionRecord> records,
                             Averaging averaging) {
  SystemReport s;
  s.tag = std::move(tag);
  s.overall = metrics(records, averaging);
  bool any_source = false;
  for (const PredictionRecord& r : records) any_source |= r.source.has_value();
  s.by_source.axis = Axis::kSource;
  if (any_source) s.by_source = breakdown(records, Axis::kSource, averaging);
  s.by_language = breakdown(records, Axis::kLanguage, averaging);
  return s;
}

}  // namespace trivote
