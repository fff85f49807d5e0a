#include "trivote/synthetic.hpp"

#include <array>
#include <string_view>

#include <fmt/format.h>

#include "trivote/random.hpp"

namespace trivote {
namespace {

using WordList = std::vector<std::string_view>;

const WordList& markers(Language lang, Label label) {
  static const WordList en_pos{"zorvik", "plenth", "garrow", "quindle", "mabbet", "trosk"};
  static const WordList en_neg{"felwin", "drabble", "sunkel", "pimbry", "corvath", "lestow"};
  static const WordList es_pos{"brenzo", "calduna", "frespo", "molvira", "tastero", "vulcha"};
  static const WordList es_neg{"amelsa", "diruto", "gontela", "perisco", "rubalde", "sorreno"};
  if (lang == Language::kEn) return label == Label::kSexist ? en_pos : en_neg;
  return label == Label::kSexist ? es_pos : es_neg;
}

const WordList& fillers(Language lang) {
  static const WordList en{"the", "today", "people", "really", "about", "this",
                           "think", "just", "new", "post", "they", "said",
                           "again", "what", "with", "always"};
  static const WordList es{"el", "hoy", "gente", "muy", "sobre", "esto",
                           "creo", "solo", "nuevo", "que", "dicen", "otra",
                           "vez", "con", "siempre", "para"};
  return lang == Language::kEn ? en : es;
}

std::string make_text(Language lang, Label label, Rng& rng) {
  std::vector<std::string> words;
  const WordList& m = markers(lang, label);
  const WordList& f = fillers(lang);
  const std::size_t n_markers = 1 + uniform_index(rng, 2);
  const std::size_t n_fillers = 3 + uniform_index(rng, 5);
  for (std::size_t i = 0; i < n_markers; ++i) words.emplace_back(m[uniform_index(rng, m.size())]);
  for (std::size_t i = 0; i < n_fillers; ++i) words.emplace_back(f[uniform_index(rng, f.size())]);
  shuffle(words, rng);

  // Surface noise that normalization maps to placeholders.
  if (uniform01(rng) < 0.2) words.insert(words.begin(), fmt::format("@user{}", uniform_index(rng, 1000)));
  if (uniform01(rng) < 0.15) words.push_back(fmt::format("https://t.co/{}", uniform_index(rng, 100000)));

  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) text += ' ';
    text += words[i];
  }
  return normalize_text(text);
}

}  // namespace

LabeledDataset generate_synthetic(const SyntheticOptions& options) {
  Rng rng(options.seed);
  struct Draft {
    Language language;
    Label label;
  };
  std::vector<Draft> drafts;
  for (const SyntheticCell& c : options.cells) {
    for (std::size_t i = 0; i < c.count; ++i) drafts.push_back({c.language, c.label});
  }
  shuffle(drafts, rng);

  std::vector<Sample> samples;
  samples.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    Sample s;
    s.id = fmt::format("{}-{:06d}", options.id_prefix, i + 1);
    s.language = drafts[i].language;
    s.label = drafts[i].label;
    if (options.with_source) {
      s.source = uniform01(rng) < options.gab_share ? Source::kGab : Source::kTwitter;
    }
    s.text = make_text(s.language, *s.label, rng);
    samples.push_back(std::move(s));
  }
  return LabeledDataset(options.name, std::move(samples), true);
}

SyntheticOptions balanced_options(std::size_t per_cell, std::uint64_t seed) {
  SyntheticOptions o;
  o.seed = seed;
  for (Language l : {Language::kEn, Language::kEs}) {
    for (Label y : {Label::kNonSexist, Label::kSexist}) o.cells.push_back({l, y, per_cell});
  }
  return o;
}

SyntheticOptions table1_train_options(std::uint64_t seed) {
  SyntheticOptions o;
  o.name = "train";
  o.id_prefix = "train";
  o.with_source = false;
  o.seed = seed;
  o.cells = {{Language::kEn, Label::kNonSexist, 1800},
             {Language::kEn, Label::kSexist, 1636},
             {Language::kEs, Label::kNonSexist, 1800},
             {Language::kEs, Label::kSexist, 1741}};
  return o;
}

SyntheticOptions table1_test_options(std::uint64_t seed) {
  SyntheticOptions o;
  o.name = "test";
  o.id_prefix = "test";
  o.with_source = true;
  o.seed = seed;
  o.cells = {{Language::kEn, Label::kNonSexist, 1050},
             {Language::kEn, Label::kSexist, 1158},
             {Language::kEs, Label::kNonSexist, 1037},
             {Language::kEs, Label::kSexist, 1123}};
  return o;
}

}  // namespace trivote
