#ifndef TRIVOTE_SYNTHETIC_HPP
#define TRIVOTE_SYNTHETIC_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trivote/corpus.hpp"

namespace trivote {

// Generator for desk-scale corpora. Every text mixes one or two class marker
// words (drawn from a per-language, per-label lexicon) with neutral filler
// words of the same language, so the two labels are separable from the bag of
// tokens alone. Occasional URLs and @-mentions exercise normalization.
struct SyntheticCell {
  Language language;
  Label label;
  std::size_t count = 0;
};

struct SyntheticOptions {
  std::string name = "synthetic";
  std::string id_prefix = "syn";
  std::vector<SyntheticCell> cells;
  // Attach a source to every sample: gab with probability gab_share,
  // twitter otherwise.
  bool with_source = true;
  double gab_share = 0.25;
  std::uint64_t seed = 0;
};

// Samples are shuffled across cells; ids are "<prefix>-NNNNNN" in output
// order. Texts are already normalized.
LabeledDataset generate_synthetic(const SyntheticOptions& options);

// `per_cell` samples for each of the four (language, label) cells.
SyntheticOptions balanced_options(std::size_t per_cell, std::uint64_t seed);

// Cell counts of the shared-task subtask-one corpus: 6977 training rows
// without sources and 4368 test rows with sources.
SyntheticOptions table1_train_options(std::uint64_t seed = 2021);
SyntheticOptions table1_test_options(std::uint64_t seed = 2022);

}  // namespace trivote

#endif  // TRIVOTE_SYNTHETIC_HPP
