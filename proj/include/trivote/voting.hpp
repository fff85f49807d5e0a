#ifndef TRIVOTE_VOTING_HPP
#define TRIVOTE_VOTING_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trivote/corpus.hpp"
#include "trivote/models.hpp"

namespace trivote {

// Hard labels of the three basic models, each 0 or 1.
struct VoteInput {
  int i1 = 0;
  int i2 = 0;
  int i3 = 0;
};

struct FinalLabel {
  int value = 0;
  friend bool operator==(const FinalLabel&, const FinalLabel&) = default;
};

// 1 when i1 + i2 + i3 >= 2, otherwise 0. Throws DataError when a component
// is not 0 or 1.
FinalLabel majority_vote(const VoteInput& v);

struct EnsembleResult {
  std::array<InferenceResult, 3> members;
  VoteInput votes;
  FinalLabel final;
};

// Errors are rethrown as DataError naming the failing model.
EnsembleResult ensemble_predict(const TrainedModel& m1, const TrainedModel& m2,
                                const TrainedModel& m3, std::string_view text);

struct EnsembleRecord {
  std::string id;
  std::optional<Source> source;
  Language language = Language::kEn;
  std::optional<int> gold;
  std::array<InferenceResult, 3> members;
  VoteInput votes;
  FinalLabel final;
};

// One record per sample, in dataset order. The three members run as
// concurrent jobs when `parallel` is set; the output does not depend on it.
std::vector<EnsembleRecord> ensemble_predict_batch(const TrainedModel& m1, const TrainedModel& m2,
                                                   const TrainedModel& m3,
                                                   const LabeledDataset& ds,
                                                   bool parallel = true);

// Columns: id, i1, i2, i3, final.
void write_ensemble_tsv(const std::vector<EnsembleRecord>& records,
                        const std::filesystem::path& path);

struct EnsembleRow {
  std::string id;
  VoteInput votes;
  FinalLabel final;
};

// Reads a file written by write_ensemble_tsv and checks that every final
// column equals the majority vote of its row.
std::vector<EnsembleRow> read_ensemble_tsv(const std::filesystem::path& path);

// Shared-task submission shape: "<id>\t<sexist|non-sexist>", no header.
void write_submission(const std::vector<EnsembleRecord>& records,
                      const std::filesystem::path& path);

}  // namespace trivote

#endif  // TRIVOTE_VOTING_HPP
