#include "trivote/voting.hpp"

#include <future>

#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/tsv.hpp"

namespace trivote {
namespace {

constexpr std::array<const char*, 3> kMemberNames{"model one", "model two", "model three"};

int parse_bit(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw DataError(fmt::format("{}:{}: expected 0 or 1, found '{}'", path.string(), line, s));
}

}  // namespace

FinalLabel majority_vote(const VoteInput& v) {
  for (int x : {v.i1, v.i2, v.i3}) {
    if (x != 0 && x != 1) throw DataError(fmt::format("vote {} is not a binary label", x));
  }
  return {v.i1 + v.i2 + v.i3 >= 2 ? 1 : 0};
}

EnsembleResult ensemble_predict(const TrainedModel& m1, const TrainedModel& m2,
                                const TrainedModel& m3, std::string_view text) {
  const std::array<const TrainedModel*, 3> models{&m1, &m2, &m3};
  EnsembleResult r;
  for (std::size_t k = 0; k < 3; ++k) {
    try {
      r.members[k] = predict(*models[k], text);
    } catch (const Error& e) {
      throw DataError(fmt::format("{}: {}", kMemberNames[k], e.what()));
    }
  }
  r.votes = {r.members[0].label, r.members[1].label, r.members[2].label};
  r.final = majority_vote(r.votes);
  return r;
}

std::vector<EnsembleRecord> ensemble_predict_batch(const TrainedModel& m1, const TrainedModel& m2,
                                                   const TrainedModel& m3,
                                                   const LabeledDataset& ds, bool parallel) {
  if (ds.empty()) throw DataError(fmt::format("cannot predict on empty dataset '{}'", ds.name()));
  const std::array<const TrainedModel*, 3> models{&m1, &m2, &m3};
  using Batch = std::vector<std::pair<std::string, InferenceResult>>;

  auto run = [&](std::size_t k) -> Batch {
    try {
      return predict_batch(*models[k], ds);
    } catch (const Error& e) {
      throw DataError(fmt::format("{}: {}", kMemberNames[k], e.what()));
    }
  };

  std::array<Batch, 3> member;
  if (parallel) {
    std::array<std::future<Batch>, 3> jobs;
    for (std::size_t k = 0; k < 3; ++k) jobs[k] = std::async(std::launch::async, run, k);
    // Collect in member order so the first failing model is reported.
    for (std::size_t k = 0; k < 3; ++k) member[k] = jobs[k].get();
  } else {
    for (std::size_t k = 0; k < 3; ++k) member[k] = run(k);
  }

  std::vector<EnsembleRecord> records;
  records.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sample& s = ds[i];
    EnsembleRecord r;
    r.id = s.id;
    r.source = s.source;
    r.language = s.language;
    if (s.label) r.gold = label_value(*s.label);
    for (std::size_t k = 0; k < 3; ++k) r.members[k] = member[k][i].second;
    r.votes = {r.members[0].label, r.members[1].label, r.members[2].label};
    r.final = majority_vote(r.votes);
    records.push_back(std::move(r));
  }
  return records;
}

void write_ensemble_tsv(const std::vector<EnsembleRecord>& records,
                        const std::filesystem::path& path) {
  TsvWriter w(path);
  w.write_row({"id", "i1", "i2", "i3", "final"});
  for (const EnsembleRecord& r : records) {
    w.write_row({r.id, std::to_string(r.votes.i1), std::to_string(r.votes.i2),
                 std::to_string(r.votes.i3), std::to_string(r.final.value)});
  }
  w.close();
}

std::vector<EnsembleRow> read_ensemble_tsv(const std::filesystem::path& path) {
  TsvReader reader(path);
  const std::size_t id = reader.require_column("id");
  const std::array<std::size_t, 3> cols{reader.require_column("i1"), reader.require_column("i2"),
                                        reader.require_column("i3")};
  const std::size_t fin = reader.require_column("final");

  std::vector<EnsembleRow> rows;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::size_t line = reader.line_number();
    EnsembleRow row;
    row.id = f[id];
    row.votes = {parse_bit(f[cols[0]], path, line), parse_bit(f[cols[1]], path, line),
                 parse_bit(f[cols[2]], path, line)};
    row.final = {parse_bit(f[fin], path, line)};
    if (row.final != majority_vote(row.votes)) {
      throw DataError(fmt::format("{}:{}: final label disagrees with the majority vote",
                                  path.string(), line));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_submission(const std::vector<EnsembleRecord>& records,
                      const std::filesystem::path& path) {
  TsvWriter w(path);
  for (const EnsembleRecord& r : records) {
    w.write_row({r.id, std::string(to_string(r.final.value == 1 ? Label::kSexist : Label::kNonSexist))});
  }
  w.close();
}

}  // namespace trivote
