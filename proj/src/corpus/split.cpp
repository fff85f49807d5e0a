#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "trivote/corpus.hpp"
#include "trivote/error.hpp"
#include "trivote/random.hpp"

namespace trivote {

SplitResult split(const LabeledDataset& ds, double validation_fraction,
                  std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw DataError(fmt::format("validation fraction {} is outside (0, 1)",
                                validation_fraction));
  }
  if (!ds.labeled()) throw DataError(fmt::format("{}: cannot split an unlabeled dataset", ds.name()));
  if (ds.empty()) throw DataError(fmt::format("{}: cannot split an empty dataset", ds.name()));

  std::map<std::pair<Language, Label>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    strata[{ds[i].language, *ds[i].label}].push_back(i);
  }
  for (const auto& [key, members] : strata) {
    if (members.size() < 2) {
      throw DataError(fmt::format("{}: stratum ({}, {}) has {} sample(s); need at least 2",
                                  ds.name(), to_string(key.first),
                                  to_string(key.second), members.size()));
    }
  }

  // Largest-remainder allocation so that per-stratum quotas add up to the
  // rounded overall validation size. Ties go to the earlier stratum.
  const auto target = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(ds.size())));
  struct Quota {
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t allocated = 0;
  for (const auto& [key, members] : strata) {
    double ideal = validation_fraction * static_cast<double>(members.size());
    auto take = static_cast<std::size_t>(std::floor(ideal));
    quotas.push_back({take, ideal - static_cast<double>(take)});
    allocated += take;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; allocated < target && k < order.size(); ++k) {
    ++quotas[order[k]].take;
    ++allocated;
  }

  Rng rng(seed);
  std::vector<bool> in_validation(ds.size(), false);
  std::size_t q = 0;
  for (auto& [key, members] : strata) {
    std::vector<std::size_t> picked = members;
    shuffle(picked, rng);
    for (std::size_t k = 0; k < quotas[q].take; ++k) in_validation[picked[k]] = true;
    ++q;
  }

  std::vector<Sample> train, validation;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_validation[i] ? validation : train).push_back(ds[i]);
  }
  return {LabeledDataset(ds.name() + ".train", std::move(train), true),
          LabeledDataset(ds.name() + ".validation", std::move(validation), true)};
}

}  // namespace trivote
