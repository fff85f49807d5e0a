#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "trivote/checksum.hpp"
#include "trivote/error.hpp"
#include "trivote/models.hpp"
#include "trivote/tsv.hpp"

namespace trivote {
namespace {

struct Encoded {
  std::vector<Features> features;
  std::vector<double> labels;
};

Encoded encode_dataset(const BasicModel& model, const LabeledDataset& ds) {
  Encoded out;
  out.features.reserve(ds.size());
  out.labels.reserve(ds.size());
  for (const Sample& s : ds) {
    try {
      out.features.push_back(model.featurize(s.text));
    } catch (const Error& e) {
      throw DataError(fmt::format("{}: sample '{}': {}", ds.name(), s.id, e.what()));
    }
    out.labels.push_back(s.label ? label_value(*s.label) : 0.0);
  }
  return out;
}

double accumulate(const BasicModel& model, const Features& x, double y, Rng* dropout,
                  Parameters& grads) {
  if (const auto* ff = std::get_if<FeedForwardNet>(&model.network())) {
    return ff->accumulate_gradient(std::get<Eigen::VectorXd>(x), y, dropout, grads);
  }
  return std::get<BiLstmNet>(model.network())
      .accumulate_gradient(std::get<Eigen::MatrixXd>(x), y, dropout, grads);
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const BasicModel& model, const Encoded& data) {
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    const double p = model.probability(data.features[i]);
    const double clamped = std::clamp(p, 1e-15, 1.0 - 1e-15);
    loss += -(data.labels[i] * std::log(clamped) + (1.0 - data.labels[i]) * std::log(1.0 - clamped));
    if (threshold_label(p, model.threshold()) == static_cast<int>(data.labels[i])) ++correct;
  }
  const auto n = static_cast<double>(data.features.size());
  return {loss / n, static_cast<double>(correct) / n};
}

void initialize(BasicModel& model, std::uint64_t seed) {
  Rng rng(seed);
  std::visit([&](auto& net) { net.initialize(rng); }, model.network());
  model.mark_initialized();
}

void require_trainable(const LabeledDataset& ds, const char* role) {
  if (ds.empty()) throw DataError(fmt::format("{} dataset '{}' is empty", role, ds.name()));
  if (!ds.labeled()) throw DataError(fmt::format("{} dataset '{}' is unlabeled", role, ds.name()));
}

}  // namespace

nlohmann::json TrainingHistory::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochRecord& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"validation_loss", e.validation_loss},
                    {"validation_accuracy", e.validation_accuracy}});
  }
  return {{"initial_train_loss", initial_train_loss},
          {"epochs", rows},
          {"best_epoch", best_epoch},
          {"best_validation_accuracy", best_validation_accuracy},
          {"stopped_early", stopped_early}};
}

TrainingHistory TrainingHistory::from_json(const nlohmann::json& j) {
  TrainingHistory h;
  h.initial_train_loss = j.at("initial_train_loss").get<double>();
  for (const auto& row : j.at("epochs")) {
    h.epochs.push_back({row.at("epoch").get<int>(), row.at("train_loss").get<double>(),
                        row.at("validation_loss").get<double>(),
                        row.at("validation_accuracy").get<double>()});
  }
  h.best_epoch = j.at("best_epoch").get<int>();
  h.best_validation_accuracy = j.at("best_validation_accuracy").get<double>();
  h.stopped_early = j.at("stopped_early").get<bool>();
  return h;
}

std::string TrainedModel::parameter_checksum() const {
  const std::vector<double> flat = model.parameters().flatten();
  Sha256 h;
  h.update(flat.data(), flat.size() * sizeof(double));
  return h.hex_digest();
}

TrainedModel train(BasicModel model, const LabeledDataset& train_ds,
                   const LabeledDataset& validation_ds, const TrainConfig& tc) {
  require_trainable(train_ds, "training");
  require_trainable(validation_ds, "validation");
  if (tc.fine_tune_encoders) {
    throw ConfigError(
        "fine_tune_encoders is set, but the configured encoders are frozen inference adapters");
  }
  if (!model.initialized()) initialize(model, tc.seed);

  const Encoded train_data = encode_dataset(model, train_ds);
  const Encoded val_data = encode_dataset(model, validation_ds);

  TrainedModel result{model, tc, {}};
  TrainingHistory& history = result.history;
  history.initial_train_loss = evaluate(model, train_data).loss;

  Rng order_rng(tc.seed ^ 0x9e3779b97f4a7c15ULL);
  Rng dropout_rng(tc.seed ^ 0xd1b54a32d192ed03ULL);
  Optimizer optimizer(tc.optimizer, tc.learning_rate, model.parameters());
  Parameters grads = model.parameters().zeros_like();
  Parameters best = model.parameters();
  history.best_validation_accuracy = -1.0;
  int since_best = 0;

  std::vector<std::size_t> order(train_data.features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(tc.batch_size);

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    shuffle(order, order_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      grads.set_zero();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const double loss =
            accumulate(model, train_data.features[i], train_data.labels[i], &dropout_rng, grads);
        if (!std::isfinite(loss)) {
          throw TrainingError(fmt::format("non-finite loss at epoch {} on sample '{}'", epoch,
                                          train_ds[i].id));
        }
        epoch_loss += loss;
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t t = 0; t < grads.size(); ++t) grads[t] *= scale;
      if (tc.gradient_clip > 0.0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (norm > tc.gradient_clip) {
          for (std::size_t t = 0; t < grads.size(); ++t) grads[t] *= tc.gradient_clip / norm;
        }
      }
      optimizer.step(model.parameters(), grads);
      if (!model.parameters().all_finite()) {
        throw TrainingError(fmt::format("parameters became non-finite at epoch {}", epoch));
      }
    }

    const Evaluation val = evaluate(model, val_data);
    history.epochs.push_back({epoch, epoch_loss / static_cast<double>(order.size()), val.loss,
                              val.accuracy});
    spdlog::debug("epoch {}: train loss {:.4f}, validation loss {:.4f}, accuracy {:.4f}", epoch,
                  history.epochs.back().train_loss, val.loss, val.accuracy);
    if (val.accuracy > history.best_validation_accuracy) {
      history.best_validation_accuracy = val.accuracy;
      history.best_epoch = epoch;
      best = model.parameters();
      since_best = 0;
    } else if (tc.early_stop_patience > 0 && ++since_best >= tc.early_stop_patience) {
      history.stopped_early = epoch < tc.epochs;
      break;
    }
  }

  model.parameters() = best;
  result.model = std::move(model);
  return result;
}

InferenceResult predict(const TrainedModel& tm, std::string_view text) {
  const double p = tm.model.probability(text);
  if (!std::isfinite(p)) throw DataError("model produced a non-finite probability");
  return {p, threshold_label(p, tm.model.threshold())};
}

std::vector<std::pair<std::string, InferenceResult>> predict_batch(const TrainedModel& tm,
                                                                   const LabeledDataset& ds) {
  if (ds.empty()) throw DataError(fmt::format("cannot predict on empty dataset '{}'", ds.name()));
  std::vector<std::pair<std::string, InferenceResult>> out;
  out.reserve(ds.size());
  for (const Sample& s : ds) {
    try {
      out.emplace_back(s.id, predict(tm, s.text));
    } catch (const Error& e) {
      throw DataError(fmt::format("sample '{}': {}", s.id, e.what()));
    }
  }
  return out;
}

void write_predictions(const std::vector<std::pair<std::string, InferenceResult>>& predictions,
                       const std::filesystem::path& path) {
  TsvWriter w(path);
  w.write_row({"id", "probability", "label"});
  for (const auto& [id, r] : predictions) {
    w.write_row({id, fmt::format("{:.9f}", r.probability), std::to_string(r.label)});
  }
  w.close();
}

}  // namespace trivote
