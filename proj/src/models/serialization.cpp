#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "trivote/checksum.hpp"
#include "trivote/error.hpp"
#include "trivote/models.hpp"

namespace trivote {
namespace {

constexpr const char* kFormat = "trivote-model/1";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kBlob = "parameters.bin";

std::vector<unsigned char> to_bytes(const std::vector<double>& flat) {
  std::vector<unsigned char> bytes(flat.size() * 8);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &flat[i], 8);
    for (int b = 0; b < 8; ++b) bytes[8 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return bytes;
}

std::vector<double> from_bytes(const std::vector<unsigned char>& bytes) {
  std::vector<double> flat(bytes.size() / 8);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[8 * i + b];
    std::memcpy(&flat[i], &bits, 8);
  }
  return flat;
}

std::string sha256(const std::vector<unsigned char>& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex_digest();
}

}  // namespace

void save_model(const TrainedModel& tm, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("{}: cannot create directory: {}", dir.string(), ec.message()));

  const Parameters& params = tm.model.parameters();
  const std::vector<unsigned char> blob = to_bytes(params.flatten());

  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    tensors.push_back({{"name", params.name(i)}, {"rows", params[i].rows()}, {"cols", params[i].cols()}});
  }
  nlohmann::json encoders = nlohmann::json::array();
  for (const EncoderHandle& e : tm.model.encoders()) {
    encoders.push_back({{"name", e->spec().name},
                        {"version", e->version()},
                        {"kind", to_string(e->spec().kind)},
                        {"dim", e->spec().dim}});
  }

  nlohmann::json manifest{
      {"format", kFormat},
      {"architecture", to_string(tm.model.architecture())},
      {"config", to_json(tm.model.config())},
      {"training", tm.train_config.to_json()},
      {"seed", tm.train_config.seed},
      {"encoders", encoders},
      {"head_input_width", tm.model.head_input_width()},
      {"parameters", {{"file", kBlob}, {"sha256", sha256(blob)}, {"tensors", tensors}}},
      {"metrics",
       {{"best_epoch", tm.history.best_epoch},
        {"best_validation_accuracy", tm.history.best_validation_accuracy},
        {"initial_train_loss", tm.history.initial_train_loss}}},
      {"history", tm.history.to_json()}};

  std::ofstream blob_out(dir / kBlob, std::ios::binary | std::ios::trunc);
  blob_out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  std::ofstream manifest_out(dir / kManifest, std::ios::trunc);
  manifest_out << manifest.dump(2) << '\n';
  if (!blob_out || !manifest_out) throw DataError(fmt::format("{}: failed to write model", dir.string()));
}

namespace {

TrainedModel load_model_unchecked(const std::filesystem::path& dir,
                                  const EncoderRegistry& registry) {
  std::ifstream manifest_in(dir / kManifest);
  if (!manifest_in) throw DataError(fmt::format("{}: no {} found", dir.string(), kManifest));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: {}", (dir / kManifest).string(), e.what()));
  }
  if (manifest.value("format", "") != kFormat) {
    throw DataError(fmt::format("{}: unsupported model format", dir.string()));
  }

  TrainedModel tm{build_model(model_config_from_json(manifest.at("config")), registry),
                  TrainConfig::from_json(manifest.at("training")),
                  TrainingHistory::from_json(manifest.at("history"))};

  const auto current = tm.model.encoder_versions();
  for (const auto& e : manifest.at("encoders")) {
    const std::string name = e.at("name").get<std::string>();
    const std::string recorded = e.at("version").get<std::string>();
    auto it = current.find(name);
    if (it == current.end() || it->second != recorded) {
      throw ConfigError(fmt::format(
          "{}: encoder '{}' drifted since training (trained with '{}', configured '{}')",
          dir.string(), name, recorded, it == current.end() ? "<missing>" : it->second));
    }
  }

  std::ifstream blob_in(dir / kBlob, std::ios::binary);
  if (!blob_in) throw DataError(fmt::format("{}: no {} found", dir.string(), kBlob));
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(blob_in)),
                                  std::istreambuf_iterator<char>());
  const auto& pinfo = manifest.at("parameters");
  if (sha256(blob) != pinfo.at("sha256").get<std::string>()) {
    throw DataError(fmt::format("{}: parameter checksum mismatch", dir.string()));
  }
  Parameters& params = tm.model.parameters();
  const auto& tensors = pinfo.at("tensors");
  if (tensors.size() != params.size()) {
    throw ConfigError(fmt::format("{}: parameter layout differs from the configured architecture",
                                  dir.string()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].at("name").get<std::string>() != params.name(i) ||
        tensors[i].at("rows").get<Eigen::Index>() != params[i].rows() ||
        tensors[i].at("cols").get<Eigen::Index>() != params[i].cols()) {
      throw ConfigError(fmt::format("{}: tensor '{}' does not match the architecture",
                                    dir.string(), params.name(i)));
    }
  }
  if (blob.size() % 8 != 0) throw DataError(fmt::format("{}: truncated parameter blob", dir.string()));
  params.assign(from_bytes(blob));
  tm.model.mark_initialized();
  return tm;
}

}  // namespace

TrainedModel load_model(const std::filesystem::path& dir, const EncoderRegistry& registry) {
  try {
    return load_model_unchecked(dir, registry);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: malformed manifest: {}", dir.string(), e.what()));
  }
}

}  // namespace trivote
