#include <fstream>

#include <fmt/format.h>

#include "trivote/error.hpp"
#include "trivote/pipeline.hpp"

namespace trivote {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? (base / path).lexically_normal() : path;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    const auto& paths = j.at("paths");
    c.train_path = resolve(base_dir, paths.at("train").get<std::string>());
    if (paths.contains("test") && !paths.at("test").is_null()) {
      c.test_path = resolve(base_dir, paths.at("test").get<std::string>());
    }
    c.output_dir = resolve(base_dir, paths.at("output").get<std::string>());

    if (j.contains("schema")) c.schema = ColumnMapping::from_json(j.at("schema"));
    if (j.contains("encoders")) {
      for (const auto& e : j.at("encoders")) c.encoders.push_back(EncoderDefinition::from_json(e, base_dir));
    }
    const auto& models = j.at("models");
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string tag(kModelTags[k]);
      if (!models.contains(tag)) throw ConfigError(fmt::format("models.{} is missing", tag));
      c.models[k] = model_config_from_json(models.at(tag));
    }
    if (j.contains("training")) c.training = TrainConfig::from_json(j.at("training"));
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
      throw ConfigError("validation_fraction must be in (0, 1)");
    }
    if (j.contains("evaluation")) {
      const auto& ev = j.at("evaluation");
      c.averaging = parse_averaging(ev.value("averaging", std::string("macro")));
      c.baseline = ev.value("baseline", false);
    }
    c.parallel = j.value("parallel", false);
    c.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    return from_json(j, std::filesystem::absolute(path).parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json encoders_json = nlohmann::json::array();
  for (const EncoderDefinition& e : encoders) encoders_json.push_back(e.to_json());
  nlohmann::json models_json;
  for (std::size_t k = 0; k < 3; ++k) models_json[std::string(kModelTags[k])] = trivote::to_json(models[k]);
  nlohmann::json paths{{"train", train_path.string()}, {"output", output_dir.string()}};
  paths["test"] = test_path ? nlohmann::json(test_path->string()) : nlohmann::json(nullptr);
  return {{"paths", paths},
          {"schema", schema.to_json()},
          {"encoders", encoders_json},
          {"models", models_json},
          {"training", training.to_json()},
          {"validation_fraction", validation_fraction},
          {"evaluation", {{"averaging", to_string(averaging)}, {"baseline", baseline}}},
          {"parallel", parallel},
          {"seed", seed}};
}

}  // namespace trivote
