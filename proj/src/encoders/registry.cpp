#include <fmt/format.h>
#include <fmt/ranges.h>

#include "trivote/encoders.hpp"
#include "trivote/error.hpp"

namespace trivote {

void EncoderRegistry::add(EncoderHandle encoder) {
  const std::string name = encoder->spec().name;
  if (!encoders_.emplace(name, std::move(encoder)).second) {
    throw ConfigError(fmt::format("encoder '{}' is registered twice", name));
  }
}

EncoderHandle EncoderRegistry::get(std::string_view name) const {
  auto it = encoders_.find(name);
  if (it == encoders_.end()) {
    throw ConfigError(fmt::format("unknown encoder '{}' (registered: {})", name,
                                  fmt::join(names(), ", ")));
  }
  return it->second;
}

bool EncoderRegistry::contains(std::string_view name) const {
  return encoders_.find(name) != encoders_.end();
}

std::vector<std::string> EncoderRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : encoders_) out.push_back(name);
  return out;
}

EncoderDefinition EncoderDefinition::from_json(const nlohmann::json& j,
                                               const std::filesystem::path& base_dir) {
  EncoderDefinition d;
  try {
    d.name = j.at("name").get<std::string>();
    d.type = j.at("type").get<std::string>();
    d.max_tokens = j.value("max_tokens", 128);
    if (d.type == "hash") {
      d.dim = j.value("dim", 64);
      d.seed = j.value("seed", std::uint64_t{0});
    } else if (d.type == "bert") {
      d.path = j.at("path").get<std::string>();
      if (d.path.is_relative()) d.path = base_dir / d.path;
      const std::string pooling = j.value("pooling", std::string("cls"));
      if (pooling == "cls") {
        d.pooling = BertPooling::kCls;
      } else if (pooling == "pooler") {
        d.pooling = BertPooling::kPooler;
      } else {
        throw ConfigError(fmt::format("encoder '{}': pooling must be cls or pooler", d.name));
      }
    } else {
      throw ConfigError(fmt::format("encoder '{}': type must be hash or bert", d.name));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("encoder definition: {}", e.what()));
  }
  if (d.name.empty()) throw ConfigError("encoder definition has an empty name");
  return d;
}

nlohmann::json EncoderDefinition::to_json() const {
  nlohmann::json j{{"name", name}, {"type", type}, {"max_tokens", max_tokens}};
  if (type == "hash") {
    j["dim"] = dim;
    j["seed"] = seed;
  } else {
    j["path"] = path.string();
    j["pooling"] = pooling == BertPooling::kCls ? "cls" : "pooler";
  }
  return j;
}

EncoderHandle make_encoder(const EncoderDefinition& def) {
  if (def.type == "hash") {
    return std::make_shared<HashEncoder>(def.name, def.dim, def.seed, def.max_tokens);
  }
  if (def.type == "bert") {
    return std::make_shared<BertEncoder>(def.name, def.path, def.max_tokens, def.pooling);
  }
  throw ConfigError(fmt::format("encoder '{}': unknown type '{}'", def.name, def.type));
}

EncoderRegistry build_registry(const std::vector<EncoderDefinition>& defs) {
  EncoderRegistry r;
  r.add(std::make_shared<HashEncoder>());
  for (const EncoderDefinition& d : defs) r.add(make_encoder(d));
  return r;
}

}  // namespace trivote
