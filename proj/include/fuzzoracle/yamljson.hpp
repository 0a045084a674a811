// Copyright 2026 The Fuzzoracle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// YAML-to-JSON bridging so every config and spec loader works from one
// document model regardless of the on-disk format.

#ifndef FUZZORACLE_YAMLJSON_H_
#define FUZZORACLE_YAMLJSON_H_

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

inline nlohmann::json YamlNodeToJson(const YAML::Node &node) {
  using nlohmann::json;
  switch (node.Type()) {
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Scalar: {
      // YAML scalars are untyped text; recover bool/int/float when the
      // scalar was not quoted.
      const std::string &raw = node.Scalar();
      if (node.Tag() == "!") return raw;  // explicitly quoted
      if (raw == "true" || raw == "True") return true;
      if (raw == "false" || raw == "False") return false;
      if (raw == "null" || raw == "~" || raw.empty()) return nullptr;
      try {
        size_t pos = 0;
        long long v = std::stoll(raw, &pos);
        if (pos == raw.size()) return v;
      } catch (...) {
      }
      try {
        size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos == raw.size()) return v;
      } catch (...) {
      }
      return raw;
    }
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto &item : node) arr.push_back(YamlNodeToJson(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto &kv : node)
        obj[kv.first.as<std::string>()] = YamlNodeToJson(kv.second);
      return obj;
    }
    default:
      return nullptr;
  }
}

// Parses a YAML or JSON document into one JSON value. `hint_yaml` selects
// the parser; JSON is valid YAML, so YAML is also the fallback.
inline nlohmann::json ParseStructuredDocument(const std::string &text,
                                              bool hint_yaml) {
  if (!hint_yaml) {
    auto parsed = nlohmann::json::parse(text, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
  }
  try {
    return YamlNodeToJson(YAML::Load(text));
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("unparsable document: ") + e.what());
  }
}

inline bool PathLooksYaml(const std::filesystem::path &p) {
  auto ext = ToLower(p.extension().string());
  return ext == ".yaml" || ext == ".yml";
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_YAMLJSON_H_
