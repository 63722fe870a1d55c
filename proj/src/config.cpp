/*
 * Copyright 2026 The HTE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hte/config.hpp"

#include "hte/error.hpp"

namespace hte {

const std::set<std::string>& train_config_keys() {
  static const std::set<std::string> keys = {
      "mode",   "partition", "T",        "candidates", "s_min",      "s_max",
      "candidate_scales",    "m",        "gamma",      "lambda2",    "lambda1",
      "q",      "clip",      "small_cell", "fallback", "validation_fraction",
      "seed",   "standardize_features",  "standardize_target"};
  return keys;
}

Json config_to_json(const TrainConfig& cfg) {
  Json j;
  j["mode"] = to_string(cfg.mode);
  j["partition"] = to_string(cfg.partition);
  j["T"] = cfg.members;
  j["candidates"] = cfg.candidates;
  j["s_min"] = cfg.s_min;
  j["s_max"] = cfg.s_max;
  Json pairs = Json::array();
  for (const auto& p : cfg.candidate_scales) pairs.push_back(Json::array({p.s_min, p.s_max}));
  j["candidate_scales"] = pairs;
  j["m"] = cfg.min_leaf;
  j["gamma"] = cfg.gamma;
  j["lambda2"] = cfg.lambda2;
  j["lambda1"] = cfg.lambda1;
  j["q"] = cfg.q;
  if (cfg.clip_bound)
    j["clip"] = *cfg.clip_bound;
  else
    j["clip"] = "max_abs_y";
  j["small_cell"] = cfg.small_cell;
  j["fallback"] = to_string(cfg.fallback);
  j["validation_fraction"] = cfg.validation_fraction;
  j["seed"] = cfg.seed;
  j["standardize_features"] = cfg.standardize_features;
  j["standardize_target"] = cfg.standardize_target;
  return j;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("invalid config field \"" + key + "\": " + why);
}

double as_number(const Json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

std::size_t as_count(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) bad(key, "must not be negative");
    return static_cast<std::size_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == static_cast<double>(static_cast<std::size_t>(d)))
      return static_cast<std::size_t>(d);
  }
  bad(key, "expected a non-negative integer");
}

std::string as_string(const Json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

}  // namespace

TrainConfig config_from_json(const Json& j, TrainConfig cfg,
                             const std::set<std::string>& extra_allowed) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!train_config_keys().contains(key) && !extra_allowed.contains(key))
      throw ConfigError("unknown config key \"" + key + "\"");
  }
  for (const auto& [key, v] : j.items()) {
    if (key == "mode") {
      cfg.mode = mode_from_string(as_string(v, key));
    } else if (key == "partition") {
      cfg.partition = partition_from_string(as_string(v, key));
    } else if (key == "T") {
      cfg.members = as_count(v, key);
    } else if (key == "candidates") {
      cfg.candidates = as_count(v, key);
    } else if (key == "s_min") {
      cfg.s_min = as_number(v, key);
    } else if (key == "s_max") {
      cfg.s_max = as_number(v, key);
    } else if (key == "candidate_scales") {
      if (!v.is_array()) bad(key, "expected an array of [s_min, s_max] pairs");
      cfg.candidate_scales.clear();
      for (const auto& p : v) {
        if (!p.is_array() || p.size() != 2) bad(key, "expected an array of [s_min, s_max] pairs");
        cfg.candidate_scales.push_back({as_number(p[0], key), as_number(p[1], key)});
      }
    } else if (key == "m") {
      cfg.min_leaf = as_count(v, key);
    } else if (key == "gamma") {
      cfg.gamma = as_number(v, key);
    } else if (key == "lambda2") {
      cfg.lambda2 = as_number(v, key);
    } else if (key == "lambda1") {
      cfg.lambda1 = as_number(v, key);
    } else if (key == "q") {
      cfg.q = as_number(v, key);
    } else if (key == "clip") {
      if (v.is_string()) {
        if (v.get<std::string>() != "max_abs_y") bad(key, "expected \"max_abs_y\" or a number");
        cfg.clip_bound.reset();
      } else {
        cfg.clip_bound = as_number(v, key);
      }
    } else if (key == "small_cell") {
      cfg.small_cell = as_count(v, key);
    } else if (key == "fallback") {
      cfg.fallback = fallback_rule_from_string(as_string(v, key));
    } else if (key == "validation_fraction") {
      cfg.validation_fraction = as_number(v, key);
    } else if (key == "seed") {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        bad(key, "expected a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "standardize_features") {
      cfg.standardize_features = as_bool(v, key);
    } else if (key == "standardize_target") {
      cfg.standardize_target = as_bool(v, key);
    }
  }
  return cfg;
}

void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value) {
  Json v = Json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) v = value;
  Json j;
  j[key] = v;
  cfg = config_from_json(j, cfg);
}

}  // namespace hte
