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

#pragma once

#include <set>
#include <string>

#include "json.hpp"

#include "hte/ensemble.hpp"

namespace hte {

using Json = nlohmann::ordered_json;

/// Every training key, in the order config_to_json writes them.
const std::set<std::string>& train_config_keys();

/// Complete, canonical JSON form; key order and number formatting are
/// stable so the text can be embedded in model files.
Json config_to_json(const TrainConfig& cfg);

/// Reads the training keys of `j` on top of `base`. Keys outside
/// train_config_keys() and `extra_allowed` raise ConfigError.
TrainConfig config_from_json(const Json& j, TrainConfig base = {},
                             const std::set<std::string>& extra_allowed = {});

/// Applies one `key=value` override; the value is parsed as JSON when
/// possible and as a bare string otherwise.
void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value);

}  // namespace hte
