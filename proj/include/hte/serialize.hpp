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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hte/ensemble.hpp"

namespace hte {

/// Binary model container, little-endian throughout:
///
///   "HTEMODEL" | u32 format version
///   header       u8 mode, u8 partition, u32 d, u32 T, u64 seed,
///                str rng algorithm id, str effective config (JSON),
///                str target name, u32 count + str feature names
///   context      f64 s_hat, f64 h_hat, f64 clip bound
///   standardizer u8 scale features, u8 scale target, f64 y mean, f64 y scale,
///                f64[d] means, f64[d] scales
///   T members    u8 partition tag, partition payload, u8 model tag, model payload
///   u32 CRC-32 of every preceding byte
///
/// str is u32 length + bytes. Grid payload: f64[d*d] rotation (row-major),
/// f64[d] scales, f64[d] translation, f64 h_lower, f64 h_upper,
/// u64 cells, i64[cells*d] bin keys in cell order. Adaptive payload:
/// f64[d*d] rotation, u64 m, u64 nodes, then per node in preorder
/// i32 dim, f64 threshold, i32 left, i32 right, u32 cell.
/// Constant payload: f64 fallback, u64 cells, f64[cells]. Kernel payload:
/// f64 gamma, f64 lambda2, f64 clip, u64 n, f64 fallback, u64 cells, then per
/// cell f64 mean, u64 n_j, f64[n_j*d] support, f64[n_j] alpha.
std::vector<std::uint8_t> serialize(const EnsembleModel& model);

/// Throws FormatError on bad magic, unknown version, checksum mismatch,
/// truncation or inconsistent payloads.
EnsembleModel deserialize(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const EnsembleModel& model);
EnsembleModel load_model(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace hte
