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

#include "hte/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "hte/config.hpp"
#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

namespace {

constexpr char kMagic[8] = {'H', 'T', 'E', 'M', 'O', 'D', 'E', 'L'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      std::uint8_t b[sizeof(T)];
      std::memcpy(b, &v, sizeof(T));
      for (std::size_t i = sizeof(T); i > 0; --i) out_.push_back(b[i - 1]);
    } else {
      raw(&v, sizeof(T));
    }
  }

  void u8(std::uint8_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void i32(std::int32_t v) { put(v); }
  void i64(std::int64_t v) { put(v); }
  void f64(double v) { put(v); }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }

  void matrix(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }

  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t tmp[sizeof(T)];
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      for (std::size_t i = 0; i < sizeof(T); ++i) tmp[i] = b_[pos_ + sizeof(T) - 1 - i];
    } else {
      std::memcpy(tmp, b_.data() + pos_, sizeof(T));
    }
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, tmp, sizeof(T));
    return v;
  }

  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int32_t i32() { return get<std::int32_t>(); }
  std::int64_t i64() { return get<std::int64_t>(); }
  double f64() { return get<double>(); }

  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  /// Element count that must still fit in the buffer at `elem_size` bytes each.
  std::size_t count(std::size_t elem_size) {
    const std::uint64_t n = u64();
    if (elem_size > 0 && n > (b_.size() - pos_) / elem_size) throw FormatError("model file: count exceeds payload");
    return static_cast<std::size_t>(n);
  }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
    return m;
  }

  void need(std::size_t n) const {
    if (n > b_.size() - pos_) throw FormatError("model file is truncated");
  }

  bool at_end() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(std::span<const std::uint8_t> data) {
  uLong c = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
    c = crc32(c, data.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

enum : std::uint8_t { kGridTag = 0, kAdaptiveTag = 1, kConstantTag = 0, kKernelTag = 1 };

void write_partition(Writer& w, const Partition& p) {
  if (const auto* g = std::get_if<GridPartition>(&p)) {
    const auto& h = g->transform();
    w.u8(kGridTag);
    w.matrix(h.rotation);
    for (Eigen::Index i = 0; i < h.scales.size(); ++i) w.f64(h.scales[i]);
    for (Eigen::Index i = 0; i < h.translation.size(); ++i) w.f64(h.translation[i]);
    w.f64(h.h_lower);
    w.f64(h.h_upper);
    w.u64(g->n_cells());
    for (const auto& key : g->keys())
      for (std::int64_t k : key) w.i64(k);
  } else {
    const auto& t = std::get<AdaptiveTree>(p);
    w.u8(kAdaptiveTag);
    w.matrix(t.rotation());
    w.u64(t.min_leaf());
    w.u64(t.nodes().size());
    for (const auto& n : t.nodes()) {
      w.i32(n.dim);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
      w.u32(n.cell);
    }
  }
}

Partition read_partition(Reader& r, std::size_t d) {
  const auto dd = static_cast<Eigen::Index>(d);
  const std::uint8_t tag = r.u8();
  if (tag == kGridTag) {
    HistogramTransform h;
    h.rotation = r.matrix(dd, dd);
    h.scales.resize(dd);
    h.translation.resize(dd);
    for (Eigen::Index i = 0; i < dd; ++i) h.scales[i] = r.f64();
    for (Eigen::Index i = 0; i < dd; ++i) h.translation[i] = r.f64();
    h.h_lower = r.f64();
    h.h_upper = r.f64();
    const std::size_t cells = r.count(8 * d);
    std::vector<BinKey> keys(cells, BinKey(d));
    for (auto& key : keys)
      for (auto& k : key) k = r.i64();
    return GridPartition(std::move(h), std::move(keys));
  }
  if (tag == kAdaptiveTag) {
    Eigen::MatrixXd rotation = r.matrix(dd, dd);
    const std::uint64_t min_leaf = r.u64();
    const std::size_t count = r.count(24);
    std::vector<AdaptiveTree::Node> nodes(count);
    for (auto& n : nodes) {
      n.dim = r.i32();
      n.threshold = r.f64();
      n.left = r.i32();
      n.right = r.i32();
      n.cell = r.u32();
    }
    return AdaptiveTree(std::move(rotation), std::move(nodes), static_cast<std::size_t>(min_leaf));
  }
  throw FormatError("model file: unknown partition tag " + std::to_string(tag));
}

void write_model(Writer& w, const CellModel& m, std::size_t d) {
  if (const auto* c = std::get_if<ConstantModel>(&m)) {
    w.u8(kConstantTag);
    w.f64(c->fallback);
    w.u64(c->values.size());
    for (double v : c->values) w.f64(v);
    return;
  }
  const auto& k = std::get<KernelCellModel>(m);
  w.u8(kKernelTag);
  w.f64(k.gamma);
  w.f64(k.lambda2);
  w.f64(k.clip_bound);
  w.u64(k.n_total);
  w.f64(k.fallback);
  w.u64(k.cells.size());
  for (const auto& cell : k.cells) {
    w.f64(cell.mean);
    w.u64(static_cast<std::uint64_t>(cell.support.rows()));
    for (Eigen::Index i = 0; i < cell.support.rows(); ++i)
      for (std::size_t j = 0; j < d; ++j) w.f64(cell.support(i, static_cast<Eigen::Index>(j)));
    for (Eigen::Index i = 0; i < cell.alpha.size(); ++i) w.f64(cell.alpha[i]);
  }
}

CellModel read_model(Reader& r, std::size_t d) {
  const std::uint8_t tag = r.u8();
  if (tag == kConstantTag) {
    ConstantModel c;
    c.fallback = r.f64();
    c.values.resize(r.count(8));
    for (double& v : c.values) v = r.f64();
    return c;
  }
  if (tag != kKernelTag) throw FormatError("model file: unknown cell model tag " + std::to_string(tag));
  KernelCellModel k;
  k.gamma = r.f64();
  k.lambda2 = r.f64();
  k.clip_bound = r.f64();
  k.n_total = static_cast<std::size_t>(r.u64());
  k.fallback = r.f64();
  k.cells.resize(r.count(16));
  for (auto& cell : k.cells) {
    cell.mean = r.f64();
    const auto nj = static_cast<Eigen::Index>(r.count(8 * (d + 1)));
    cell.support.resize(nj, static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < nj; ++i)
      for (std::size_t j = 0; j < d; ++j) cell.support(i, static_cast<Eigen::Index>(j)) = r.f64();
    cell.alpha.resize(nj);
    for (Eigen::Index i = 0; i < nj; ++i) cell.alpha[i] = r.f64();
  }
  return k;
}

}  // namespace

std::vector<std::uint8_t> serialize(const EnsembleModel& model) {
  const std::size_t d = model.dim();
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(model.format_version);

  w.u8(static_cast<std::uint8_t>(model.config.mode == Mode::kNht ? 0 : 1));
  w.u8(static_cast<std::uint8_t>(model.config.partition == PartitionKind::kGrid ? 0 : 1));
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(model.members.size()));
  w.u64(model.config.seed);
  w.str(kRngAlgorithmId);
  w.str(config_to_json(model.config).dump());
  w.str(model.target_name);
  w.u32(static_cast<std::uint32_t>(model.feature_names.size()));
  for (const auto& f : model.feature_names) w.str(f);

  w.f64(model.context.scale_hat);
  w.f64(model.context.bin_width_hat);
  w.f64(model.context.clip_bound);

  const Standardizer& s = model.standardizer;
  w.u8(s.scale_features ? 1 : 0);
  w.u8(s.scale_target ? 1 : 0);
  w.f64(s.y_mean);
  w.f64(s.y_scale);
  for (Eigen::Index j = 0; j < s.mean.size(); ++j) w.f64(s.mean[j]);
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) w.f64(s.scale[j]);

  for (const auto& m : model.members) {
    if (dim(m.partition) != d) throw FormatError("member dimension differs from model dimension");
    write_partition(w, m.partition);
    write_model(w, m.model, d);
  }
  const std::uint32_t sum = crc(w.bytes());
  w.u32(sum);
  return std::move(w.bytes());
}

EnsembleModel deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not an HTE model file");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.subspan(bytes.size() - 4));
  if (crc(body) != tail.u32()) throw FormatError("model file checksum mismatch");

  Reader r(body.subspan(sizeof(kMagic)));
  EnsembleModel model;
  model.format_version = r.u32();
  if (model.format_version != kModelFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(model.format_version));

  const std::uint8_t mode = r.u8();
  const std::uint8_t part = r.u8();
  const std::size_t d = r.u32();
  const std::size_t members = r.u32();
  const std::uint64_t seed = r.u64();
  const std::string rng_id = r.str();
  if (rng_id != kRngAlgorithmId) throw FormatError("model was produced by random source \"" + rng_id + "\"");
  try {
    model.config = config_from_json(Json::parse(r.str()));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("model file: bad embedded config: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model file: bad embedded config: ") + e.what());
  }
  if (mode > 1 || part > 1 || (mode == 0) != (model.config.mode == Mode::kNht) ||
      (part == 0) != (model.config.partition == PartitionKind::kGrid) || seed != model.config.seed ||
      members != model.config.members)
    throw FormatError("model header disagrees with embedded config");
  model.target_name = r.str();
  const std::uint32_t names = r.u32();
  for (std::uint32_t i = 0; i < names; ++i) model.feature_names.push_back(r.str());

  model.context.scale_hat = r.f64();
  model.context.bin_width_hat = r.f64();
  model.context.clip_bound = r.f64();

  Standardizer& s = model.standardizer;
  s.scale_features = r.u8() != 0;
  s.scale_target = r.u8() != 0;
  s.y_mean = r.f64();
  s.y_scale = r.f64();
  const auto dd = static_cast<Eigen::Index>(d);
  s.mean.resize(dd);
  s.scale.resize(dd);
  for (Eigen::Index j = 0; j < dd; ++j) s.mean[j] = r.f64();
  for (Eigen::Index j = 0; j < dd; ++j) s.scale[j] = r.f64();

  model.members.reserve(members);
  for (std::size_t t = 0; t < members; ++t) {
    Partition p = read_partition(r, d);
    CellModel m = read_model(r, d);
    if (n_cells(m) != n_cells(p)) throw FormatError("member cell count mismatch");
    model.members.push_back({std::move(p), std::move(m)});
  }
  if (!r.at_end()) throw FormatError("model file has trailing bytes");
  return model;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_model(const std::filesystem::path& path, const EnsembleModel& model) {
  const auto bytes = serialize(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

EnsembleModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return deserialize(bytes);
}

}  // namespace hte
