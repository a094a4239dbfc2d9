/*
 * Copyright (c) 2026, The f2ind Authors.
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
#include "f2ind/data_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "f2ind/errors.hpp"
#include "f2ind/rng.hpp"

namespace f2ind {
namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve) { out_.reserve(reserve); }

  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      std::ostringstream os;
      os << "truncated embedding file: need " << n << " bytes for " << what
         << " at offset " << pos_ << ", have " << remaining();
      throw TruncatedError(os.str());
    }
  }
  std::uint8_t u8() { return bytes_[pos_++]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

bool all_finite(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

std::size_t Dataset::count_label(std::uint8_t label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [&](const Sample& s) { return s.label == label; }));
}

std::size_t Dataset::count_missing_images() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [](const Sample& s) { return !s.has_image; }));
}

void Dataset::validate() const {
  if (text_dim == 0 || image_dim == 0) {
    throw CorruptError("dataset dimensions must be positive");
  }
  std::unordered_set<std::uint64_t> ids;
  ids.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    std::ostringstream where;
    where << "sample " << i << " (id " << s.sample_id << "): ";
    if (s.label > 1) throw CorruptError(where.str() + "label must be 0 or 1");
    if (s.text_emb.size() != text_dim) {
      throw CorruptError(where.str() + "text embedding length differs from text_dim");
    }
    if (s.has_image && s.image_emb.size() != image_dim) {
      throw CorruptError(where.str() + "image embedding length differs from image_dim");
    }
    if (!s.has_image && !s.image_emb.empty()) {
      throw CorruptError(where.str() + "image embedding present but has_image is false");
    }
    if (!all_finite(s.text_emb) || !all_finite(s.image_emb)) {
      throw CorruptError(where.str() + "non-finite embedding component");
    }
    if (!ids.insert(s.sample_id).second) {
      throw CorruptError(where.str() + "duplicate sample_id");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.text_dim = text_dim;
  out.image_dim = image_dim;
  out.samples.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= samples.size()) throw IndexError("subset index out of range");
    out.samples.push_back(samples[idx]);
  }
  return out;
}

std::size_t encoded_size(const Dataset& dataset) noexcept {
  std::size_t total = kEmbeddingHeaderBytes;
  for (const Sample& s : dataset.samples) {
    total += kEmbeddingRecordFixedBytes + 4 * std::size_t{dataset.text_dim};
    if (s.has_image) total += 4 * std::size_t{dataset.image_dim};
  }
  return total;
}

std::vector<std::uint8_t> encode_embeddings(const Dataset& dataset) {
  dataset.validate();
  if (dataset.samples.size() > UINT32_MAX) {
    throw ConfigError("too many samples for the embedding format");
  }
  ByteWriter w(encoded_size(dataset));
  w.raw(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  w.u32(static_cast<std::uint32_t>(dataset.samples.size()));
  w.u32(dataset.text_dim);
  w.u32(dataset.image_dim);
  for (const Sample& s : dataset.samples) {
    w.u64(s.sample_id);
    w.u8(s.label);
    w.u8(s.has_image ? 1 : 0);
    for (float v : s.text_emb) w.f32(v);
    if (s.has_image) {
      for (float v : s.image_emb) w.f32(v);
    }
  }
  return w.take();
}

Dataset decode_embeddings(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kEmbeddingMagic) ||
      std::memcmp(bytes.data(), kEmbeddingMagic, sizeof(kEmbeddingMagic)) != 0) {
    throw FormatError("bad magic: not an F2EMB1 embedding file");
  }
  ByteReader r(bytes.subspan(sizeof(kEmbeddingMagic)));
  r.need(12, "header");
  const std::uint32_t n = r.u32();
  Dataset ds;
  ds.text_dim = r.u32();
  ds.image_dim = r.u32();
  if (ds.text_dim == 0 || ds.image_dim == 0) {
    throw CorruptError("header declares a zero embedding dimension");
  }
  ds.samples.reserve(std::min<std::size_t>(n, r.remaining() / kEmbeddingRecordFixedBytes + 1));
  for (std::uint32_t i = 0; i < n; ++i) {
    r.need(kEmbeddingRecordFixedBytes, "record header");
    Sample s;
    s.sample_id = r.u64();
    s.label = r.u8();
    const std::uint8_t flag = r.u8();
    if (s.label > 1 || flag > 1) {
      std::ostringstream os;
      os << "record " << i << ": label/has_image byte out of range";
      throw CorruptError(os.str());
    }
    s.has_image = flag == 1;
    r.need(4 * std::size_t{ds.text_dim}, "text embedding");
    s.text_emb.resize(ds.text_dim);
    for (float& v : s.text_emb) v = r.f32();
    if (s.has_image) {
      r.need(4 * std::size_t{ds.image_dim}, "image embedding");
      s.image_emb.resize(ds.image_dim);
      for (float& v : s.image_emb) v = r.f32();
    }
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) {
    std::ostringstream os;
    os << "payload length disagrees with header: " << r.remaining()
       << " bytes beyond the declared " << n << " records";
    throw CorruptError(os.str());
  }
  ds.validate();
  return ds;
}

Dataset read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return decode_embeddings(bytes);
}

void write_embeddings(const Dataset& dataset, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_embeddings(dataset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("synthetic n must be at least 2");
  if (!(cfg.fake_fraction > 0.0 && cfg.fake_fraction < 1.0)) {
    throw ConfigError("fake_fraction must lie in (0, 1)");
  }
  if (!(cfg.missing_image_fraction >= 0.0 && cfg.missing_image_fraction <= 1.0)) {
    throw ConfigError("missing_image_fraction must lie in [0, 1]");
  }
  if (!(cfg.separation >= 0.0) || !std::isfinite(cfg.separation)) {
    throw ConfigError("separation must be a finite value >= 0");
  }
  if (cfg.text_dim == 0 || cfg.image_dim == 0) {
    throw ConfigError("embedding dimensions must be positive");
  }
  const auto n = cfg.n;
  const auto n_fake = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.fake_fraction));
  if (n_fake == 0 || n_fake >= n) {
    throw ConfigError("fake_fraction leaves one class empty after rounding");
  }
  const auto n_missing = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * cfg.missing_image_fraction));

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto unit_direction = [&](std::uint32_t dim) {
    std::vector<double> u(dim);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& v : u) {
        v = normal(rng);
        norm2 += v * v;
      }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : u) v *= inv;
    return u;
  };
  const std::vector<double> text_dir = unit_direction(cfg.text_dim);
  const std::vector<double> image_dir = unit_direction(cfg.image_dim);

  std::vector<std::uint8_t> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_fake), 1);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<std::uint8_t> missing(n, 0);
  std::fill(missing.begin(), missing.begin() + static_cast<std::ptrdiff_t>(n_missing), 1);
  std::shuffle(missing.begin(), missing.end(), rng);

  Dataset ds;
  ds.text_dim = cfg.text_dim;
  ds.image_dim = cfg.image_dim;
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.sample_id = i;
    s.label = labels[i];
    const double shift = s.label == 1 ? cfg.separation : 0.0;
    s.text_emb.resize(cfg.text_dim);
    for (std::uint32_t d = 0; d < cfg.text_dim; ++d) {
      s.text_emb[d] = static_cast<float>(normal(rng) + shift * text_dir[d]);
    }
    // Image noise is drawn even for missing-image rows so that the text
    // stream does not depend on the missing fraction.
    std::vector<float> image(cfg.image_dim);
    for (std::uint32_t d = 0; d < cfg.image_dim; ++d) {
      image[d] = static_cast<float>(normal(rng) + shift * image_dir[d]);
    }
    s.has_image = missing[i] == 0;
    if (s.has_image) s.image_emb = std::move(image);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::vector<FoldSplit> stratified_kfold(const Dataset& dataset, int k,
                                        std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold requires k >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const std::uint8_t label = dataset.samples[i].label;
    if (label > 1) throw CorruptError("label must be 0 or 1");
    by_class[label].push_back(i);
  }
  // A class smaller than k is dealt into the first folds only; the carried
  // cursor keeps fold sizes within one of each other.
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      std::ostringstream os;
      os << "class " << c << " is empty; stratified split needs both classes";
      throw ConfigError(os.str());
    }
  }
  if (dataset.samples.size() < static_cast<std::size_t>(k)) {
    std::ostringstream os;
    os << dataset.samples.size() << " samples cannot fill k=" << k << " folds";
    throw ConfigError(os.str());
  }

  Rng rng(seed);
  std::vector<int> fold_of(dataset.samples.size(), -1);
  std::size_t cursor = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) {
      fold_of[idx] = static_cast<int>(cursor % static_cast<std::size_t>(k));
      ++cursor;
    }
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      auto& split = folds[static_cast<std::size_t>(f)];
      (fold_of[i] == f ? split.val_indices : split.train_indices).push_back(i);
    }
  }
  return folds;
}

std::vector<std::vector<std::size_t>> make_batches(
    std::span<const std::size_t> indices, int batch_size, bool shuffle,
    std::uint64_t seed) {
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  if (shuffle) {
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const auto bs = static_cast<std::size_t>(batch_size);
  std::vector<std::vector<std::size_t>> batches;
  batches.reserve((order.size() + bs - 1) / bs);
  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::size_t end = std::min(order.size(), start + bs);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace f2ind
