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
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace f2ind {

inline constexpr std::uint32_t kDefaultTextDim = 768;
inline constexpr std::uint32_t kDefaultImageDim = 2048;

/// Label convention: 0 = true news, 1 = fake news (the positive class).
struct Sample {
  std::uint64_t sample_id = 0;
  std::uint8_t label = 0;
  bool has_image = false;
  std::vector<float> text_emb;
  /// Empty unless has_image.
  std::vector<float> image_emb;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::uint32_t text_dim = kDefaultTextDim;
  std::uint32_t image_dim = kDefaultImageDim;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t count_label(std::uint8_t label) const noexcept;
  std::size_t count_missing_images() const noexcept;

  /// Throws CorruptError describing the first violated invariant.
  void validate() const;

  /// New dataset holding copies of the given rows, in order.
  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

struct FoldSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

// ---------------------------------------------------------------------------
// F2EMB1 binary interchange format (little-endian):
//   magic "F2EMB1" | u32 n_samples | u32 text_dim | u32 image_dim
//   per sample: u64 sample_id | u8 label | u8 has_image |
//               f32 x text_dim | f32 x image_dim (only if has_image)
// ---------------------------------------------------------------------------

inline constexpr char kEmbeddingMagic[6] = {'F', '2', 'E', 'M', 'B', '1'};
inline constexpr std::size_t kEmbeddingHeaderBytes = 18;
inline constexpr std::size_t kEmbeddingRecordFixedBytes = 10;

/// Errors: IoError (open), FormatError (magic), TruncatedError (short
/// record or header), CorruptError (invalid field, trailing payload, bad dims).
Dataset read_embeddings(const std::filesystem::path& path);
Dataset decode_embeddings(std::span<const std::uint8_t> bytes);

void write_embeddings(const Dataset& dataset, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_embeddings(const Dataset& dataset);

/// Exact encoded size, header included.
std::size_t encoded_size(const Dataset& dataset) noexcept;

// ---------------------------------------------------------------------------

struct SynthConfig {
  std::size_t n = 2000;
  double fake_fraction = 0.05;
  double missing_image_fraction = 0.0;
  double separation = 6.0;
  std::uint64_t seed = 42;
  std::uint32_t text_dim = kDefaultTextDim;
  std::uint32_t image_dim = kDefaultImageDim;
};

/// Class 0 ~ N(0, I); class 1 ~ N(separation * u, I) with one fixed random
/// unit direction u per modality. Fake count is round(n * fake_fraction),
/// missing-image count round(n * missing_image_fraction); both assigned to a
/// seeded random subset. Sample ids are 0..n-1 in file order.
Dataset generate_synthetic(const SynthConfig& cfg);

/// Round-robin deal of each class's shuffled indices over k folds. The
/// fold cursor carries over from one class to the next so fold sizes differ
/// by at most one. Throws ConfigError if k < 2 or any class has < k samples.
std::vector<FoldSplit> stratified_kfold(const Dataset& dataset, int k,
                                        std::uint64_t seed);

/// Partition `indices` into consecutive batches; the last may be short.
std::vector<std::vector<std::size_t>> make_batches(
    std::span<const std::size_t> indices, int batch_size, bool shuffle,
    std::uint64_t seed);

}  // namespace f2ind
