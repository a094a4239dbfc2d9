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
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "f2ind/data_model.hpp"
#include "f2ind/errors.hpp"
#include "test_util.hpp"

namespace f2ind {
namespace {

using testing::TempDir;
using testing::tiny_dataset;

Sample make_sample(std::uint64_t id, std::uint8_t label, bool has_image, std::uint32_t td,
                   std::uint32_t id_dim) {
  Sample s;
  s.sample_id = id;
  s.label = label;
  s.has_image = has_image;
  s.text_emb.assign(td, 0.25f);
  if (has_image) s.image_emb.assign(id_dim, -1.5f);
  return s;
}

// Raw little-endian writers for hand-built files.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

TEST(EmbeddingFormat, FileSizesFollowTheRecordLayout) {
  TempDir tmp;
  Dataset ds;
  write_embeddings(ds, tmp / "empty.f2e");
  EXPECT_EQ(std::filesystem::file_size(tmp / "empty.f2e"), 18u);

  ds.samples.push_back(make_sample(7, 0, false, 768, 2048));
  write_embeddings(ds, tmp / "one.f2e");
  EXPECT_EQ(std::filesystem::file_size(tmp / "one.f2e"), 18u + 10u + 4u * 768u);

  ds.samples[0] = make_sample(7, 1, true, 768, 2048);
  write_embeddings(ds, tmp / "one_img.f2e");
  EXPECT_EQ(std::filesystem::file_size(tmp / "one_img.f2e"), 18u + 10u + 4u * 768u + 4u * 2048u);
  EXPECT_EQ(encoded_size(ds), 18u + 10u + 4u * 768u + 4u * 2048u);
}

TEST(EmbeddingFormat, EmptyFileKeepsDims) {
  TempDir tmp;
  Dataset ds;
  ds.text_dim = 768;
  ds.image_dim = 2048;
  write_embeddings(ds, tmp / "e.f2e");
  Dataset back = read_embeddings(tmp / "e.f2e");
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.text_dim, 768u);
  EXPECT_EQ(back.image_dim, 2048u);
}

TEST(EmbeddingFormat, HeaderBytesAreLittleEndian) {
  Dataset ds;
  ds.text_dim = 3;
  ds.image_dim = 0x0102;
  ds.samples.push_back(make_sample(0x1122334455667788ULL, 1, false, 3, 0x0102));
  const auto bytes = encode_embeddings(ds);
  ASSERT_EQ(bytes.size(), 18u + 10u + 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "F2EMB1");
  EXPECT_EQ(bytes[6], 1);  // n
  EXPECT_EQ(bytes[10], 3);  // text_dim
  EXPECT_EQ(bytes[14], 0x02);
  EXPECT_EQ(bytes[15], 0x01);
  EXPECT_EQ(bytes[18], 0x88);  // id, low byte first
  EXPECT_EQ(bytes[25], 0x11);
  EXPECT_EQ(bytes[26], 1);  // label
  EXPECT_EQ(bytes[27], 0);  // has_image
}

TEST(EmbeddingFormat, RoundTripIsBitExact) {
  TempDir tmp;
  Dataset ds = tiny_dataset(40, 5, 7, 3);
  ds.samples[3].text_emb[0] = -0.0f;
  ds.samples[4].text_emb[1] = std::numeric_limits<float>::denorm_min();
  write_embeddings(ds, tmp / "a.f2e");
  Dataset back = read_embeddings(tmp / "a.f2e");
  EXPECT_EQ(back, ds);
  EXPECT_TRUE(std::signbit(back.samples[3].text_emb[0]));
  write_embeddings(back, tmp / "b.f2e");
  std::ifstream a(tmp / "a.f2e", std::ios::binary), b(tmp / "b.f2e", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
}

TEST(EmbeddingFormat, HeaderCountBeyondRecordsIsTruncated) {
  Dataset ds = tiny_dataset(4, 3, 2, 1);
  auto bytes = encode_embeddings(ds);
  bytes[6] = 5;  // header claims five records, payload holds four
  EXPECT_THROW(decode_embeddings(bytes), TruncatedError);
}

TEST(EmbeddingFormat, ShortRecordIsTruncated) {
  Dataset ds = tiny_dataset(4, 3, 2, 1);
  auto bytes = encode_embeddings(ds);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_embeddings(bytes), TruncatedError);
  std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 10);
  EXPECT_THROW(decode_embeddings(header_only), TruncatedError);
}

TEST(EmbeddingFormat, BadMagicIsFormatError) {
  auto bytes = encode_embeddings(tiny_dataset(2, 3, 2, 1));
  bytes[0] = 'X';
  EXPECT_THROW(decode_embeddings(bytes), FormatError);
}

TEST(EmbeddingFormat, PayloadLongerThanDeclaredIsCorrupt) {
  auto bytes = encode_embeddings(tiny_dataset(3, 3, 2, 1));
  bytes.push_back(0);
  EXPECT_THROW(decode_embeddings(bytes), CorruptError);
}

TEST(EmbeddingFormat, BadFlagsAndZeroDimsAreCorrupt) {
  std::vector<std::uint8_t> bytes = {'F', '2', 'E', 'M', 'B', '1'};
  put_u32(bytes, 1);
  put_u32(bytes, 1);
  put_u32(bytes, 1);
  put_u64(bytes, 9);
  bytes.push_back(2);  // label out of range
  bytes.push_back(0);
  for (int i = 0; i < 4; ++i) bytes.push_back(0);
  EXPECT_THROW(decode_embeddings(bytes), CorruptError);
  bytes[18 + 8] = 0;
  bytes[18 + 9] = 7;  // has_image flag out of range
  EXPECT_THROW(decode_embeddings(bytes), CorruptError);

  std::vector<std::uint8_t> zero = {'F', '2', 'E', 'M', 'B', '1'};
  put_u32(zero, 0);
  put_u32(zero, 0);
  put_u32(zero, 4);
  EXPECT_THROW(decode_embeddings(zero), CorruptError);
}

TEST(EmbeddingFormat, MissingFileIsIoError) {
  EXPECT_THROW(read_embeddings("/nonexistent/dir/x.f2e"), IoError);
  EXPECT_THROW(write_embeddings(Dataset{}, "/nonexistent/dir/x.f2e"), IoError);
}

TEST(EmbeddingFormat, WriterRejectsInvalidDatasets) {
  Dataset ds = tiny_dataset(3, 3, 2, 1);
  ds.samples[1].sample_id = ds.samples[0].sample_id;
  EXPECT_THROW(encode_embeddings(ds), CorruptError);
  ds = tiny_dataset(3, 3, 2, 1);
  ds.samples[1].text_emb.pop_back();
  EXPECT_THROW(encode_embeddings(ds), CorruptError);
  ds = tiny_dataset(3, 3, 2, 1);
  ds.samples[2].text_emb[0] = std::nanf("");
  EXPECT_THROW(encode_embeddings(ds), CorruptError);
}

TEST(Synthetic, RoundsFakeCount) {
  SynthConfig cfg;
  cfg.n = 100;
  cfg.fake_fraction = 0.05;
  cfg.text_dim = 4;
  cfg.image_dim = 4;
  Dataset ds = generate_synthetic(cfg);
  EXPECT_EQ(ds.size(), 100u);
  EXPECT_EQ(ds.count_label(1), 5u);
  EXPECT_EQ(ds.count_missing_images(), 0u);
}

TEST(Synthetic, MissingImagesAndDeterminism) {
  SynthConfig cfg;
  cfg.n = 200;
  cfg.missing_image_fraction = 0.25;
  cfg.text_dim = 6;
  cfg.image_dim = 5;
  Dataset a = generate_synthetic(cfg);
  Dataset b = generate_synthetic(cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.count_missing_images(), 50u);
  for (const auto& s : a.samples) EXPECT_EQ(s.image_emb.size(), s.has_image ? 5u : 0u);
  cfg.seed += 1;
  EXPECT_NE(generate_synthetic(cfg), a);
}

TEST(Synthetic, RejectsEmptyClasses) {
  SynthConfig cfg;
  cfg.n = 10;
  cfg.fake_fraction = 0.01;  // rounds to zero fakes
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg.fake_fraction = 0.99;  // rounds to zero reals
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg.fake_fraction = 1.5;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg.fake_fraction = 0.5;
  cfg.missing_image_fraction = -0.1;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
}

// Nearest-class-mean probe fit on one half, scored on the other.
double probe_accuracy(const Dataset& ds) {
  const std::size_t half = ds.size() / 2;
  const std::size_t dim = ds.text_dim + ds.image_dim;
  std::vector<double> mean[2] = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  double count[2] = {0, 0};
  auto features = [&](const Sample& s) {
    std::vector<double> x(s.text_emb.begin(), s.text_emb.end());
    x.insert(x.end(), s.image_emb.begin(), s.image_emb.end());
    return x;
  };
  for (std::size_t i = 0; i < half; ++i) {
    const auto x = features(ds.samples[i]);
    const int c = ds.samples[i].label;
    for (std::size_t j = 0; j < dim; ++j) mean[c][j] += x[j];
    count[c] += 1;
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : mean[c]) v /= count[c];
  std::size_t correct = 0;
  for (std::size_t i = half; i < ds.size(); ++i) {
    const auto x = features(ds.samples[i]);
    double d[2] = {0, 0};
    for (int c = 0; c < 2; ++c)
      for (std::size_t j = 0; j < dim; ++j) d[c] += (x[j] - mean[c][j]) * (x[j] - mean[c][j]);
    correct += static_cast<std::size_t>((d[1] < d[0]) == (ds.samples[i].label == 1));
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size() - half);
}

TEST(Synthetic, SeparationControlsLinearSeparability) {
  SynthConfig cfg;
  cfg.n = 2000;
  cfg.fake_fraction = 0.5;
  cfg.text_dim = 16;
  cfg.image_dim = 16;
  cfg.separation = 0.0;
  EXPECT_NEAR(probe_accuracy(generate_synthetic(cfg)), 0.5, 0.1);
  cfg.separation = 6.0;
  EXPECT_GT(probe_accuracy(generate_synthetic(cfg)), 0.99);
}

TEST(Synthetic, ShiftIsAlongOneUnitDirectionOfLengthSeparation) {
  SynthConfig cfg;
  cfg.n = 4000;
  cfg.fake_fraction = 0.5;
  cfg.text_dim = 8;
  cfg.image_dim = 3;
  cfg.separation = 6.0;
  Dataset ds = generate_synthetic(cfg);
  std::vector<double> diff(cfg.text_dim, 0.0);
  for (const auto& s : ds.samples)
    for (std::size_t j = 0; j < diff.size(); ++j)
      diff[j] += (s.label ? 1.0 : -1.0) * s.text_emb[j] / 2000.0;
  double norm = 0.0;
  for (double v : diff) norm += v * v;
  EXPECT_NEAR(std::sqrt(norm), 6.0, 0.2);
}

Dataset labels_only(std::size_t n_true, std::size_t n_fake) {
  Dataset ds;
  ds.text_dim = 1;
  ds.image_dim = 1;
  for (std::size_t i = 0; i < n_true + n_fake; ++i) {
    Sample s;
    s.sample_id = i;
    s.label = static_cast<std::uint8_t>(i >= n_true);
    s.text_emb = {0.0f};
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void expect_partition(const std::vector<FoldSplit>& folds, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& f : folds) {
    for (auto i : f.val_indices) seen.at(i) += 1;
    std::set<std::size_t> val(f.val_indices.begin(), f.val_indices.end());
    EXPECT_EQ(f.train_indices.size() + f.val_indices.size(), n);
    for (auto i : f.train_indices) EXPECT_EQ(val.count(i), 0u);
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(StratifiedKFold, SmallExample) {
  Dataset ds = labels_only(8, 2);
  auto folds = stratified_kfold(ds, 5, 11);
  ASSERT_EQ(folds.size(), 5u);
  int folds_with_fake = 0;
  for (const auto& f : folds) {
    EXPECT_EQ(f.val_indices.size(), 2u);
    int fakes = 0;
    for (auto i : f.val_indices) fakes += ds.samples[i].label;
    EXPECT_LE(fakes, 1);
    folds_with_fake += fakes;
  }
  EXPECT_EQ(folds_with_fake, 2);
  expect_partition(folds, ds.size());
}

TEST(StratifiedKFold, DatasetScaleCounts) {
  Dataset ds = labels_only(24576, 619);
  auto folds = stratified_kfold(ds, 5, 42);
  expect_partition(folds, ds.size());
  for (const auto& f : folds) {
    int fakes = 0;
    for (auto i : f.val_indices) fakes += ds.samples[i].label;
    EXPECT_TRUE(fakes == 123 || fakes == 124) << fakes;
  }
}

TEST(StratifiedKFold, RatioPropertyOverRandomShapes) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 6);
    const std::size_t n_fake = 1 + rng() % 40;
    const std::size_t n_true = k + rng() % 200;
    Dataset ds = labels_only(n_true, n_fake);
    auto folds = stratified_kfold(ds, k, rng());
    expect_partition(folds, ds.size());
    const double global = static_cast<double>(n_fake) / static_cast<double>(ds.size());
    for (const auto& f : folds) {
      double fakes = 0;
      for (auto i : f.val_indices) fakes += ds.samples[i].label;
      const double val = static_cast<double>(f.val_indices.size());
      EXPECT_LE(std::abs(fakes / val - global), 1.0 / val + 1e-12);
    }
  }
}

TEST(StratifiedKFold, DeterministicAndValidated) {
  Dataset ds = labels_only(30, 10);
  auto a = stratified_kfold(ds, 4, 9);
  auto b = stratified_kfold(ds, 4, 9);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].val_indices, b[i].val_indices);
  EXPECT_THROW(stratified_kfold(ds, 1, 9), ConfigError);
  EXPECT_THROW(stratified_kfold(labels_only(30, 0), 4, 9), ConfigError);
  EXPECT_THROW(stratified_kfold(labels_only(2, 1), 4, 9), ConfigError);
}

TEST(Batches, SizesOrderAndShuffle) {
  std::vector<std::size_t> idx(33);
  std::iota(idx.begin(), idx.end(), 100);
  auto plain = make_batches(idx, 16, false, 0);
  ASSERT_EQ(plain.size(), 3u);
  EXPECT_EQ(plain[0].size(), 16u);
  EXPECT_EQ(plain[1].size(), 16u);
  EXPECT_EQ(plain[2].size(), 1u);
  std::vector<std::size_t> flat;
  for (const auto& b : plain) flat.insert(flat.end(), b.begin(), b.end());
  EXPECT_EQ(flat, idx);

  auto s1 = make_batches(idx, 16, true, 7);
  auto s2 = make_batches(idx, 16, true, 7);
  EXPECT_EQ(s1, s2);
  std::vector<std::size_t> shuffled;
  for (const auto& b : s1) shuffled.insert(shuffled.end(), b.begin(), b.end());
  EXPECT_NE(shuffled, idx);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, idx);

  EXPECT_THROW(make_batches(idx, 0, false, 0), ConfigError);
  EXPECT_THROW(make_batches(idx, -3, true, 0), ConfigError);
  EXPECT_TRUE(make_batches({}, 4, true, 0).empty());
}

TEST(DatasetOps, SubsetAndCounts) {
  Dataset ds = tiny_dataset(12, 3, 2, 4);
  EXPECT_EQ(ds.count_label(1), 3u);
  EXPECT_EQ(ds.count_missing_images(), 4u);
  std::vector<std::size_t> pick = {5, 0, 11};
  Dataset sub = ds.subset(pick);
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.samples[0], ds.samples[5]);
  EXPECT_EQ(sub.samples[2], ds.samples[11]);
  std::vector<std::size_t> bad = {12};
  EXPECT_THROW(ds.subset(bad), IndexError);
}

}  // namespace
}  // namespace f2ind
