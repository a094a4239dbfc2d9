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
#include "f2ind/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "f2ind/errors.hpp"

namespace f2ind {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Cursor {
 public:
  explicit Cursor(const std::string& bytes) : bytes_(bytes) {}
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw TruncatedError(std::string("checkpoint truncated while reading ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= std::uint32_t{static_cast<unsigned char>(bytes_[pos_++])} << (8 * i);
    }
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_++])} << (8 * i);
    }
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json to_json(const ModelSpec& spec) {
  return {
      {"text_dim", spec.dims.text_dim},
      {"image_dim", spec.dims.image_dim},
      {"proj_dim", spec.dims.proj_dim},
      {"attn_hidden", spec.dims.attn_hidden},
      {"n_anfis_inputs", spec.dims.head_out},
      {"mf_per_input", spec.mf_per_input},
      {"dropout", spec.dropout_rate},
      {"use_anfis", spec.use_anfis},
  };
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec s;
    s.dims.text_dim = j.at("text_dim").get<int>();
    s.dims.image_dim = j.at("image_dim").get<int>();
    s.dims.proj_dim = j.at("proj_dim").get<int>();
    s.dims.attn_hidden = j.at("attn_hidden").get<int>();
    s.dims.head_out = j.at("n_anfis_inputs").get<int>();
    s.mf_per_input = j.at("mf_per_input").get<int>();
    s.dropout_rate = j.at("dropout").get<double>();
    s.use_anfis = j.at("use_anfis").get<bool>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptError(std::string("checkpoint model spec: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const nlohmann::json& meta) {
  nlohmann::json header = meta;
  header["model"] = to_json(model.spec);
  const std::string meta_text = header.dump();

  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(meta_text.size()));
  out += meta_text;
  const std::vector<ParamView> blocks = model.blocks();
  put_u32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    put_u32(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put_u64(out, b.values.size());
    for (double v : b.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw FormatError("bad magic: not an F2CKP1 checkpoint");
  }
  Cursor cur(bytes);
  cur.str(sizeof(kCheckpointMagic), "magic");
  const std::uint32_t version = cur.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t meta_len = cur.u32("meta length");
  Checkpoint ck;
  try {
    ck.meta = nlohmann::json::parse(cur.str(meta_len, "meta"));
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptError(std::string("checkpoint meta is not valid JSON: ") + e.what());
  }
  if (!ck.meta.contains("model")) throw CorruptError("checkpoint meta lacks a model spec");
  const ModelSpec spec = model_spec_from_json(ck.meta.at("model"));
  try {
    ck.model = init_model(spec, 0);
  } catch (const ConfigError& e) {
    throw CorruptError(std::string("checkpoint model spec invalid: ") + e.what());
  }

  std::vector<ParamView> blocks = ck.model.blocks();
  const std::uint32_t count = cur.u32("block count");
  if (count != blocks.size()) throw CorruptError("checkpoint block count does not match model spec");
  for (auto& b : blocks) {
    const std::uint32_t name_len = cur.u32("block name length");
    const std::string name = cur.str(name_len, "block name");
    if (name != b.name) throw CorruptError("checkpoint block '" + name + "' where '" + b.name + "' expected");
    const std::uint64_t n = cur.u64("block size");
    if (n != b.values.size()) throw CorruptError("checkpoint block '" + name + "' has wrong size");
    cur.need(n * 8, "block values");
    for (double& v : b.values) v = std::bit_cast<double>(cur.u64("value"));
  }
  if (cur.remaining() != 0) throw CorruptError("trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace f2ind
