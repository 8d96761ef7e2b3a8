// Copyright 2026 The seqrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqrec/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "seqrec/error.hpp"
#include "seqrec/text.hpp"

namespace seqrec::nn {
namespace {

constexpr std::string_view kMagic = "SEQRECKP";

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& offset) {
  if (offset + sizeof(T) > bytes.size()) throw Error("bad_checkpoint", "truncated checkpoint");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  offset += sizeof(T);
  return value;
}

}  // namespace

const Matrix& Checkpoint::tensor(std::string_view name) const {
  for (const auto& [tensor_name, value] : tensors) {
    if (tensor_name == name) return value;
  }
  throw Error("bad_checkpoint", "checkpoint of kind '" + kind + "' has no tensor '" +
                                    std::string(name) + "'");
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  nlohmann::json header;
  header["kind"] = checkpoint.kind;
  header["vocabulary_hash"] = checkpoint.vocabulary_hash;
  header["meta"] = checkpoint.meta;
  header["tensors"] = nlohmann::json::array();
  std::size_t payload = 0;
  for (const auto& [name, value] : checkpoint.tensors) {
    header["tensors"].push_back({{"name", name}, {"rows", value.rows()}, {"cols", value.cols()}});
    payload += value.size() * sizeof(double);
  }
  const std::string header_text = header.dump();

  std::string out;
  out.reserve(kMagic.size() + 12 + header_text.size() + payload);
  out.append(kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out.append(header_text);
  for (const auto& [name, value] : checkpoint.tensors) {
    for (double v : value.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error("bad_checkpoint", "not a seqrec checkpoint (bad magic)");
  }
  std::size_t offset = kMagic.size();
  const auto version = get_le<std::uint32_t>(bytes, offset);
  if (version != kCheckpointVersion) {
    throw Error("bad_checkpoint", "unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_size = get_le<std::uint64_t>(bytes, offset);
  if (offset + header_size > bytes.size()) throw Error("bad_checkpoint", "truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(offset, header_size));
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_checkpoint", std::string("malformed checkpoint header: ") + e.what());
  }
  offset += header_size;

  Checkpoint checkpoint;
  try {
    checkpoint.kind = header.at("kind").get<std::string>();
    checkpoint.vocabulary_hash = header.at("vocabulary_hash").get<std::string>();
    checkpoint.meta = header.at("meta");
    for (const auto& entry : header.at("tensors")) {
      Matrix value(entry.at("rows").get<std::size_t>(), entry.at("cols").get<std::size_t>());
      for (double& v : value.values()) {
        v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
      }
      checkpoint.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(value));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_checkpoint", std::string("malformed checkpoint header: ") + e.what());
  }
  if (offset != bytes.size()) throw Error("bad_checkpoint", "trailing bytes after tensors");
  return checkpoint;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::string_view expected_vocabulary_hash,
                           std::string_view expected_kind) {
  if (!std::filesystem::exists(path)) {
    throw Error("missing_artifact", "checkpoint not found: " + path.string());
  }
  Checkpoint checkpoint = deserialize_checkpoint(read_file(path));
  if (!expected_kind.empty() && checkpoint.kind != expected_kind) {
    throw Error("bad_checkpoint", path.string() + " holds a '" + checkpoint.kind +
                                      "' checkpoint, expected '" + std::string(expected_kind) +
                                      "'");
  }
  if (checkpoint.vocabulary_hash != expected_vocabulary_hash) {
    throw Error("vocabulary_mismatch",
                path.string() + " was trained against vocabulary " +
                    checkpoint.vocabulary_hash.substr(0, 12) + ", artifacts carry " +
                    std::string(expected_vocabulary_hash.substr(0, 12)));
  }
  return checkpoint;
}

}  // namespace seqrec::nn
