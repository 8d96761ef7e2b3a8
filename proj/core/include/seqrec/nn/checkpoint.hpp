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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqrec/nn/matrix.hpp"

namespace seqrec::nn {

// Versioned binary container shared by the sequence model and all baselines.
//
//   bytes 0..7   magic "SEQRECKP"
//   u32 LE       format version
//   u64 LE       header length N
//   N bytes      JSON header {kind, vocabulary_hash, meta, tensors:[{name,rows,cols}]}
//   f64 LE ...   tensor payloads in header order, row-major
struct Checkpoint {
  std::string kind;             // "sequence_model", "item_knn", ...
  std::string vocabulary_hash;  // ItemVocabulary::hash() of the training artifacts
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& tensor(std::string_view name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Rejects files whose vocabulary hash differs from `expected_vocabulary_hash`
// (seqrec::Error "vocabulary_mismatch") or whose kind differs from
// `expected_kind` when that is non-empty.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::string_view expected_vocabulary_hash,
                           std::string_view expected_kind = {});

}  // namespace seqrec::nn
