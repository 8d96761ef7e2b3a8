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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seqrec::harness {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ManifestEntry {
  std::string path;    // relative to the manifest's directory, '/' separated
  std::string sha256;
};

// Record of one command run. Timestamps are wall-clock UTC and are the only
// fields that differ between otherwise identical runs.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string input_hash;  // SHA-256 of the raw data file or upstream manifest
  std::string vocabulary_hash;
  std::vector<ManifestEntry> artifacts;
  std::string version = kLibraryVersion;
  std::string started_at;
  std::string finished_at;
};

std::string utc_now();

// Hashes each file and records it relative to `base`.
void add_artifacts(RunManifest& manifest, const std::filesystem::path& base,
                   const std::vector<std::filesystem::path>& files);

std::string format_manifest(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view text);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace seqrec::harness
