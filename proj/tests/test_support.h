// Copyright 2026 The Nebula Authors
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

// Shared fixtures for the unit and acceptance tests: temporary directories,
// subprocess helpers and builders for small valid episodes.

#ifndef NEBULA_TESTS_TEST_SUPPORT_H_
#define NEBULA_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nebula/episode.h"
#include "nebula/storage.h"

namespace nebula::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;  // stdout only
};

// Runs `command` through the shell and captures its stdout.
CommandResult RunCommand(const std::string& command);

std::string CliPath();
std::string EchoPolicyPath();
std::filesystem::path GoldenDir();

std::string ReadFile(const std::filesystem::path& path);
std::vector<std::uint8_t> ReadBytes(const std::filesystem::path& path);
void WriteBytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

struct SyntheticSpec {
  Family family = Family::kControl;
  Tier tier = Tier::kEasy;
  int template_id = 1;
  std::uint64_t seed = 0;
  int steps = 3;
  bool success = false;
  int image_size = 2;
  std::string instruction = "Pick up the red cube.";
};

// A small episode that passes ValidateEpisode. Pixel and joint values are
// drawn from `spec.seed` so distinct seeds give distinct payloads.
Episode MakeEpisode(const SyntheticSpec& spec);

// A corpus of `n` varied episodes (families, tiers, templates, lengths,
// outcomes and instructions cycle with the seed).
std::vector<Episode> MakeCorpus(int n, std::uint64_t seed, int image_size = 1);

// Manifest over `n` summaries in `shards` shards, without any shard files.
Manifest MakeSyntheticManifest(int n, int shards, std::uint64_t seed);

}  // namespace nebula::testing

#endif  // NEBULA_TESTS_TEST_SUPPORT_H_
