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

// The `nebula` command line.
//
// Exit codes: 0 success, 1 probe or I/O failure, 2 usage error.
//
// Option precedence, highest first: command line, the JSON file given by
// --config, the NEBULA_SEED environment variable (seed only), built-in
// defaults. A config file holds flag names without dashes, either at the
// top level (applied to whichever subcommand runs, when it has that flag)
// or under a subcommand name:
//   {"seed": 7, "gen": {"n": 10, "family": ["Control"]}}

#ifndef NEBULA_CLI_H_
#define NEBULA_CLI_H_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "nebula/storage.h"

namespace nebula {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Image size of recorded observations; policies that request pixels get
// the renderer's default instead.
inline constexpr int kDefaultRecordImageSize = 16;
inline constexpr int kDefaultShardEpisodes = 1000;

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes episodes into numbered shards "<name>-00000.shard", ... in `dir`
// and a "<name>.manifest.json" on Finish.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path dir, std::string name,
                int episodes_per_shard = kDefaultShardEpisodes);
  void Append(const Episode& episode);
  // Returns the manifest path.
  std::filesystem::path Finish();
  std::uint64_t count() const { return count_; }

 private:
  void Roll();

  std::filesystem::path dir_;
  std::string name_;
  int per_shard_;
  Manifest manifest_;
  std::unique_ptr<ShardWriter> writer_;
  std::string current_;
  std::uint64_t count_ = 0;
};

}  // namespace nebula

#endif  // NEBULA_CLI_H_
