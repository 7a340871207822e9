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

// Shard files hold serialized episodes:
//
//   "NEBS" | u16 version | u64 episode_count
//   record*      each record is u64 payload_length | payload
//   index        episode_count x { u64 record_offset, u64 payload_length,
//                                  u32 crc32c(payload) }
//   u64 index_offset
//
// All integers are little-endian. Images are stored raw. See
// docs/shard_format.md for the payload layout.

#ifndef NEBULA_STORAGE_H_
#define NEBULA_STORAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nebula/episode.h"

namespace nebula {

inline constexpr char kShardMagic[4] = {'N', 'E', 'B', 'S'};
inline constexpr std::uint16_t kShardFormatVersion = 1;
inline constexpr std::size_t kShardHeaderBytes = 4 + 2 + 8;
inline constexpr std::size_t kIndexEntryBytes = 8 + 8 + 4;
inline constexpr std::size_t kFooterBytes = 8;
inline constexpr std::size_t kRecordPrefixBytes = 8;

struct IndexEntry {
  std::uint64_t byte_offset = 0;  // start of the record's length prefix
  std::uint64_t byte_length = 0;  // payload length, excluding the prefix
  std::uint32_t crc32c = 0;

  bool operator==(const IndexEntry&) const = default;
};

struct Shard {
  std::filesystem::path path;
  std::uint16_t format_version = kShardFormatVersion;
  std::uint64_t episode_count = 0;
  std::uint64_t index_offset = 0;
  std::vector<IndexEntry> index;
};

std::vector<std::uint8_t> EncodeEpisode(const Episode& episode);
Episode DecodeEpisode(std::span<const std::uint8_t> payload);

// Per-episode metadata carried in the manifest so queries never have to
// open shard files.
struct EpisodeSummary {
  std::uint64_t index = 0;  // position in its shard
  std::string episode_id;
  std::string instruction;
  std::string robot_id;
  TaskMeta task_meta;
  std::uint8_t final_success = 0;
  std::uint64_t step_count = 0;

  bool operator==(const EpisodeSummary&) const = default;
};

EpisodeSummary Summarize(const Episode& episode, std::uint64_t index);

// Single writer per shard. Episodes are validated on Append; Finish writes
// the index and footer and patches the header count.
class ShardWriter {
 public:
  explicit ShardWriter(std::filesystem::path path);
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;
  ~ShardWriter();

  void Append(const Episode& episode);
  Shard Finish();

  std::uint64_t count() const { return index_.size(); }
  const std::vector<EpisodeSummary>& summaries() const { return summaries_; }
  const std::map<std::string, EmbodimentConfig>& embodiments() const {
    return embodiments_;
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t offset_ = 0;
  std::vector<IndexEntry> index_;
  std::vector<EpisodeSummary> summaries_;
  std::map<std::string, EmbodimentConfig> embodiments_;
  bool finished_ = false;
};

Shard WriteShard(std::span<const Episode> episodes,
                 const std::filesystem::path& path);

// Reads header, footer and index. Throws kIoError, kBadMagic,
// kFormatVersionUnsupported, or kChecksumMismatch for a structurally broken
// index.
Shard OpenShard(const std::filesystem::path& path);

struct ReadStats {
  std::uint64_t bytes_read = 0;
};

// Decodes record i after checking its length prefix and CRC. Touches only
// the bytes of that record.
Episode ReadEpisode(const Shard& shard, std::uint64_t i,
                    ReadStats* stats = nullptr);

enum class IntegrityCode {
  kFileTruncated,
  kBadMagic,
  kVersionUnsupported,
  kRecordTruncated,
  kIndexTruncated,
  kTrailingBytes,
  kIndexOffsetMismatch,
  kIndexNotMonotonic,
  kRecordOutOfBounds,
  kLengthMismatch,
  kChecksumMismatch,
};

std::string_view IntegrityCodeName(IntegrityCode code);

struct IntegrityFailure {
  IntegrityCode code;
  std::int64_t episode = -1;
  std::string detail;
};

struct IntegrityReport {
  std::vector<IntegrityFailure> failures;
  bool ok() const { return failures.empty(); }
  bool Has(IntegrityCode code) const;
};

// Lists every structural and checksum problem; only a missing or
// unreadable file throws (kIoError).
IntegrityReport VerifyShard(const std::filesystem::path& path);

struct ManifestShard {
  std::string path;  // relative to the manifest's directory
  std::uint64_t episode_count = 0;
  std::vector<EpisodeSummary> episodes;

  bool operator==(const ManifestShard&) const = default;
};

struct Manifest {
  std::string dataset_name;
  int schema_version = 1;
  std::vector<ManifestShard> shards;
  std::map<std::string, std::uint64_t> family_counts;  // keyed by FamilyName
  std::map<std::string, EmbodimentConfig> embodiments;
  std::filesystem::path root;  // directory the manifest was loaded from

  std::uint64_t TotalEpisodes() const;
  bool operator==(const Manifest& o) const {
    return dataset_name == o.dataset_name &&
           schema_version == o.schema_version && shards == o.shards &&
           family_counts == o.family_counts && embodiments == o.embodiments;
  }
};

inline constexpr int kManifestSchemaVersion = 1;

// Adds a finished shard to the manifest and updates per-family counts and
// the embodiment table.
void AddShard(Manifest& manifest, const std::string& relative_path,
              const std::vector<EpisodeSummary>& episodes,
              const std::map<std::string, EmbodimentConfig>& embodiments);

// Empty when consistent: counts match shard contents and every episode's
// robot_id resolves in the embodiment table.
std::vector<std::string> CheckManifest(const Manifest& manifest);

std::filesystem::path ManifestPath(const std::filesystem::path& dir,
                                   const std::string& dataset_name);
void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest LoadManifest(const std::filesystem::path& path);
// Accepts either a manifest file or a directory holding exactly one
// "*.manifest.json".
Manifest LoadDataset(const std::filesystem::path& path);

}  // namespace nebula

#endif  // NEBULA_STORAGE_H_
