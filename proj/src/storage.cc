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

#include "nebula/storage.h"

#include <algorithm>
#include <boost/crc.hpp>
#include <cstring>

#include "nebula/bytes.h"
#include "nebula/error.h"
#include "nebula/json_io.h"

namespace nebula {

namespace fs = std::filesystem;

std::uint32_t Crc32c(std::span<const std::uint8_t> bytes) {
  // Castagnoli polynomial, reflected, init/xorout all-ones.
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

// ---------------------------------------------------------------------------
// Episode payload

namespace {

void EncodeEmbodiment(ByteWriter& w, const EmbodimentConfig& e) {
  w.PutString(e.robot_id);
  w.Put<std::int32_t>(e.dof);
  w.PutU8(static_cast<std::uint8_t>(e.gripper));
  w.Put<std::int32_t>(e.arm_count);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(e.joint_limits.size()));
  for (const auto& l : e.joint_limits) {
    w.Put<double>(l.min);
    w.Put<double>(l.max);
  }
}

EmbodimentConfig DecodeEmbodiment(ByteReader& r) {
  EmbodimentConfig e;
  e.robot_id = r.GetString();
  e.dof = r.Get<std::int32_t>();
  const std::uint8_t g = r.GetU8();
  if (g > static_cast<std::uint8_t>(GripperType::kNone)) {
    throw Error(ErrorCode::kInvalidEpisode, "unknown gripper type");
  }
  e.gripper = static_cast<GripperType>(g);
  e.arm_count = r.Get<std::int32_t>();
  const auto n = r.Get<std::uint32_t>();
  if (n > r.remaining() / 16) throw Error(ErrorCode::kInvalidEpisode, "joint count");
  e.joint_limits.resize(n);
  for (auto& l : e.joint_limits) {
    l.min = r.Get<double>();
    l.max = r.Get<double>();
  }
  return e;
}

void PutDoubles(ByteWriter& w, const std::vector<double>& v) {
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(v.size()));
  for (double d : v) w.Put<double>(d);
}

std::vector<double> GetDoubles(ByteReader& r) {
  const auto n = r.Get<std::uint32_t>();
  if (n > r.remaining() / 8) throw Error(ErrorCode::kInvalidEpisode, "vector length");
  std::vector<double> v(n);
  for (double& d : v) d = r.Get<double>();
  return v;
}

template <typename E>
E GetEnum(ByteReader& r, E max_value) {
  const std::uint8_t v = r.GetU8();
  if (v > static_cast<std::uint8_t>(max_value)) {
    throw Error(ErrorCode::kInvalidEpisode, "enum out of range");
  }
  return static_cast<E>(v);
}

}  // namespace

std::vector<std::uint8_t> EncodeEpisode(const Episode& ep) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.PutString(ep.episode_id);
  w.PutString(ep.instruction);
  EncodeEmbodiment(w, ep.embodiment);
  w.PutU8(static_cast<std::uint8_t>(ep.task_meta.family));
  w.PutU8(static_cast<std::uint8_t>(ep.task_meta.tier));
  w.Put<std::int32_t>(ep.task_meta.template_id);
  w.Put<std::uint64_t>(ep.task_meta.seed);
  w.PutString(ep.task_meta.variant_tag);
  w.PutU8(ep.final_success);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(ep.steps.size()));
  for (const Step& s : ep.steps) {
    w.Put<std::int64_t>(s.index);
    w.PutU8(s.success);
    const Observation& o = s.observation;
    w.Put<std::int64_t>(o.t);
    w.Put<double>(o.wall_time);
    PutDoubles(w, o.q);
    PutDoubles(w, o.q_dot);
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(o.views.size()));
    for (const auto& [key, img] : o.views) {
      w.PutU8(static_cast<std::uint8_t>(key.first));
      w.PutU8(static_cast<std::uint8_t>(key.second));
      w.Put<std::int32_t>(img.width);
      w.Put<std::int32_t>(img.height);
      w.Put<std::uint64_t>(img.data.size());
      w.PutBytes(img.data);
    }
    PutDoubles(w, s.action.values);
  }
  return out;
}

Episode DecodeEpisode(std::span<const std::uint8_t> payload) {
  ByteReader r(payload, ErrorCode::kInvalidEpisode);
  Episode ep;
  ep.episode_id = r.GetString();
  ep.instruction = r.GetString();
  ep.embodiment = DecodeEmbodiment(r);
  ep.task_meta.family = GetEnum(r, Family::kRobustness);
  ep.task_meta.tier = GetEnum(r, Tier::kHard);
  ep.task_meta.template_id = r.Get<std::int32_t>();
  ep.task_meta.seed = r.Get<std::uint64_t>();
  ep.task_meta.variant_tag = r.GetString();
  ep.final_success = r.GetU8();
  const auto steps = r.Get<std::uint32_t>();
  if (steps > r.remaining()) throw Error(ErrorCode::kInvalidEpisode, "step count");
  ep.steps.resize(steps);
  for (Step& s : ep.steps) {
    s.index = r.Get<std::int64_t>();
    s.success = r.GetU8();
    Observation& o = s.observation;
    o.t = r.Get<std::int64_t>();
    o.wall_time = r.Get<double>();
    o.q = GetDoubles(r);
    o.q_dot = GetDoubles(r);
    const auto views = r.Get<std::uint32_t>();
    for (std::uint32_t v = 0; v < views; ++v) {
      const CameraId cam = GetEnum(r, CameraId::kWrist);
      Image img;
      img.modality = GetEnum(r, Modality::kSegmentation);
      img.width = r.Get<std::int32_t>();
      img.height = r.Get<std::int32_t>();
      const auto n = r.Get<std::uint64_t>();
      auto bytes = r.GetBytes(n);
      img.data.assign(bytes.begin(), bytes.end());
      o.views.emplace(ViewKey{cam, img.modality}, std::move(img));
    }
    s.action.values = GetDoubles(r);
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kInvalidEpisode, "trailing bytes in record");
  }
  return ep;
}

EpisodeSummary Summarize(const Episode& ep, std::uint64_t index) {
  EpisodeSummary s;
  s.index = index;
  s.episode_id = ep.episode_id;
  s.instruction = ep.instruction;
  s.robot_id = ep.embodiment.robot_id;
  s.task_meta = ep.task_meta;
  s.final_success = ep.final_success;
  s.step_count = ep.steps.size();
  return s;
}

// ---------------------------------------------------------------------------
// Writer

namespace {

void WriteOrThrow(std::ofstream& out, const void* data, std::size_t n,
                  const fs::path& path) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace

ShardWriter::ShardWriter(fs::path path) : path_(std::move(path)) {
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kIoError, "cannot open " + path_.string());
  std::vector<std::uint8_t> header;
  ByteWriter w(header);
  w.PutBytes({reinterpret_cast<const std::uint8_t*>(kShardMagic), 4});
  w.Put<std::uint16_t>(kShardFormatVersion);
  w.Put<std::uint64_t>(0);  // patched in Finish()
  WriteOrThrow(out_, header.data(), header.size(), path_);
  offset_ = header.size();
}

ShardWriter::~ShardWriter() = default;

void ShardWriter::Append(const Episode& episode) {
  if (finished_) throw Error(ErrorCode::kIoError, "shard already finished");
  const ValidationReport report = ValidateEpisode(episode);
  if (!report.ok()) {
    throw Error(ErrorCode::kInvalidEpisode,
                episode.episode_id + ": " +
                    std::string(ViolationCodeName(report.violations.front().code)));
  }
  const std::vector<std::uint8_t> payload = EncodeEpisode(episode);
  const std::uint64_t len = payload.size();
  WriteOrThrow(out_, &len, sizeof(len), path_);
  WriteOrThrow(out_, payload.data(), payload.size(), path_);
  index_.push_back({offset_, len, Crc32c(payload)});
  summaries_.push_back(Summarize(episode, index_.size() - 1));
  embodiments_.try_emplace(episode.embodiment.robot_id, episode.embodiment);
  offset_ += kRecordPrefixBytes + len;
}

Shard ShardWriter::Finish() {
  if (finished_) throw Error(ErrorCode::kIoError, "shard already finished");
  finished_ = true;
  std::vector<std::uint8_t> tail;
  ByteWriter w(tail);
  for (const IndexEntry& e : index_) {
    w.Put<std::uint64_t>(e.byte_offset);
    w.Put<std::uint64_t>(e.byte_length);
    w.Put<std::uint32_t>(e.crc32c);
  }
  w.Put<std::uint64_t>(offset_);
  WriteOrThrow(out_, tail.data(), tail.size(), path_);
  const std::uint64_t count = index_.size();
  out_.seekp(6);
  WriteOrThrow(out_, &count, sizeof(count), path_);
  out_.close();
  if (!out_) throw Error(ErrorCode::kIoError, "close failed: " + path_.string());

  Shard shard;
  shard.path = path_;
  shard.episode_count = count;
  shard.index_offset = offset_;
  shard.index = index_;
  return shard;
}

Shard WriteShard(std::span<const Episode> episodes, const fs::path& path) {
  // Validate everything first so a bad episode never leaves a partial file.
  for (const Episode& ep : episodes) {
    const ValidationReport report = ValidateEpisode(ep);
    if (!report.ok()) {
      throw Error(ErrorCode::kInvalidEpisode,
                  ep.episode_id + ": " +
                      std::string(ViolationCodeName(report.violations.front().code)));
    }
  }
  ShardWriter writer(path);
  for (const Episode& ep : episodes) writer.Append(ep);
  return writer.Finish();
}

// ---------------------------------------------------------------------------
// Reader

namespace {

std::ifstream OpenForRead(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return in;
}

bool ReadAt(std::ifstream& in, std::uint64_t offset, void* dst, std::size_t n) {
  in.clear();
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace

Shard OpenShard(const fs::path& path) {
  std::error_code ec;
  const std::uint64_t size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot stat " + path.string());
  std::ifstream in = OpenForRead(path);

  std::uint8_t header[kShardHeaderBytes];
  if (size < kShardHeaderBytes + kFooterBytes || !ReadAt(in, 0, header, sizeof(header))) {
    throw Error(ErrorCode::kIoError, "file too short: " + path.string());
  }
  if (std::memcmp(header, kShardMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, path.string());
  }
  ByteReader hr({header + 4, kShardHeaderBytes - 4}, ErrorCode::kIoError);
  Shard shard;
  shard.path = path;
  shard.format_version = hr.Get<std::uint16_t>();
  if (shard.format_version != kShardFormatVersion) {
    throw Error(ErrorCode::kFormatVersionUnsupported,
                "version " + std::to_string(shard.format_version));
  }
  shard.episode_count = hr.Get<std::uint64_t>();

  if (!ReadAt(in, size - kFooterBytes, &shard.index_offset, kFooterBytes)) {
    throw Error(ErrorCode::kIoError, "cannot read footer");
  }
  const std::uint64_t body = size - kFooterBytes;
  if (shard.index_offset < kShardHeaderBytes || shard.index_offset > body ||
      (body - shard.index_offset) / kIndexEntryBytes != shard.episode_count ||
      (body - shard.index_offset) % kIndexEntryBytes != 0) {
    throw Error(ErrorCode::kChecksumMismatch, "index block inconsistent with header");
  }
  std::vector<std::uint8_t> raw(body - shard.index_offset);
  if (!ReadAt(in, shard.index_offset, raw.data(), raw.size())) {
    throw Error(ErrorCode::kIoError, "cannot read index");
  }
  ByteReader ir(raw, ErrorCode::kIoError);
  shard.index.resize(shard.episode_count);
  std::uint64_t next_free = kShardHeaderBytes;
  for (IndexEntry& e : shard.index) {
    e.byte_offset = ir.Get<std::uint64_t>();
    e.byte_length = ir.Get<std::uint64_t>();
    e.crc32c = ir.Get<std::uint32_t>();
    if (e.byte_offset < next_free || e.byte_length > shard.index_offset ||
        e.byte_offset + kRecordPrefixBytes + e.byte_length > shard.index_offset) {
      throw Error(ErrorCode::kChecksumMismatch, "index entries overlap or overflow");
    }
    next_free = e.byte_offset + kRecordPrefixBytes + e.byte_length;
  }
  return shard;
}

Episode ReadEpisode(const Shard& shard, std::uint64_t i, ReadStats* stats) {
  if (shard.format_version != kShardFormatVersion) {
    throw Error(ErrorCode::kFormatVersionUnsupported,
                "version " + std::to_string(shard.format_version));
  }
  if (i >= shard.episode_count || i >= shard.index.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                std::to_string(i) + " >= " + std::to_string(shard.episode_count));
  }
  const IndexEntry& e = shard.index[i];
  std::ifstream in = OpenForRead(shard.path);
  std::vector<std::uint8_t> record(kRecordPrefixBytes + e.byte_length);
  if (!ReadAt(in, e.byte_offset, record.data(), record.size())) {
    throw Error(ErrorCode::kIoError, "short read on record " + std::to_string(i));
  }
  if (stats) stats->bytes_read += record.size();
  std::uint64_t prefix;
  std::memcpy(&prefix, record.data(), sizeof(prefix));
  const std::span<const std::uint8_t> payload(record.data() + kRecordPrefixBytes,
                                              e.byte_length);
  if (prefix != e.byte_length || Crc32c(payload) != e.crc32c) {
    throw Error(ErrorCode::kChecksumMismatch, "record " + std::to_string(i));
  }
  return DecodeEpisode(payload);
}

// ---------------------------------------------------------------------------
// Verification

std::string_view IntegrityCodeName(IntegrityCode code) {
  switch (code) {
    case IntegrityCode::kFileTruncated: return "FILE_TRUNCATED";
    case IntegrityCode::kBadMagic: return "BAD_MAGIC";
    case IntegrityCode::kVersionUnsupported: return "VERSION_UNSUPPORTED";
    case IntegrityCode::kRecordTruncated: return "RECORD_TRUNCATED";
    case IntegrityCode::kIndexTruncated: return "INDEX_TRUNCATED";
    case IntegrityCode::kTrailingBytes: return "TRAILING_BYTES";
    case IntegrityCode::kIndexOffsetMismatch: return "INDEX_OFFSET_MISMATCH";
    case IntegrityCode::kIndexNotMonotonic: return "INDEX_NOT_MONOTONIC";
    case IntegrityCode::kRecordOutOfBounds: return "RECORD_OUT_OF_BOUNDS";
    case IntegrityCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case IntegrityCode::kChecksumMismatch: return "CHECKSUM_MISMATCH";
  }
  return "UNKNOWN";
}

bool IntegrityReport::Has(IntegrityCode code) const {
  return std::any_of(failures.begin(), failures.end(),
                     [code](const IntegrityFailure& f) { return f.code == code; });
}

IntegrityReport VerifyShard(const fs::path& path) {
  std::error_code ec;
  const std::uint64_t size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot stat " + path.string());
  std::ifstream in = OpenForRead(path);
  std::vector<std::uint8_t> file(size);
  if (size > 0 && !ReadAt(in, 0, file.data(), size)) {
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  }

  IntegrityReport report;
  auto fail = [&](IntegrityCode c, std::int64_t ep, std::string d) {
    report.failures.push_back({c, ep, std::move(d)});
  };
  auto u64_at = [&](std::uint64_t off) {
    std::uint64_t v;
    std::memcpy(&v, file.data() + off, 8);
    return v;
  };

  if (size < kShardHeaderBytes) {
    fail(IntegrityCode::kFileTruncated, -1, "shorter than header");
    return report;
  }
  if (std::memcmp(file.data(), kShardMagic, 4) != 0) {
    fail(IntegrityCode::kBadMagic, -1, "");
    return report;
  }
  std::uint16_t version;
  std::memcpy(&version, file.data() + 4, 2);
  if (version != kShardFormatVersion) {
    fail(IntegrityCode::kVersionUnsupported, -1, std::to_string(version));
    return report;
  }
  const std::uint64_t count = u64_at(6);

  // Walk the length prefixes to find where the index should start; this
  // does not trust the footer, which is the first thing truncation destroys.
  std::uint64_t pos = kShardHeaderBytes;
  bool walk_ok = true;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (size - pos < kRecordPrefixBytes) {
      walk_ok = false;
      break;
    }
    const std::uint64_t len = u64_at(pos);
    if (len > size - pos - kRecordPrefixBytes) {
      walk_ok = false;
      break;
    }
    pos += kRecordPrefixBytes + len;
  }
  if (count > size) walk_ok = false;

  std::optional<std::uint64_t> index_start;
  if (walk_ok) {
    const std::uint64_t need_tail = count * kIndexEntryBytes + kFooterBytes;
    if (size - pos < need_tail) {
      fail(IntegrityCode::kIndexTruncated, -1,
           "expected " + std::to_string(need_tail) + " index bytes, found " +
               std::to_string(size - pos));
    } else {
      if (size - pos > need_tail) {
        fail(IntegrityCode::kTrailingBytes, -1,
             std::to_string(size - pos - need_tail) + " extra bytes");
      }
      index_start = pos;
      const std::uint64_t footer = u64_at(size - kFooterBytes);
      if (footer != pos) {
        fail(IntegrityCode::kIndexOffsetMismatch, -1,
             "footer " + std::to_string(footer) + " != " + std::to_string(pos));
      }
    }
  } else {
    // A corrupt length prefix also breaks the walk; fall back to the footer
    // so individual records can still be checked against their CRCs.
    if (size >= kShardHeaderBytes + kFooterBytes) {
      const std::uint64_t footer = u64_at(size - kFooterBytes);
      if (footer >= kShardHeaderBytes && footer <= size - kFooterBytes &&
          size - kFooterBytes - footer == count * kIndexEntryBytes) {
        index_start = footer;
        fail(IntegrityCode::kLengthMismatch, -1,
             "record length prefixes disagree with file layout");
      }
    }
    if (!index_start) {
      fail(IntegrityCode::kRecordTruncated, -1,
           "records end before episode_count is reached");
    }
  }
  if (!index_start) return report;

  std::uint64_t next_free = kShardHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t base = *index_start + i * kIndexEntryBytes;
    const std::uint64_t off = u64_at(base);
    const std::uint64_t len = u64_at(base + 8);
    std::uint32_t crc;
    std::memcpy(&crc, file.data() + base + 16, 4);
    const auto ep = static_cast<std::int64_t>(i);
    if (off < next_free) {
      fail(IntegrityCode::kIndexNotMonotonic, ep, "offset overlaps previous record");
    }
    if (off > *index_start || len > *index_start ||
        off + kRecordPrefixBytes + len > *index_start) {
      fail(IntegrityCode::kRecordOutOfBounds, ep, "");
      continue;
    }
    next_free = std::max(next_free, off + kRecordPrefixBytes + len);
    if (u64_at(off) != len) {
      fail(IntegrityCode::kLengthMismatch, ep, "prefix disagrees with index");
    }
    if (Crc32c({file.data() + off + kRecordPrefixBytes, len}) != crc) {
      fail(IntegrityCode::kChecksumMismatch, ep, "");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Manifest

std::uint64_t Manifest::TotalEpisodes() const {
  std::uint64_t n = 0;
  for (const auto& s : shards) n += s.episode_count;
  return n;
}

void AddShard(Manifest& manifest, const std::string& relative_path,
              const std::vector<EpisodeSummary>& episodes,
              const std::map<std::string, EmbodimentConfig>& embodiments) {
  ManifestShard shard;
  shard.path = relative_path;
  shard.episode_count = episodes.size();
  shard.episodes = episodes;
  for (const auto& e : episodes) {
    ++manifest.family_counts[std::string(FamilyName(e.task_meta.family))];
  }
  for (const auto& [id, e] : embodiments) manifest.embodiments.try_emplace(id, e);
  manifest.shards.push_back(std::move(shard));
}

std::vector<std::string> CheckManifest(const Manifest& m) {
  std::vector<std::string> problems;
  std::map<std::string, std::uint64_t> counts;
  for (const auto& s : m.shards) {
    if (s.episode_count != s.episodes.size()) {
      problems.push_back(s.path + ": episode_count disagrees with episode list");
    }
    for (std::size_t i = 0; i < s.episodes.size(); ++i) {
      const auto& e = s.episodes[i];
      if (e.index != i) problems.push_back(s.path + ": episode index out of order");
      if (!m.embodiments.contains(e.robot_id)) {
        problems.push_back(e.episode_id + ": unknown embodiment " + e.robot_id);
      }
      ++counts[std::string(FamilyName(e.task_meta.family))];
    }
  }
  if (counts != m.family_counts) {
    problems.push_back("family_counts disagree with shard contents");
  }
  return problems;
}

fs::path ManifestPath(const fs::path& dir, const std::string& dataset_name) {
  return dir / (dataset_name + ".manifest.json");
}

void WriteManifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out << Json(manifest).dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

Manifest LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  Manifest m;
  try {
    m = Json::parse(in).get<Manifest>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIoError, "bad manifest " + path.string() + ": " + e.what());
  }
  m.root = path.parent_path();
  return m;
}

Manifest LoadDataset(const fs::path& path) {
  if (!fs::is_directory(path)) return LoadManifest(path);
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(path)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 14 && name.ends_with(".manifest.json")) found.push_back(entry.path());
  }
  if (found.size() != 1) {
    throw Error(ErrorCode::kIoError,
                "expected exactly one *.manifest.json in " + path.string());
  }
  return LoadManifest(found.front());
}

}  // namespace nebula
