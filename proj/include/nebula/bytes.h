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

// Little-endian field encoding shared by the shard format and the bridge.

#ifndef NEBULA_BYTES_H_
#define NEBULA_BYTES_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nebula/error.h"

namespace nebula {

static_assert(std::endian::native == std::endian::little,
              "on-disk and wire formats assume a little-endian host");

std::uint32_t Crc32c(std::span<const std::uint8_t> bytes);

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void Put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void PutU8(std::uint8_t v) { out_.push_back(v); }
  void PutBytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  void PutString(std::string_view s) {
    Put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::size_t size() const { return out_.size(); }

 private:
  std::vector<std::uint8_t>& out_;
};

// Bounds-checked reader; any overrun throws with the supplied error code so
// callers decide whether a short buffer is a format or protocol problem.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> in, ErrorCode on_overrun)
      : in_(in), code_(on_overrun) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint8_t GetU8() { return Get<std::uint8_t>(); }
  std::span<const std::uint8_t> GetBytes(std::size_t n) {
    Need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::string GetString() {
    const auto n = Get<std::uint32_t>();
    auto b = GetBytes(n);
    return std::string(b.begin(), b.end());
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void Need(std::size_t n) const {
    if (n > in_.size() - pos_) throw Error(code_, "truncated buffer");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  ErrorCode code_;
};

}  // namespace nebula

#endif  // NEBULA_BYTES_H_
