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

// Wire protocol for policies running in another process.
//
// A frame is a little-endian u32 length, then a u8 type, then the payload;
// the length counts the type byte and the payload. HELLO, RESET, ERR and
// ACT payloads are UTF-8 JSON. An OBS payload is a little-endian u32 header
// length, the JSON header, the image bytes of every view listed in the
// header in order, then q and q_dot as little-endian f64. The full grammar
// is in docs/bridge_protocol.md.

#ifndef NEBULA_BRIDGE_H_
#define NEBULA_BRIDGE_H_

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nebula/episode.h"
#include "nebula/error.h"
#include "nebula/json_io.h"
#include "nebula/policy.h"

namespace nebula {

inline constexpr int kBridgeProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameLength = 64u << 20;
inline constexpr std::chrono::milliseconds kDefaultBridgeTimeout{5000};

enum class FrameType : std::uint8_t {
  kHello = 1,
  kReset = 2,
  kObs = 3,
  kAct = 4,
  kErr = 5,
  kBye = 6,
};

std::string_view FrameTypeName(FrameType t);

struct Frame {
  FrameType type = FrameType::kHello;
  std::vector<std::uint8_t> payload;

  static Frame FromJson(FrameType type, const Json& j);
  Json JsonPayload() const;  // throws kProtocolViolation
  bool operator==(const Frame&) const = default;
};

std::vector<std::uint8_t> EncodeFrame(const Frame& frame);
// Parses one frame from the front of `bytes`. Returns nullopt when more
// bytes are needed; throws kProtocolViolation for a bad length or type.
std::optional<Frame> DecodeFrame(std::span<const std::uint8_t> bytes, std::size_t* consumed);

// An ordered, reliable byte stream.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws kBridgeDisconnected when the peer is gone.
  virtual void Write(std::span<const std::uint8_t> bytes) = 0;
  // Reads 1..out.size() bytes; returns 0 at end of stream. Throws
  // kBridgeTimeout when nothing arrives in time.
  virtual std::size_t Read(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) = 0;
};

// Transport over a pair of file descriptors (pipes or a socket).
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns_fds);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void Write(std::span<const std::uint8_t> bytes) override;
  std::size_t Read(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override;
  void Close();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
};

void WriteFrame(Transport& t, const Frame& frame);
// Throws kBridgeDisconnected at end of stream, kBridgeTimeout when the
// whole frame does not arrive in time, kProtocolViolation for bad framing.
Frame ReadFrame(Transport& t, std::chrono::milliseconds timeout);

// OBS payload codec. Views are sent only when `with_images` is set.
std::vector<std::uint8_t> EncodeObservation(const Observation& obs,
                                            const EmbodimentConfig& embodiment,
                                            const std::string& instruction, bool with_images);

struct DecodedObservation {
  Observation observation;
  std::string robot_id;
  int dof = 0;
  std::string instruction;
};

// Throws kProtocolViolation when the payload disagrees with its header.
DecodedObservation DecodeObservation(std::span<const std::uint8_t> payload);

Json ErrPayload(ErrorCode code, const std::string& message);

struct TranscriptEntry {
  bool from_harness = true;
  Frame frame;
};

// One line per frame: direction, type, then the JSON payload, or for OBS
// the JSON header and a digest of the binary tail.
std::string FormatTranscript(const std::vector<TranscriptEntry>& entries);

// What the policy process reports about itself in its HELLO.
struct PeerInfo {
  std::string policy_id;
  int dof = 0;
  bool needs_images = true;
  std::uint64_t artifact_bytes = 0;
  std::optional<std::uint64_t> accelerator_mem_bytes;
};

// Harness side of one session.
class BridgeSession {
 public:
  BridgeSession(Transport& transport, std::chrono::milliseconds timeout = kDefaultBridgeTimeout,
                std::vector<TranscriptEntry>* transcript = nullptr);

  // HELLO exchange. Throws kEmbodimentMismatch when the peer's dof differs,
  // kProtocolViolation for another protocol version or a bad reply.
  const PeerInfo& Hello(const EmbodimentConfig& embodiment);
  void Reset(const std::string& instruction);
  // OBS then ACT. Throws kMalformedAction (after sending ERR) when the
  // action is unreadable or has the wrong size, non-finite or out-of-range
  // components.
  Action Step(const Observation& obs, const std::string& instruction);
  void Bye();

  const PeerInfo& peer() const { return peer_; }
  bool open() const { return open_; }

 private:
  void Send(const Frame& f);
  Frame Receive();
  [[noreturn]] void Abort(ErrorCode code, const std::string& message);

  Transport& transport_;
  std::chrono::milliseconds timeout_;
  std::vector<TranscriptEntry>* transcript_;
  EmbodimentConfig embodiment_;
  PeerInfo peer_;
  bool hello_done_ = false;
  bool open_ = true;
};

struct SessionEpisode {
  std::string instruction;
  std::vector<Observation> observations;
};

struct SessionSummary {
  PeerInfo peer;
  std::vector<std::vector<Action>> actions;  // per episode
  std::optional<std::string> error;          // set when the session aborted
  std::vector<TranscriptEntry> transcript;
};

// Drives HELLO, then RESET and one OBS/ACT per observation for each
// episode, then BYE. Errors end the session and are reported in the
// summary rather than thrown.
SessionSummary ServePolicySession(Transport& transport, const EmbodimentConfig& embodiment,
                                  const std::vector<SessionEpisode>& episodes,
                                  std::chrono::milliseconds timeout = kDefaultBridgeTimeout);

// Policy-process side: answers HELLO with `info`, forwards RESET and OBS to
// the callbacks and returns at BYE or end of stream. Throws
// kProtocolViolation carrying the harness's message when it sends ERR.
struct ClientCallbacks {
  std::function<void(const std::string& instruction, const EmbodimentConfig& embodiment)> on_reset;
  std::function<std::vector<double>(const DecodedObservation& obs)> on_observe;
};
void RunClient(Transport& transport, const PeerInfo& info, const ClientCallbacks& callbacks,
               std::chrono::milliseconds timeout = std::chrono::hours(24));

// A child process with its stdin and stdout connected to pipes.
class ChildProcess {
 public:
  // Runs `command` through /bin/sh. Throws kIoError if it cannot start.
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  Transport& transport() { return *transport_; }
  pid_t pid() const { return pid_; }
  // Closes the pipes and reaps the child, killing it after `grace`.
  void Terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(1000));

 private:
  pid_t pid_ = -1;
  std::unique_ptr<FdTransport> transport_;
};

struct BridgeOptions {
  std::string command;
  std::chrono::milliseconds timeout = kDefaultBridgeTimeout;
};

// A Policy served by a child process over the bridge. The child is started
// on the first Reset and restarted on a later Reset if the session broke.
class BridgePolicy : public Policy {
 public:
  explicit BridgePolicy(BridgeOptions options);
  ~BridgePolicy() override;

  std::string id() const override;
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;
  void OnInstruction(const std::string& instruction) override { instruction_ = instruction; }
  bool needs_images() const override;
  std::uint64_t artifact_bytes() const override;
  std::optional<std::uint64_t> accelerator_bytes() const override;
  bool external() const override { return true; }

  // Pid of the running child, -1 when none; exposed for fault injection.
  pid_t child_pid() const;

 private:
  void Start(const EmbodimentConfig& embodiment);
  void Stop();

  BridgeOptions options_;
  std::unique_ptr<ChildProcess> child_;
  std::unique_ptr<BridgeSession> session_;
  std::optional<PeerInfo> peer_;
  std::string instruction_;
};

// Factory for selectors of the form "bridge:<command>"; nullopt otherwise.
std::optional<PolicyFactory> BridgePolicyFactory(const std::string& selector,
                                                 std::chrono::milliseconds timeout =
                                                     kDefaultBridgeTimeout);

// Scripted or bridge selector. Throws kInvalidArgument for unknown ones.
PolicyFactory MakePolicyFactory(const std::string& selector);

}  // namespace nebula

#endif  // NEBULA_BRIDGE_H_
