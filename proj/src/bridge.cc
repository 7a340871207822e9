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

#include "nebula/bridge.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

#include "nebula/bytes.h"
#include "nebula/error.h"
#include "nebula/rng.h"

namespace nebula {
namespace {

using Clock = std::chrono::steady_clock;

void IgnoreSigpipeOnce() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutF64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double GetF64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

bool ValidType(std::uint8_t t) { return t >= 1 && t <= 6; }

Json EmbodimentJson(const EmbodimentConfig& e) {
  Json j;
  to_json(j, e);
  return j;
}

std::string Hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return s;
}

// Validates an ACT payload against the action size.
std::optional<std::string> ActionProblem(const Json& j, std::size_t dim, Action* out) {
  if (!j.is_object() || !j.contains("values") || !j.at("values").is_array()) {
    return "ACT payload must be an object with a 'values' array";
  }
  const Json& values = j.at("values");
  if (values.size() != dim) {
    return "action has " + std::to_string(values.size()) + " components, expected " +
           std::to_string(dim);
  }
  out->values.clear();
  for (const Json& v : values) {
    if (!v.is_number()) return "action components must be numbers";
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < -1.0 || x > 1.0) {
      return "action component " + v.dump() + " outside [-1, 1]";
    }
    out->values.push_back(x);
  }
  return std::nullopt;
}

}  // namespace

std::string_view FrameTypeName(FrameType t) {
  switch (t) {
    case FrameType::kHello: return "HELLO";
    case FrameType::kReset: return "RESET";
    case FrameType::kObs: return "OBS";
    case FrameType::kAct: return "ACT";
    case FrameType::kErr: return "ERR";
    case FrameType::kBye: return "BYE";
  }
  return "?";
}

Frame Frame::FromJson(FrameType type, const Json& j) {
  const std::string text = j.dump();
  return {type, std::vector<std::uint8_t>(text.begin(), text.end())};
}

Json Frame::JsonPayload() const {
  Json j = Json::parse(payload.begin(), payload.end(), nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kProtocolViolation,
                std::string(FrameTypeName(type)) + " payload is not valid JSON");
  }
  return j;
}

std::vector<std::uint8_t> EncodeFrame(const Frame& frame) {
  if (frame.payload.size() + 1 > kMaxFrameLength) {
    throw Error(ErrorCode::kProtocolViolation, "frame exceeds the maximum length");
  }
  std::vector<std::uint8_t> out;
  out.reserve(frame.payload.size() + 5);
  PutU32(out, static_cast<std::uint32_t>(frame.payload.size() + 1));
  out.push_back(static_cast<std::uint8_t>(frame.type));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

std::optional<Frame> DecodeFrame(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  if (bytes.size() < 4) return std::nullopt;
  const std::uint32_t length = GetU32(bytes.data());
  if (length == 0 || length > kMaxFrameLength) {
    throw Error(ErrorCode::kProtocolViolation,
                "frame length " + std::to_string(length) + " out of range");
  }
  if (bytes.size() >= 5 && !ValidType(bytes[4])) {
    throw Error(ErrorCode::kProtocolViolation,
                "unknown frame type " + std::to_string(static_cast<int>(bytes[4])));
  }
  if (bytes.size() < 4 + static_cast<std::size_t>(length)) return std::nullopt;
  Frame f;
  f.type = static_cast<FrameType>(bytes[4]);
  f.payload.assign(bytes.begin() + 5, bytes.begin() + 4 + length);
  if (consumed) *consumed = 4 + static_cast<std::size_t>(length);
  return f;
}

FdTransport::FdTransport(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {
  IgnoreSigpipeOnce();
}

FdTransport::~FdTransport() { Close(); }

void FdTransport::Close() {
  if (!owns_) return;
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdTransport::Write(std::span<const std::uint8_t> bytes) {
  if (write_fd_ < 0) throw Error(ErrorCode::kBridgeDisconnected, "transport is closed");
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kBridgeDisconnected,
                  std::string("write to policy process failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::size_t FdTransport::Read(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) {
  if (read_fd_ < 0) throw Error(ErrorCode::kBridgeDisconnected, "transport is closed");
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    pollfd p{read_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(std::max<long long>(0, std::min<long long>(left, 1 << 30))));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kBridgeDisconnected, std::string("poll failed: ") + std::strerror(errno));
    }
    if (r == 0) throw Error(ErrorCode::kBridgeTimeout, "no reply from the policy process in time");
    const ssize_t n = ::read(read_fd_, out.data(), out.size());
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(ErrorCode::kBridgeDisconnected,
                  std::string("read from policy process failed: ") + std::strerror(errno));
    }
    return static_cast<std::size_t>(n);
  }
}

void WriteFrame(Transport& t, const Frame& frame) { t.Write(EncodeFrame(frame)); }

Frame ReadFrame(Transport& t, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  auto read_exact = [&](std::uint8_t* dst, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0 && got < n) {
        throw Error(ErrorCode::kBridgeTimeout, "frame did not arrive in time");
      }
      const std::size_t r = t.Read(std::span<std::uint8_t>(dst + got, n - got), left);
      if (r == 0) throw Error(ErrorCode::kBridgeDisconnected, "policy process closed the stream");
      got += r;
    }
  };
  std::uint8_t head[5];
  read_exact(head, 5);
  const std::uint32_t length = GetU32(head);
  if (length == 0 || length > kMaxFrameLength) {
    throw Error(ErrorCode::kProtocolViolation,
                "frame length " + std::to_string(length) + " out of range");
  }
  if (!ValidType(head[4])) {
    throw Error(ErrorCode::kProtocolViolation,
                "unknown frame type " + std::to_string(static_cast<int>(head[4])));
  }
  Frame f;
  f.type = static_cast<FrameType>(head[4]);
  f.payload.resize(length - 1);
  if (!f.payload.empty()) read_exact(f.payload.data(), f.payload.size());
  return f;
}

std::vector<std::uint8_t> EncodeObservation(const Observation& obs,
                                            const EmbodimentConfig& embodiment,
                                            const std::string& instruction, bool with_images) {
  Json views = Json::array();
  std::size_t image_bytes = 0;
  if (with_images) {
    for (const auto& [key, img] : obs.views) {
      views.push_back({{"camera", CameraName(key.first)},
                       {"modality", ModalityName(key.second)},
                       {"width", img.width},
                       {"height", img.height},
                       {"bytes", img.data.size()}});
      image_bytes += img.data.size();
    }
  }
  const Json header = {{"embodiment", {{"robot_id", embodiment.robot_id}, {"dof", embodiment.dof}}},
                       {"t", obs.t},
                       {"wall_time", obs.wall_time},
                       {"instruction", instruction},
                       {"views", std::move(views)},
                       {"q_len", obs.q.size()},
                       {"q_dot_len", obs.q_dot.size()}};
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(4 + text.size() + image_bytes + 8 * (obs.q.size() + obs.q_dot.size()));
  PutU32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  if (with_images) {
    for (const auto& [key, img] : obs.views) out.insert(out.end(), img.data.begin(), img.data.end());
  }
  for (double v : obs.q) PutF64(out, v);
  for (double v : obs.q_dot) PutF64(out, v);
  return out;
}

DecodedObservation DecodeObservation(std::span<const std::uint8_t> payload) {
  auto fail = [](const std::string& what) -> Error {
    return Error(ErrorCode::kProtocolViolation, "OBS " + what);
  };
  if (payload.size() < 4) throw fail("payload shorter than its header length");
  const std::uint32_t hlen = GetU32(payload.data());
  if (payload.size() - 4 < hlen) throw fail("header length exceeds the payload");
  const Json header = Json::parse(payload.begin() + 4, payload.begin() + 4 + hlen, nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw fail("header is not a JSON object");
  DecodedObservation d;
  std::size_t pos = 4 + hlen;
  try {
    d.robot_id = header.at("embodiment").at("robot_id").get<std::string>();
    d.dof = header.at("embodiment").at("dof").get<int>();
    d.instruction = header.value("instruction", std::string());
    d.observation.t = header.at("t").get<std::int64_t>();
    d.observation.wall_time = header.at("wall_time").get<double>();
    const std::size_t q_len = header.at("q_len").get<std::size_t>();
    const std::size_t qd_len = header.at("q_dot_len").get<std::size_t>();
    std::size_t declared = 0;
    for (const Json& v : header.at("views")) declared += v.at("bytes").get<std::size_t>();
    if (q_len > kMaxFrameLength / 8 || qd_len > kMaxFrameLength / 8 ||
        payload.size() - pos != declared + 8 * (q_len + qd_len)) {
      throw fail("payload size differs from the header-declared sizes");
    }
    for (const Json& v : header.at("views")) {
      const auto cam = ParseCamera(v.at("camera").get<std::string>());
      const auto mod = ParseModality(v.at("modality").get<std::string>());
      if (!cam || !mod) throw fail("names an unknown camera or modality");
      Image img;
      img.width = v.at("width").get<int>();
      img.height = v.at("height").get<int>();
      img.modality = *mod;
      const std::size_t n = v.at("bytes").get<std::size_t>();
      if (img.width < 0 || img.height < 0 || n != img.ExpectedBytes()) {
        throw fail("view size disagrees with its dimensions");
      }
      img.data.assign(payload.begin() + pos, payload.begin() + pos + n);
      pos += n;
      d.observation.views[{*cam, *mod}] = std::move(img);
    }
    for (std::size_t i = 0; i < q_len; ++i, pos += 8) d.observation.q.push_back(GetF64(&payload[pos]));
    for (std::size_t i = 0; i < qd_len; ++i, pos += 8) {
      d.observation.q_dot.push_back(GetF64(&payload[pos]));
    }
  } catch (const Json::exception& e) {
    throw fail(std::string("header field error: ") + e.what());
  }
  return d;
}

Json ErrPayload(ErrorCode code, const std::string& message) {
  return {{"code", ErrorCodeName(code)}, {"message", message}};
}

std::string FormatTranscript(const std::vector<TranscriptEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.from_harness ? "> " : "< ";
    out += FrameTypeName(e.frame.type);
    const auto& p = e.frame.payload;
    if (e.frame.type == FrameType::kObs && p.size() >= 4 && p.size() - 4 >= GetU32(p.data())) {
      const std::uint32_t hlen = GetU32(p.data());
      const std::string header(p.begin() + 4, p.begin() + 4 + hlen);
      const std::string_view tail(reinterpret_cast<const char*>(p.data()) + 4 + hlen,
                                  p.size() - 4 - hlen);
      out += " " + header + " tail=" + std::to_string(tail.size()) + " fnv1a64=" +
             Hex64(Fnv1a64(tail));
    } else if (!p.empty()) {
      out += " " + std::string(p.begin(), p.end());
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Harness side

BridgeSession::BridgeSession(Transport& transport, std::chrono::milliseconds timeout,
                             std::vector<TranscriptEntry>* transcript)
    : transport_(transport), timeout_(timeout), transcript_(transcript) {}

void BridgeSession::Send(const Frame& f) {
  if (!open_) throw Error(ErrorCode::kBridgeDisconnected, "session is closed");
  try {
    WriteFrame(transport_, f);
  } catch (const Error&) {
    open_ = false;
    throw;
  }
  if (transcript_) transcript_->push_back({true, f});
}

Frame BridgeSession::Receive() {
  try {
    Frame f = ReadFrame(transport_, timeout_);
    if (transcript_) transcript_->push_back({false, f});
    if (f.type == FrameType::kErr) {
      open_ = false;
      const Json j = Json::parse(f.payload.begin(), f.payload.end(), nullptr, false);
      const std::string msg = j.is_object() ? j.value("message", j.dump()) : "unreadable ERR";
      throw Error(ErrorCode::kProtocolViolation, "policy process reported an error: " + msg);
    }
    return f;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocolViolation && open_) {
      Abort(ErrorCode::kProtocolViolation, e.message());
    }
    open_ = false;
    throw;
  }
}

void BridgeSession::Abort(ErrorCode code, const std::string& message) {
  if (open_) {
    try {
      Send(Frame::FromJson(FrameType::kErr, ErrPayload(code, message)));
    } catch (const Error&) {
      // The peer is already gone; the original error is what matters.
    }
  }
  open_ = false;
  throw Error(code, message);
}

const PeerInfo& BridgeSession::Hello(const EmbodimentConfig& embodiment) {
  embodiment_ = embodiment;
  Send(Frame::FromJson(FrameType::kHello, {{"protocol_version", kBridgeProtocolVersion},
                                           {"embodiment", EmbodimentJson(embodiment)},
                                           {"action_dim", embodiment.dof + 1}}));
  const Frame reply = Receive();
  if (reply.type != FrameType::kHello) {
    Abort(ErrorCode::kProtocolViolation,
          "expected HELLO, got " + std::string(FrameTypeName(reply.type)));
  }
  Json j;
  try {
    j = reply.JsonPayload();
  } catch (const Error& e) {
    Abort(ErrorCode::kProtocolViolation, e.message());
  }
  if (!j.is_object() || j.value("protocol_version", -1) != kBridgeProtocolVersion) {
    Abort(ErrorCode::kProtocolViolation, "policy process speaks another protocol version");
  }
  PeerInfo info;
  try {
    info.policy_id = j.value("policy_id", std::string("external"));
    info.dof = j.at("dof").get<int>();
    info.needs_images = j.value("needs_images", true);
    info.artifact_bytes = j.value("artifact_bytes", std::uint64_t{0});
    if (j.contains("accelerator_mem_bytes") && !j.at("accelerator_mem_bytes").is_null()) {
      info.accelerator_mem_bytes = j.at("accelerator_mem_bytes").get<std::uint64_t>();
    }
  } catch (const Json::exception& e) {
    Abort(ErrorCode::kProtocolViolation, std::string("bad HELLO: ") + e.what());
  }
  if (info.dof != embodiment.dof) {
    Abort(ErrorCode::kEmbodimentMismatch, "policy expects dof " + std::to_string(info.dof) +
                                              ", embodiment has " +
                                              std::to_string(embodiment.dof));
  }
  peer_ = info;
  hello_done_ = true;
  return peer_;
}

void BridgeSession::Reset(const std::string& instruction) {
  if (!hello_done_) throw Error(ErrorCode::kProtocolViolation, "RESET before HELLO");
  Send(Frame::FromJson(FrameType::kReset,
                       {{"instruction", instruction}, {"embodiment", EmbodimentJson(embodiment_)}}));
}

Action BridgeSession::Step(const Observation& obs, const std::string& instruction) {
  if (!hello_done_) throw Error(ErrorCode::kProtocolViolation, "OBS before HELLO");
  Send({FrameType::kObs, EncodeObservation(obs, embodiment_, instruction, peer_.needs_images)});
  const Frame reply = Receive();
  if (reply.type != FrameType::kAct) {
    Abort(ErrorCode::kProtocolViolation,
          "expected ACT, got " + std::string(FrameTypeName(reply.type)));
  }
  const Json j = Json::parse(reply.payload.begin(), reply.payload.end(), nullptr, false);
  Action a;
  if (j.is_discarded()) Abort(ErrorCode::kMalformedAction, "ACT payload is not valid JSON");
  if (auto problem = ActionProblem(j, static_cast<std::size_t>(embodiment_.dof + 1), &a)) {
    Abort(ErrorCode::kMalformedAction, *problem);
  }
  return a;
}

void BridgeSession::Bye() {
  if (!open_) return;
  Send({FrameType::kBye, {}});
  open_ = false;
}

SessionSummary ServePolicySession(Transport& transport, const EmbodimentConfig& embodiment,
                                  const std::vector<SessionEpisode>& episodes,
                                  std::chrono::milliseconds timeout) {
  SessionSummary summary;
  BridgeSession session(transport, timeout, &summary.transcript);
  try {
    summary.peer = session.Hello(embodiment);
    for (const auto& ep : episodes) {
      session.Reset(ep.instruction);
      summary.actions.emplace_back();
      for (const auto& obs : ep.observations) {
        summary.actions.back().push_back(session.Step(obs, ep.instruction));
      }
    }
    session.Bye();
  } catch (const Error& e) {
    summary.error = e.what();
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Policy-process side

void RunClient(Transport& transport, const PeerInfo& info, const ClientCallbacks& callbacks,
               std::chrono::milliseconds timeout) {
  auto send_err = [&](ErrorCode code, const std::string& msg) {
    try {
      WriteFrame(transport, Frame::FromJson(FrameType::kErr, ErrPayload(code, msg)));
    } catch (const Error&) {
    }
    throw Error(code, msg);
  };
  bool hello = false;
  EmbodimentConfig embodiment;
  for (;;) {
    Frame f;
    try {
      f = ReadFrame(transport, timeout);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBridgeDisconnected) return;
      throw;
    }
    if (f.type == FrameType::kBye) return;
    if (f.type == FrameType::kErr) {
      const Json j = Json::parse(f.payload.begin(), f.payload.end(), nullptr, false);
      const std::string code = j.is_object() ? j.value("code", "") : "";
      const std::string msg = j.is_object() ? j.value("message", "") : "unreadable ERR";
      throw Error(ErrorCode::kProtocolViolation, "harness reported " + code + ": " + msg);
    }
    if (!hello && f.type != FrameType::kHello) {
      send_err(ErrorCode::kProtocolViolation, "first frame must be HELLO");
    }
    switch (f.type) {
      case FrameType::kHello: {
        const Json j = f.JsonPayload();
        if (j.value("protocol_version", -1) != kBridgeProtocolVersion) {
          send_err(ErrorCode::kProtocolViolation, "unsupported protocol version");
        }
        from_json(j.at("embodiment"), embodiment);
        Json reply = {{"protocol_version", kBridgeProtocolVersion},
                      {"policy_id", info.policy_id},
                      {"dof", info.dof > 0 ? info.dof : embodiment.dof},
                      {"needs_images", info.needs_images},
                      {"artifact_bytes", info.artifact_bytes}};
        reply["accelerator_mem_bytes"] =
            info.accelerator_mem_bytes ? Json(*info.accelerator_mem_bytes) : Json(nullptr);
        WriteFrame(transport, Frame::FromJson(FrameType::kHello, reply));
        hello = true;
        break;
      }
      case FrameType::kReset: {
        const Json j = f.JsonPayload();
        if (callbacks.on_reset) callbacks.on_reset(j.value("instruction", ""), embodiment);
        break;
      }
      case FrameType::kObs: {
        const DecodedObservation obs = DecodeObservation(f.payload);
        const std::vector<double> values = callbacks.on_observe(obs);
        WriteFrame(transport, Frame::FromJson(FrameType::kAct, {{"values", values}}));
        break;
      }
      default:
        send_err(ErrorCode::kProtocolViolation,
                 "unexpected " + std::string(FrameTypeName(f.type)) + " frame");
    }
  }
}

// ---------------------------------------------------------------------------
// Child process

ChildProcess::ChildProcess(const std::string& command) {
  IgnoreSigpipeOnce();
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kIoError, std::string("pipe failed: ") + std::strerror(errno));
  }
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kIoError, std::string("pipe failed: ") + std::strerror(errno));
  }
  const std::string script = "exec " + command;
  const char* argv[] = {"sh", "-c", script.c_str(), nullptr};
  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw Error(ErrorCode::kIoError, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execv("/bin/sh", const_cast<char* const*>(argv));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  transport_ = std::make_unique<FdTransport>(from_child[0], to_child[1], true);
}

ChildProcess::~ChildProcess() { Terminate(); }

void ChildProcess::Terminate(std::chrono::milliseconds grace) {
  if (transport_) transport_->Close();
  if (pid_ <= 0) return;
  const auto deadline = Clock::now() + grace;
  int status = 0;
  while (::waitpid(pid_, &status, WNOHANG) == 0) {
    if (Clock::now() >= deadline) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  pid_ = -1;
}

BridgePolicy::BridgePolicy(BridgeOptions options) : options_(std::move(options)) {}

BridgePolicy::~BridgePolicy() {
  if (session_ && session_->open()) {
    try {
      session_->Bye();
    } catch (const Error&) {
    }
  }
  Stop();
}

std::string BridgePolicy::id() const { return "bridge:" + options_.command; }

void BridgePolicy::Start(const EmbodimentConfig& embodiment) {
  child_ = std::make_unique<ChildProcess>(options_.command);
  session_ = std::make_unique<BridgeSession>(child_->transport(), options_.timeout);
  try {
    peer_ = session_->Hello(embodiment);
  } catch (const Error&) {
    Stop();
    throw;
  }
}

void BridgePolicy::Stop() {
  session_.reset();
  if (child_) child_->Terminate(std::chrono::milliseconds(200));
  child_.reset();
}

void BridgePolicy::Reset(const std::string& instruction, const EmbodimentConfig& embodiment) {
  instruction_ = instruction;
  if (!session_ || !session_->open()) {
    Stop();
    Start(embodiment);
  } else if (peer_ && peer_->dof != embodiment.dof) {
    throw Error(ErrorCode::kEmbodimentMismatch, "policy process was started for another dof");
  }
  try {
    session_->Reset(instruction);
  } catch (const Error&) {
    Stop();
    throw;
  }
}

Action BridgePolicy::Act(const Observation& obs) {
  if (!session_ || !session_->open()) {
    throw Error(ErrorCode::kBridgeDisconnected, "no live policy process");
  }
  try {
    return session_->Step(obs, instruction_);
  } catch (const Error&) {
    Stop();
    throw;
  }
}

bool BridgePolicy::needs_images() const { return peer_ ? peer_->needs_images : true; }

std::uint64_t BridgePolicy::artifact_bytes() const { return peer_ ? peer_->artifact_bytes : 0; }

std::optional<std::uint64_t> BridgePolicy::accelerator_bytes() const {
  return peer_ ? peer_->accelerator_mem_bytes : std::nullopt;
}

pid_t BridgePolicy::child_pid() const { return child_ ? child_->pid() : -1; }

std::optional<PolicyFactory> BridgePolicyFactory(const std::string& selector,
                                                 std::chrono::milliseconds timeout) {
  constexpr std::string_view kPrefix = "bridge:";
  if (selector.rfind(kPrefix, 0) != 0) return std::nullopt;
  std::string command = selector.substr(kPrefix.size());
  if (command.empty()) throw Error(ErrorCode::kInvalidArgument, "bridge selector needs a command");
  return PolicyFactory([command, timeout] {
    return std::make_unique<BridgePolicy>(BridgeOptions{command, timeout});
  });
}

PolicyFactory MakePolicyFactory(const std::string& selector) {
  if (auto f = ScriptedPolicyFactory(selector)) return *f;
  if (auto f = BridgePolicyFactory(selector)) return *f;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown policy '" + selector +
                  "' (expected expert, reach-only, frozen, zero, random:N, delayed:MS, "
                  "jitter:AMP or bridge:COMMAND)");
}

}  // namespace nebula
