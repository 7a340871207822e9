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

// Minimal external policy speaking the bridge protocol over stdin/stdout.
// Used by tests and as a reference client.
//
//   echo_policy [--mode zero|bad-length|out-of-range|garbage|crash-after]
//               [--after N] [--delay-ms MS] [--dof N] [--needs-images]
//               [--artifact-bytes N] [--accelerator-bytes N]

#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "nebula/bridge.h"

int main(int argc, char** argv) {
  CLI::App app("Reference bridge policy", "echo_policy");
  std::string mode = "zero";
  int after = 0;
  int delay_ms = 0;
  int dof = 0;
  bool needs_images = false;
  std::uint64_t artifact_bytes = 0;
  std::optional<std::uint64_t> accelerator_bytes;
  app.add_option("--mode", mode, "Reply behavior")
      ->check(CLI::IsMember({"zero", "bad-length", "out-of-range", "garbage", "crash-after"}));
  app.add_option("--after", after, "Observations answered normally before misbehaving");
  app.add_option("--delay-ms", delay_ms, "Sleep before every action");
  app.add_option("--dof", dof, "Advertised dof; 0 echoes the harness");
  app.add_flag("--needs-images", needs_images, "Ask for rendered views");
  app.add_option("--artifact-bytes", artifact_bytes, "Reported artifact size");
  app.add_option("--accelerator-bytes", accelerator_bytes, "Reported accelerator memory");
  CLI11_PARSE(app, argc, argv);

  nebula::FdTransport transport(STDIN_FILENO, STDOUT_FILENO, false);
  nebula::PeerInfo info;
  info.policy_id = "echo:" + mode;
  info.dof = dof;
  info.needs_images = needs_images;
  info.artifact_bytes = artifact_bytes;
  info.accelerator_mem_bytes = accelerator_bytes;

  int seen = 0;
  nebula::ClientCallbacks callbacks;
  callbacks.on_observe = [&](const nebula::DecodedObservation& obs) {
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    std::vector<double> values(static_cast<std::size_t>(obs.dof) + 1, 0.0);
    const bool misbehave = seen++ >= after;
    if (misbehave) {
      if (mode == "bad-length") values.push_back(0.0);
      if (mode == "out-of-range") values[0] = 2.0;
      if (mode == "crash-after") std::_Exit(3);
      if (mode == "garbage") {
        const std::vector<std::uint8_t> junk = {0xff, 0xff, 0xff, 0x7f, 0x09};
        transport.Write(junk);
      }
    }
    return values;
  };
  try {
    nebula::RunClient(transport, info, callbacks);
  } catch (const std::exception& e) {
    std::cerr << "echo_policy: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
