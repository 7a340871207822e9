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

#ifndef NEBULA_JSON_IO_H_
#define NEBULA_JSON_IO_H_

#include <nlohmann/json.hpp>

#include "nebula/episode.h"
#include "nebula/storage.h"

namespace nebula {

using Json = nlohmann::json;

void to_json(Json& j, const EmbodimentConfig& e);
void from_json(const Json& j, EmbodimentConfig& e);
void to_json(Json& j, const TaskMeta& m);
void from_json(const Json& j, TaskMeta& m);
void to_json(Json& j, const EpisodeSummary& s);
void from_json(const Json& j, EpisodeSummary& s);
void to_json(Json& j, const Manifest& m);
void from_json(const Json& j, Manifest& m);

Family FamilyFromJson(const Json& j);
Tier TierFromJson(const Json& j);

}  // namespace nebula

#endif  // NEBULA_JSON_IO_H_
