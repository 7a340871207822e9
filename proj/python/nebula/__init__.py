# Copyright 2026 The Nebula Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the nebula core library."""

from nebula._core import (
    PROTOCOL_VERSION,
    NebulaError,
    decode_frame,
    encode_frame,
    generate_task,
    list_tasks,
    read_episode,
    run_cli,
    shard_episode_count,
    stability_score,
    verify_shard,
)

__all__ = [
    "PROTOCOL_VERSION",
    "NebulaError",
    "decode_frame",
    "encode_frame",
    "generate_task",
    "list_tasks",
    "read_episode",
    "run_cli",
    "shard_episode_count",
    "stability_score",
    "verify_shard",
]
