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

"""Smoke tests for the nebula Python module."""

import json
import math
import os
import struct
import subprocess

import pytest

import nebula


def test_catalog_and_generation_are_deterministic():
    names = nebula.list_tasks()
    assert len(names) == 54
    assert "Control/Easy/1" in names
    a = json.loads(nebula.generate_task("Control", "Easy", 1, 3))
    b = json.loads(nebula.generate_task("Control", "Easy", 1, 3))
    assert a == b
    assert a["spec"]["instruction"]
    assert a["scene"]["objects"]


def test_fixed_params_do_not_follow_the_probe():
    specs = [
        json.loads(nebula.generate_task("Perception", "Easy", 1, 9, probe_variant=v))["spec"]
        for v in ("red", "blue")
    ]
    assert specs[0]["fixed_params"] == specs[1]["fixed_params"]
    assert specs[0]["probe_params"] != specs[1]["probe_params"]


def test_unknown_family_raises():
    with pytest.raises(nebula.NebulaError):
        nebula.generate_task("Cooking", "Easy", 1, 0)


def test_stability_matches_closed_form():
    assert nebula.stability_score([[0.1, 0.2]] * 5) == 1.0
    assert math.isclose(nebula.stability_score([[0.0], [1.0]]), math.exp(-1.0), abs_tol=1e-12)


def test_frame_codec_matches_wire_layout():
    payload = b'{"values":[0.0]}'
    frame = nebula.encode_frame(4, payload)
    assert frame == struct.pack("<IB", len(payload) + 1, 4) + payload
    assert nebula.decode_frame(frame[:3]) is None
    assert nebula.decode_frame(frame + b"\x00") == (4, payload, len(frame))


def _gen(tmp_path):
    out = tmp_path / "ds"
    code, stdout, _ = nebula.run_cli(
        ["gen", "--family", "Control", "--tier", "Easy", "--template", "1",
         "--n", "3", "--seed", "2", "--out", str(out)])
    assert code == 0
    return json.loads(stdout)


def test_generated_shard_reads_back(tmp_path):
    summary = _gen(tmp_path)
    assert summary["episodes"] == 3
    shards = sorted((tmp_path / "ds").glob("*.shard"))
    assert len(shards) == 1
    assert nebula.shard_episode_count(str(shards[0])) == 3
    assert nebula.verify_shard(str(shards[0])) == []
    ep = nebula.read_episode(str(shards[0]), 0)
    assert ep["family"] == "Control"
    assert ep["final_success"] == 1
    assert len(ep["actions"]) == ep["step_count"]
    assert all(len(a) == 8 for a in ep["actions"])


def test_shard_header_and_checksums(tmp_path):
    _gen(tmp_path)
    shard = next((tmp_path / "ds").glob("*.shard"))
    data = shard.read_bytes()
    magic, version, count = struct.unpack_from("<4sHQ", data, 0)
    assert (magic, version, count) == (b"NEBS", 1, 3)
    (index_offset,) = struct.unpack_from("<Q", data, len(data) - 8)
    assert index_offset + 20 * count + 8 == len(data)
    for i in range(count):
        off, length, crc = struct.unpack_from("<QQI", data, index_offset + 20 * i)
        assert struct.unpack_from("<Q", data, off)[0] == length
        assert crc == _crc32c(data[off + 8:off + 8 + length])
    corrupted = bytearray(data)
    corrupted[20] ^= 0x01
    shard.write_bytes(bytes(corrupted))
    assert nebula.verify_shard(str(shard))


def _crc32c(data):
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (0x82F63B78 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


def test_cli_binary_usage_error():
    cli = os.environ.get("NEBULA_CLI")
    if not cli:
        pytest.skip("NEBULA_CLI is not set")
    proc = subprocess.run([cli, "gen"], capture_output=True, check=False)
    assert proc.returncode == 2
