import json
import os
import random
from fractions import Fraction
from math import comb
from pathlib import Path

import jsonschema
import pytest

import pyramid_oram as po

SCHEMAS = Path(os.environ.get("PYRAMID_SCHEMA_DIR", Path(__file__).parents[2] / "docs" / "schemas"))


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def test_matches_a_dict_under_random_ops():
    cfg = po.PyramidConfig(capacity=256, first_level_size=8, seed=3)
    oram = po.PyramidOram(cfg)
    ref = {}
    rng = random.Random(7)
    for i in range(3000):
        key = rng.randrange(256)
        if rng.random() < 0.5:
            value = i.to_bytes(8, "little")
            prev = oram.write(key, value)
            expected = ref.get(key)
            ref[key] = value.ljust(po.PAYLOAD_BYTES, b"\0")
        else:
            prev = oram.read(key)
            expected = ref.get(key)
        assert prev == expected
    assert oram.counter == 3000
    assert oram.real_count == len(ref)
    assert oram.validate() == ""


def test_record_matches_schedule():
    cfg = po.PyramidConfig(capacity=64, first_level_size=4)
    oram = po.PyramidOram(cfg)
    for t in range(200):
        oram.read(t % 64)
        rec = oram.last_record
        assert rec["online_buckets"] == po.online_cost(cfg, t)
        assert rec["total_buckets"] == po.total_cost(cfg, t)
        assert rec["rebuilt_level"] == po.rebuild_target(cfg, t + 1)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        po.PyramidConfig(capacity=1000)
    oram = po.PyramidOram(po.PyramidConfig(capacity=8, first_level_size=2))
    for k in range(8):
        oram.write(k, b"x")
    with pytest.raises(po.CapacityExceeded):
        oram.write(100, b"y")
    with pytest.raises(ValueError):
        oram.write(1, b"z" * (po.PAYLOAD_BYTES + 1))


def test_config_json_round_trip():
    cfg = po.PyramidConfig(capacity=1 << 12, first_level_size=32, c=5, seed=9, policy="retry")
    again = po.PyramidConfig.from_json(cfg.to_json())
    assert again == cfg
    assert len(cfg.levels()) == cfg.level_count == 8


def test_spill_bound_is_exact():
    b = po.expected_spill_bound(1024, 1024, 4)
    assert po.exact_fraction(b) == Fraction(comb(1024, 5), 1024**4)
    assert b["value"] == pytest.approx(8.450284433551133, rel=1e-12)
    assert po.exact_fraction(po.expected_spill_bound(4, 16, 4)) == 0
    mc = po.mc_throw_spill(1024, 1024, 4, 500, seed=1)
    assert mc["mean"] <= b["value"]


def test_cli_reports_validate_against_schemas():
    code, out, _ = po.run_cli(["prn", "--n", "8", "--c", "2"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("prn"))
    jsonschema.validate(doc["config"], schema("run_config"))
    assert doc["repartitions"] == 12

    code, out, _ = po.run_cli(["bounds", "--m", "1024", "--n", "1024", "--c", "4", "--trials", "200"])
    assert code == 0
    jsonschema.validate(json.loads(out), schema("bounds"))

    code, out, _ = po.run_cli(["verify", "--N", "256", "--p", "8", "--ops", "500"])
    assert code == 0
    jsonschema.validate(json.loads(out), schema("verify"))

    code, out, _ = po.run_cli(["bench", "--N", "256", "--p", "8", "--ops", "64", "--format", "json", "--cdf"])
    assert code == 0
    jsonschema.validate(json.loads(out), schema("bench"))


def test_cli_bench_csv_and_exit_codes():
    code, out, _ = po.run_cli(["bench", "--N", "256", "--p", "8", "--ops", "80", "--no-timing"])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "op_index,found,rebuilt_level,online_buckets,total_buckets,wall_ns"
    rows = [list(map(int, line.split(","))) for line in lines[1:]]
    assert [r[0] for r in rows] == list(range(80))
    assert sum(r[2] >= 1 for r in rows) == 80 // 8
    assert po.run_cli(["bench", "--N", "1000"])[0] == 2
    assert po.run_cli(["nonsense"])[0] == 2
