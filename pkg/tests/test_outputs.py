"""Persistence: CSV round-trips, JSON metadata, SVG well-formedness, determinism."""

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ballopt import outputs as O


def test_csv_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    rows = [{"eps": float(e), "lam": float(l), "note": "row"}
            for e, l in zip(rng.random(20), rng.random(20) * math.pi ** 7)]
    rows.append({"eps": 1e-300, "lam": 0.1 + 0.2, "note": "edge"})
    path = tmp_path / "r.csv"
    O.write_csv(str(path), rows, "deadbeef")
    back, meta = O.read_csv(str(path))
    assert meta["config_sha256"] == "deadbeef"
    assert meta["code_version"]
    for a, b in zip(rows, back):
        assert a["eps"] == b["eps"]  # bit-exact float round-trip
        assert a["lam"] == b["lam"]
        assert b["note"] == "row" or b["note"] == "edge"


def test_csv_determinism(tmp_path):
    rows = [{"a": 0.1, "b": 2.0}]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    O.write_csv(str(p1), rows, "h")
    O.write_csv(str(p2), rows, "h")
    assert p1.read_bytes() == p2.read_bytes()


def test_json_sorted_keys_and_metadata(tmp_path):
    path = tmp_path / "r.json"
    O.write_json(str(path), {"zeta": 1.0, "alpha": {"n": 2, "m": 1}, "nan": math.nan}, "ff")
    text = path.read_text()
    doc = json.loads(text)
    assert doc["_metadata"]["config_sha256"] == "ff"
    assert doc["nan"] is None
    assert text.index('"alpha"') < text.index('"zeta"')
    p2 = tmp_path / "r2.json"
    O.write_json(str(p2), {"zeta": 1.0, "alpha": {"n": 2, "m": 1}, "nan": math.nan}, "ff")
    assert path.read_bytes() == p2.read_bytes()


def test_svg_well_formed(tmp_path):
    path = tmp_path / "p.svg"
    O.svg_line_plot(str(path), [([1, 2, 3], [1.0, 0.1, 0.01], "gap")],
                    "t", "x", "y", logy=True, config_hash="ff")
    root = ET.parse(str(path)).getroot()
    assert root.tag.endswith("svg")


def test_svg_timestamp_suppressed_by_default(tmp_path):
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    for p in (p1, p2):
        O.svg_line_plot(str(p), [([0, 1], [1, 2], "s")], "t", "x", "y", config_hash="h")
    assert p1.read_bytes() == p2.read_bytes()
    p3 = tmp_path / "c.svg"
    O.svg_line_plot(str(p3), [([0, 1], [1, 2], "s")], "t", "x", "y",
                    config_hash="h", timestamp=True)
    assert b"generated_at" in p3.read_bytes()


def test_trajectory_svg(tmp_path):
    from ballopt.geometry import Disk

    path = tmp_path / "c.svg"
    O.svg_center_trajectory(str(path), O.shape_boundary_points(Disk((0, 0), 1.0)),
                            [(0.0, 0.0), (0.1, 0.0)], [0.2, 0.1], config_hash="h")
    ET.parse(str(path))


def test_check_writable(tmp_path):
    O.check_writable(str(tmp_path / "new" / "dir"))
    with pytest.raises(RuntimeError, match="not writable"):
        O.check_writable("/proc/definitely/not/writable")


def test_fmt_float_17g():
    x = 1 / 3
    assert float(O.fmt_float(x)) == x
    assert float(O.fmt_float(1e-300)) == 1e-300
