# tests/test_storage.py
import json
import math

import numpy as np
import pytest

from app.solver.initial_data import gaussian, vortex_blob
from app.solver.state import State, Trajectory
from app.spectral.grid import Grid
from app.storage.checkpoint import load_trajectory, save_trajectory
from app.storage.measurements import CSV_COLUMNS, format_number, read_measurements, write_json, write_measurements
from app.storage.snapshot import HEADER, MAGIC, read_header, read_snapshot, write_snapshot
from app.utils.errors import PreconditionError

GRID = Grid(8, 10.0)


def test_snapshot_layout_is_x_fastest(tmp_path):
    theta = gaussian(GRID, 1.0, 1.5)
    path = write_snapshot(str(tmp_path / "theta.bsq"), theta)
    assert read_header(path) == (8, 10.0, 1)
    raw = np.fromfile(path, dtype="<f8", offset=HEADER.size)
    values = theta.physical()
    # block[i + N*j + N*N*k] is the value at (i, j, k)
    assert raw[1] == values[1, 0, 0]
    assert raw[8] == values[0, 1, 0]
    assert raw[64] == values[0, 0, 1]


def test_vector_snapshot_round_trip(tmp_path):
    u = vortex_blob(GRID, 1.0, 1.5)
    path = write_snapshot(str(tmp_path / "u.bsq"), u)
    back = read_snapshot(path, divergence_free=True)
    assert back.grid == GRID
    assert np.allclose(back.physical(), u.physical(), atol=1e-15)


def test_snapshot_rejects_foreign_files(tmp_path):
    bad = tmp_path / "bad.bsq"
    bad.write_bytes(HEADER.pack(b"NOTASNAP", 8, 10.0, 1))
    with pytest.raises(PreconditionError):
        read_header(str(bad))
    short = tmp_path / "short.bsq"
    short.write_bytes(MAGIC)
    with pytest.raises(PreconditionError):
        read_header(str(short))
    truncated = tmp_path / "truncated.bsq"
    truncated.write_bytes(HEADER.pack(MAGIC, 8, 10.0, 1) + b"\0" * 16)
    with pytest.raises(PreconditionError):
        read_snapshot(str(truncated))


def test_checkpoint_round_trip(tmp_path):
    theta = gaussian(GRID, 1.0, 1.5)
    u = vortex_blob(GRID, 0.5, 1.5)
    traj = Trajectory([State(u, theta, 0.0), State(u, theta.heat(0.5), 0.5)], {"solver": "picard"})
    save_trajectory(str(tmp_path / "ckpt"), traj)
    back = load_trajectory(str(tmp_path / "ckpt"))
    assert back.times == [0.0, 0.5]
    assert back.provenance == {"solver": "picard"}
    assert np.allclose(back.final().theta.physical(), theta.heat(0.5).physical(), atol=1e-15)


def test_measurement_table(tmp_path):
    rows = [
        {"t": 0.5, "quantity": "u", "a": 0.0, "b": 0, "p": math.inf, "value": 0.1, "flag": ""},
        {"t": 1.0, "quantity": "theta", "a": 1.0, "b": 0, "p": 2.0, "value": 1e-7, "flag": "wrap-guard"},
    ]
    path = str(tmp_path / "measurements.csv")
    assert write_measurements(path, rows) == 2
    with open(path, encoding="utf-8") as fh:
        assert fh.readline().strip() == ",".join(CSV_COLUMNS)
    back = read_measurements(path)
    assert back[0]["p"] == "inf"
    assert float(back[1]["value"]) == 1e-7
    assert back[1]["flag"] == "wrap-guard"


def test_format_number():
    assert format_number(0.1) == "0.1"
    assert format_number(3) == "3"
    assert format_number(True) == "true"
    assert format_number(None) == ""
    assert format_number(-math.inf) == "-inf"


def test_write_json_handles_numpy_and_infinities(tmp_path):
    path = write_json(str(tmp_path / "out" / "fits.json"), {"a": np.float64(1.5), "b": np.arange(3), "c": math.inf})
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    assert payload == {"a": 1.5, "b": [0, 1, 2], "c": "inf"}
