# app/storage/checkpoint.py
"""
Trajectory checkpoints: one snapshot file per (quantity, time node) plus a
JSON index

    {"version": 1, "n": N, "length": L, "provenance": {...},
     "nodes": [{"t": t, "u": "u_0000.bsq", "theta": "theta_0000.bsq"}, ...]}
"""
import json
import logging
import os
from typing import Any, Dict

from app.solver.state import State, Trajectory
from app.spectral.fields import SpectralScalar, SpectralVector
from app.storage.snapshot import read_snapshot, write_snapshot
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

INDEX_NAME = "index.json"
INDEX_VERSION = 1


def save_trajectory(directory: str, trajectory: Trajectory) -> str:
    os.makedirs(directory, exist_ok=True)
    nodes = []
    for i, st in enumerate(trajectory.states):
        u_name = f"u_{i:04d}.bsq"
        th_name = f"theta_{i:04d}.bsq"
        write_snapshot(os.path.join(directory, u_name), st.u)
        write_snapshot(os.path.join(directory, th_name), st.theta)
        nodes.append({"t": st.t, "u": u_name, "theta": th_name})
    index: Dict[str, Any] = {
        "version": INDEX_VERSION,
        "n": trajectory.grid.n,
        "length": trajectory.grid.length,
        "provenance": trajectory.provenance,
        "nodes": nodes,
    }
    path = os.path.join(directory, INDEX_NAME)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=2, default=str)
    logger.info("saved %d trajectory nodes to %s", len(nodes), directory)
    return path


def load_trajectory(directory: str) -> Trajectory:
    path = os.path.join(directory, INDEX_NAME)
    with open(path, "r", encoding="utf-8") as fh:
        index = json.load(fh)
    if index.get("version") != INDEX_VERSION:
        raise PreconditionError(f"{path}: unsupported checkpoint version {index.get('version')!r}")
    states = []
    for node in index["nodes"]:
        u = read_snapshot(os.path.join(directory, node["u"]), divergence_free=True)
        th = read_snapshot(os.path.join(directory, node["theta"]))
        if not isinstance(u, SpectralVector) or not isinstance(th, SpectralScalar):
            raise PreconditionError(f"{directory}: node at t={node['t']} has wrong field ranks")
        if u.grid.n != index["n"]:
            raise PreconditionError(f"{directory}: snapshot grid N={u.grid.n} disagrees with index N={index['n']}")
        states.append(State(u, th, float(node["t"])))
    return Trajectory(states, dict(index.get("provenance") or {}))
