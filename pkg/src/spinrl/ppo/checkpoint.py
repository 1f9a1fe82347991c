"""Checkpoint file: a magic line, one JSON header line, then raw float64 data.

The header lists every array with its shape and byte offset into the data
block. Arrays are written little-endian, so a save/load round trip is
bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import IncompatibleCheckpoint
from .network import Params
from .optim import AdamState

MAGIC = b"SPINRL-CHECKPOINT\n"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    params: Params
    hyperparams: dict[str, Any]
    rng_state: dict[str, Any]
    episodes: int = 0
    updates: int = 0
    steps: int = 0
    optimizer: AdamState | None = None
    observation_bounds: dict[str, list[float]] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def _arrays(ckpt: Checkpoint) -> dict[str, np.ndarray]:
    out = {f"params/{k}": v for k, v in ckpt.params.items()}
    if ckpt.optimizer is not None:
        out.update({f"adam_m/{k}": v for k, v in ckpt.optimizer.m.items()})
        out.update({f"adam_v/{k}": v for k, v in ckpt.optimizer.v.items()})
    return out


def save_checkpoint(ckpt: Checkpoint, path: str) -> None:
    arrays = _arrays(ckpt)
    index = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        data = np.ascontiguousarray(arrays[name], dtype="<f8").tobytes()
        index.append({"name": name, "shape": list(arrays[name].shape), "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = {
        "format_version": ckpt.format_version,
        "hyperparams": ckpt.hyperparams,
        "rng_state": ckpt.rng_state,
        "episodes": ckpt.episodes,
        "updates": ckpt.updates,
        "steps": ckpt.steps,
        "adam_step": None if ckpt.optimizer is None else ckpt.optimizer.step,
        "observation_bounds": ckpt.observation_bounds,
        "arrays": index,
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for b in blobs:
            fh.write(b)


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as fh:
        if fh.readline() != MAGIC:
            raise IncompatibleCheckpoint(f"{path}: not a checkpoint file")
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise IncompatibleCheckpoint(f"{path}: corrupt header: {exc}") from exc
        data = fh.read()
    if header.get("format_version") != FORMAT_VERSION:
        raise IncompatibleCheckpoint(
            f"{path}: format version {header.get('format_version')} is not supported (expected {FORMAT_VERSION})"
        )
    groups: dict[str, Params] = {"params": {}, "adam_m": {}, "adam_v": {}}
    for entry in header["arrays"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(data):
            raise IncompatibleCheckpoint(f"{path}: truncated data for {entry['name']}")
        arr = np.frombuffer(data[start:start + nbytes], dtype="<f8").astype(np.float64).reshape(entry["shape"])
        group, key = entry["name"].split("/", 1)
        groups[group][key] = arr
    optimizer = None
    if header.get("adam_step") is not None:
        optimizer = AdamState(groups["adam_m"], groups["adam_v"], int(header["adam_step"]))
    return Checkpoint(
        params=groups["params"],
        hyperparams=header["hyperparams"],
        rng_state=header["rng_state"],
        episodes=header["episodes"],
        updates=header["updates"],
        steps=header["steps"],
        optimizer=optimizer,
        observation_bounds=header.get("observation_bounds", {}),
        format_version=header["format_version"],
    )
