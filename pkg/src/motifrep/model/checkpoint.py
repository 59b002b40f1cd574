"""Versioned binary checkpoint container.

Layout: magic "MRTC", u32 format version, u64 header length, header JSON
(config, variant, step, seed, array manifest), then the raw little-endian
array blobs back to back. Loading is bitwise-exact; a truncated file, bad
magic, or version mismatch raises CheckpointError.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .config import ModelConfig
from .training import ModelState

MAGIC = b"MRTC"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _collect_arrays(state: ModelState) -> dict[str, np.ndarray]:
    arrays = {}
    for prefix, group in (("params", state.params), ("adam_m", state.adam_m), ("adam_v", state.adam_v)):
        for name, arr in group.items():
            arrays[f"{prefix}/{name}"] = arr
    return arrays


def save_checkpoint(state: ModelState, path: str | Path) -> None:
    arrays = _collect_arrays(state)
    manifest = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        manifest.append(
            {
                "name": name,
                "dtype": str(arr.dtype),
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": arr.nbytes,
            }
        )
        offset += arr.nbytes
    header = {
        "format_version": FORMAT_VERSION,
        "config": state.config.to_json_dict(),
        "variant": state.variant,
        "step": state.step,
        "seed": state.seed,
        "arrays": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for name in sorted(arrays):
            fh.write(np.ascontiguousarray(arrays[name]).tobytes())


def load_checkpoint(
    path: str | Path, expected_config: ModelConfig | None = None
) -> ModelState:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint (bad magic)")
    version, header_len = struct.unpack("<IQ", data[4:16])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    if len(data) < 16 + header_len:
        raise CheckpointError(f"{path}: truncated header")
    header = json.loads(data[16 : 16 + header_len])
    config = ModelConfig.from_json_dict(header["config"])
    if expected_config is not None and expected_config != config:
        raise CheckpointError(
            f"{path}: checkpoint config does not match the expected configuration"
        )

    blob = data[16 + header_len :]
    groups: dict[str, dict[str, np.ndarray]] = {"params": {}, "adam_m": {}, "adam_v": {}}
    for entry in header["arrays"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(blob):
            raise CheckpointError(f"{path}: truncated array data for {entry['name']}")
        arr = np.frombuffer(blob[start : start + nbytes], dtype=entry["dtype"]).reshape(
            entry["shape"]
        ).copy()
        prefix, name = entry["name"].split("/", 1)
        groups[prefix][name] = arr

    state = ModelState(
        config=config,
        variant=header["variant"],
        params=groups["params"],
        adam_m=groups["adam_m"],
        adam_v=groups["adam_v"],
        step=header["step"],
        seed=header["seed"],
    )
    _validate_shapes(state)
    return state


def _validate_shapes(state: ModelState) -> None:
    from .network import init_params

    rng = np.random.default_rng(0)
    reference = init_params(state.config, rng)
    for name, ref in reference.items():
        if name not in state.params:
            raise CheckpointError(f"checkpoint is missing parameter {name}")
        if state.params[name].shape != ref.shape:
            raise CheckpointError(
                f"shape mismatch for {name}: "
                f"{state.params[name].shape} vs expected {ref.shape}"
            )


def checkpoint_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
