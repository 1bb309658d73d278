"""Small shared helpers: seed derivation and JSON array serialization."""

from __future__ import annotations

import json

import numpy as np

_MASK = (1 << 64) - 1


def derive_seed(seed: int, index: int) -> int:
    """Mix (seed, index) into an independent 64-bit stream seed (splitmix64)."""
    z = (int(seed) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def arrays_to_json(arrays: dict[str, np.ndarray], meta: dict | None = None) -> str:
    """Serialize named float arrays with explicit shapes, deterministically."""
    doc: dict = {"meta": meta or {}}
    for name, arr in arrays.items():
        a = np.asarray(arr, dtype=np.float64)
        doc[name] = {"shape": list(a.shape), "data": a.ravel().tolist()}
    return json.dumps(doc, sort_keys=True)


def arrays_from_json(text: str) -> tuple[dict[str, np.ndarray], dict]:
    doc = json.loads(text)
    meta = doc.pop("meta", {})
    arrays = {}
    for name, entry in doc.items():
        arrays[name] = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
    return arrays, meta
