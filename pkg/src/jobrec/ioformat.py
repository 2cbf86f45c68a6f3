"""Deterministic single-file container for checkpoints.

Layout: magic, 8-byte big-endian header length, UTF-8 JSON header, then the
raw array payloads concatenated in header order (C-contiguous,
little-endian).  Unlike ``np.savez`` there are no zip timestamps, so two
writes of the same content are byte-identical -- which the reproducibility
contract relies on.
"""

from __future__ import annotations

import json
import struct
from typing import Any

import numpy as np

from jobrec.errors import ParseError

_MAGIC = b"JRCKPT1\n"


def save_arrays(path: str, meta: dict[str, Any], arrays: dict[str, np.ndarray]) -> None:
    """Write *meta* (JSON-serializable) and named arrays to *path*."""
    specs = []
    payloads = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        specs.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)})
        payloads.append(arr.tobytes())
    header = json.dumps({"meta": meta, "arrays": specs}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack(">Q", len(header)))
        fh.write(header)
        for blob in payloads:
            fh.write(blob)


def load_arrays(path: str) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    """Read back a file written by :func:`save_arrays`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ParseError(path, 0, "not a jobrec checkpoint file")
        (hlen,) = struct.unpack(">Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"])
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = fh.read(count * dtype.itemsize)
            arrays[spec["name"]] = np.frombuffer(data, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays
