"""Model binary format.

Layout: magic b"KNITPADM", u32 version, u32 header length, JSON header,
then the raw tensor buffers. The header records the model spec and, for
each tensor, its name, shape, dtype, and byte offset into the buffer
region. All integers and floats are little-endian; round trips are
bit-identical.
"""

import json
import struct
from dataclasses import asdict

import numpy as np

from .model import ModelParams, ModelSpec

MAGIC = b"KNITPADM"
FORMAT_VERSION = 1


class ModelFormatError(RuntimeError):
    pass


def _le(dtype) -> str:
    dt = np.dtype(dtype).newbyteorder("<")
    return dt.str


def save_model(params: ModelParams, path) -> None:
    entries = []
    buffers = []
    offset = 0
    for section, table in (("tensors", params.tensors), ("running", params.running)):
        for name, arr in table.items():
            arr = np.ascontiguousarray(arr)
            raw = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes()
            key = name if section == "tensors" else f"running.{name}"
            entries.append({
                "name": key,
                "shape": list(arr.shape),
                "dtype": _le(arr.dtype),
                "offset": offset,
            })
            buffers.append(raw)
            offset += len(raw)

    header = json.dumps({
        "spec": asdict(params.spec),
        "version": params.version,
        "tensors": entries,
    }).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        for raw in buffers:
            fh.write(raw)


def load_model(path) -> ModelParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    fmt, header_len = struct.unpack("<II", blob[8:16])
    if fmt != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {fmt}")
    try:
        header = json.loads(blob[16:16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError("corrupt header") from exc

    spec = ModelSpec(**header["spec"])
    body = blob[16 + header_len:]
    tensors = {}
    running = {}
    for entry in header["tensors"]:
        dt = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        start = entry["offset"]
        stop = start + count * dt.itemsize
        if stop > len(body):
            raise ModelFormatError(f"tensor {entry['name']!r} overruns the file")
        arr = np.frombuffer(body[start:stop], dtype=dt).reshape(entry["shape"]).copy()
        name = entry["name"]
        if name.startswith("running."):
            running[name[len("running."):]] = arr
        else:
            tensors[name] = arr
    return ModelParams(spec=spec, tensors=tensors, running=running,
                       version=header.get("version", 1))
