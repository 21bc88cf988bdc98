"""Named-tensor binary weight files.

Layout (all little-endian)::

    b"MLSW"  u32 version  u32 count
    count x [u16 name_len, name (UTF-8), u8 rank, u32 dims[rank], f32 data]

Data is row-major float32.
"""

import struct

import numpy as np

from .errors import InputError

MAGIC = b"MLSW"
VERSION = 1


class WeightFormatError(InputError):
    pass


def write_tensors(sink, tensors):
    """Write an ordered ``name -> array`` mapping to a binary stream."""
    sink.write(MAGIC)
    sink.write(struct.pack("<II", VERSION, len(tensors)))
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f4")
        raw = name.encode("utf-8")
        sink.write(struct.pack("<H", len(raw)))
        sink.write(raw)
        sink.write(struct.pack("<B", arr.ndim))
        sink.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        sink.write(arr.tobytes(order="C"))


def _read_exact(source, n, what):
    buf = source.read(n)
    if len(buf) != n:
        raise WeightFormatError(f"unexpected end of {what}")
    return buf


def read_tensors(source):
    """Read a weight file into an ordered ``name -> float64 array`` dict."""
    if _read_exact(source, 4, "header") != MAGIC:
        raise WeightFormatError("bad magic: not an MLSW weight file")
    version, count = struct.unpack("<II", _read_exact(source, 8, "header"))
    if version != VERSION:
        raise WeightFormatError(f"unsupported weight file version {version}")
    tensors = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", _read_exact(source, 2, "tensor header"))
        name = _read_exact(source, name_len, "tensor header").decode("utf-8")
        (rank,) = struct.unpack("<B", _read_exact(source, 1, "tensor header"))
        dims = struct.unpack(f"<{rank}I", _read_exact(source, 4 * rank, "tensor header"))
        size = int(np.prod(dims, dtype=np.int64))
        data = _read_exact(source, 4 * size, "tensor data")
        if name in tensors:
            raise WeightFormatError(f"duplicate tensor {name!r}")
        tensors[name] = np.frombuffer(data, dtype="<f4").reshape(dims).astype(np.float64)
    if source.read(1):
        raise WeightFormatError("trailing bytes after last tensor")
    return tensors
