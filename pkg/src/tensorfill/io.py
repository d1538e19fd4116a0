"""File formats: TNS1 tensors, MSK1 masks, and CSV ingestion.

Both binary formats share a 28-byte header: a 4-byte magic string followed by
three unsigned 64-bit little-endian dimensions (n1, n2, n3).  TNS1 stores
n1*n2*n3 IEEE-754 float64 little-endian values; MSK1 stores one byte (0 or 1)
per entry.  Values are laid out with the first index varying fastest, i.e.
element (i1, i2, i3) lives at linear offset i1 + n1*i2 + n1*n2*i3.

All writers are atomic: content goes to a temporary file in the destination
directory, is fsynced, then renamed over the target.
"""

import csv
import os
import struct
import tempfile

import numpy as np

from .errors import InputError
from .tensor import check_mask, check_tensor

TENSOR_MAGIC = b"TNS1"
MASK_MAGIC = b"MSK1"
_HEADER = struct.Struct("<4s3Q")


def atomic_write_bytes(path, payload):
    """Write ``payload`` to ``path`` via a temp file in the same directory."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tensorfill-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_header(raw, magic, path):
    if len(raw) < _HEADER.size:
        raise InputError(f"{path}: truncated header ({len(raw)} bytes)")
    got, n1, n2, n3 = _HEADER.unpack_from(raw)
    if got != magic:
        raise InputError(
            f"{path}: bad magic {got!r}, expected {magic.decode()}"
        )
    if min(n1, n2, n3) == 0:
        raise InputError(f"{path}: zero dimension in header ({n1},{n2},{n3})")
    return (n1, n2, n3)


def _read_file(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def write_tensor(path, x):
    """Serialize a third-order tensor to a TNS1 file."""
    x = check_tensor(x)
    header = _HEADER.pack(TENSOR_MAGIC, *x.shape)
    atomic_write_bytes(path, header + x.astype("<f8").tobytes(order="F"))


def read_tensor(path):
    """Read a TNS1 file back into a float64 array of shape (n1, n2, n3)."""
    raw = _read_file(path)
    dims = _read_header(raw, TENSOR_MAGIC, path)
    count = dims[0] * dims[1] * dims[2]
    body = raw[_HEADER.size:]
    if len(body) != 8 * count:
        raise InputError(
            f"{path}: expected {8 * count} value bytes, found {len(body)}"
        )
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: tensor contains non-finite values")
    return values.reshape(dims, order="F")


def write_mask(path, mask):
    """Serialize a binary mask to an MSK1 file."""
    mask = check_mask(mask)
    header = _HEADER.pack(MASK_MAGIC, *mask.shape)
    body = mask.astype(np.uint8).tobytes(order="F")
    atomic_write_bytes(path, header + body)


def read_mask(path):
    """Read an MSK1 file back into a float64 array of 0s and 1s."""
    raw = _read_file(path)
    dims = _read_header(raw, MASK_MAGIC, path)
    count = dims[0] * dims[1] * dims[2]
    body = raw[_HEADER.size:]
    if len(body) != count:
        raise InputError(
            f"{path}: expected {count} mask bytes, found {len(body)}"
        )
    flags = np.frombuffer(body, dtype=np.uint8)
    if not np.all((flags == 0) | (flags == 1)):
        raise InputError(f"{path}: mask bytes must be 0 or 1")
    return flags.astype(np.float64).reshape(dims, order="F")


def ingest_csv(path, dims):
    """Parse an n1-row, (n2*n3)-column CSV into a tensor and observation mask.

    Column j (0-based) of row i1 maps to entry (i1, j % n2, j // n2), so the
    mode-0 unfolding of the result equals the CSV grid.  Blank cells become
    unobserved: mask 0 and value 0.  Raises InputError on ragged rows or
    non-numeric cells, reporting the 1-based row and column.
    """
    n1, n2, n3 = dims
    ncols = n2 * n3
    values = np.zeros((n1, ncols))
    flags = np.ones((n1, ncols))
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if len(rows) != n1:
        raise InputError(f"{path}: expected {n1} rows, found {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise InputError(
                f"{path}: row {i + 1} has {len(row)} columns, expected {ncols}"
            )
        for j, cell in enumerate(row):
            text = cell.strip()
            if text == "":
                flags[i, j] = 0.0
                continue
            try:
                values[i, j] = float(text)
            except ValueError as exc:
                raise InputError(
                    f"{path}: non-numeric cell at row {i + 1}, column {j + 1}: "
                    f"{cell!r}"
                ) from exc
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: non-finite cell value")
    tensor = values.reshape((n1, n2, n3), order="F")
    mask = flags.reshape((n1, n2, n3), order="F")
    return tensor, mask
