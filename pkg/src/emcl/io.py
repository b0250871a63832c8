"""Embedding, state and manifest file formats.

Embedding files come in two interchangeable variants:

* text: header line ``EMB1 <rows> <cols>`` followed by one row per line of
  space-separated decimals at 9 significant digits, trivially producible
  from any encoder pipeline;
* binary: magic ``EMB1B``, two little-endian u64 dimensions, then the
  row-major float64 payload, exact for every representable value.

``read_embeddings`` sniffs the variant from the first bytes.  All writes go
through a write-temp-then-rename path so partially written files never
appear under the target name.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile

import numpy as np

from .core import InitialState
from .errors import NumericalError, ParseError, ShapeError

TEXT_MAGIC = "EMB1"
BINARY_MAGIC = b"EMB1B"
STATE_SCHEMA_VERSION = 1


def atomic_write_bytes(path, data: bytes) -> None:
    """Write to a temp file in the target directory, then rename into place."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_embeddings(path, matrix, binary: bool = False) -> None:
    """Serialize a finite 2-D float matrix in the text or binary variant."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"embeddings must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("refusing to write non-finite embeddings")
    rows, cols = arr.shape
    if binary:
        payload = BINARY_MAGIC + struct.pack("<QQ", rows, cols) + arr.astype("<f8").tobytes()
        atomic_write_bytes(path, payload)
        return
    lines = [f"{TEXT_MAGIC} {rows} {cols}"]
    for row in arr:
        lines.append(" ".join(f"{value:.9g}" for value in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_binary(path, blob: bytes) -> np.ndarray:
    header = len(BINARY_MAGIC) + 16
    if len(blob) < header:
        raise ParseError(f"{path}: truncated binary embedding header")
    rows, cols = struct.unpack("<QQ", blob[len(BINARY_MAGIC) : header])
    expected = header + rows * cols * 8
    if len(blob) != expected:
        raise ParseError(f"{path}: expected {expected} bytes for {rows}x{cols}, found {len(blob)}")
    data = np.frombuffer(blob, dtype="<f8", offset=header).reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: binary payload contains non-finite values")
    return np.ascontiguousarray(data)


def read_embeddings(path) -> np.ndarray:
    """Parse either embedding variant; parse errors carry the offending line."""
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc})") from None
    if blob.startswith(BINARY_MAGIC):
        return _read_binary(path, blob)
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text embedding file ({exc})") from None
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 3 or header[0] != TEXT_MAGIC:
        raise ParseError(f"{path}: line 1: expected '{TEXT_MAGIC} <rows> <cols>', got {lines[0]!r}")
    try:
        rows, cols = int(header[1]), int(header[2])
    except ValueError:
        raise ParseError(f"{path}: line 1: non-integer dimensions in {lines[0]!r}") from None
    if rows < 1 or cols < 1:
        raise ParseError(f"{path}: line 1: dimensions must be positive, got {rows}x{cols}")
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != rows:
        raise ParseError(f"{path}: header promises {rows} rows, found {len(body)}")
    out = np.empty((rows, cols), dtype=np.float64)
    for i, line in enumerate(body):
        fields = line.split()
        lineno = i + 2
        if len(fields) != cols:
            raise ParseError(f"{path}: line {lineno}: expected {cols} values, got {len(fields)}")
        try:
            out[i] = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
        if not np.all(np.isfinite(out[i])):
            raise ParseError(f"{path}: line {lineno}: non-finite value")
    return out


def write_state(path, state: InitialState) -> None:
    """Persist the cross-batch state as a small JSON document."""
    doc = {
        "schema_version": STATE_SCHEMA_VERSION,
        "m": state.m.tolist(),
        "alpha": state.alpha,
        "frozen": state.frozen,
    }
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_state(path) -> InitialState:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: state document must be a JSON object")
    unknown = set(doc) - {"schema_version", "m", "alpha", "frozen"}
    if unknown:
        raise ParseError(f"{path}: unknown state fields {sorted(unknown)}")
    if doc.get("schema_version") != STATE_SCHEMA_VERSION:
        raise ParseError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    try:
        return InitialState(
            m=np.asarray(doc["m"], dtype=np.float64),
            alpha=float(doc["alpha"]),
            frozen=bool(doc["frozen"]),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing state field {exc}") from None


def write_json(path, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_ground_truth(path, num_queries: int, num_candidates: int) -> np.ndarray:
    """Read a query-to-candidate mapping: one integer index per line.

    Validates length and range and reports every offending line.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = [line.strip() for line in handle]
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc})") from None
    entries = [(i + 1, line) for i, line in enumerate(lines) if line]
    mapping = np.empty(len(entries), dtype=np.int64)
    bad = []
    for pos, (lineno, line) in enumerate(entries):
        try:
            mapping[pos] = int(line)
        except ValueError:
            bad.append(f"line {lineno}: not an integer: {line!r}")
            continue
        if not 0 <= mapping[pos] < num_candidates:
            bad.append(f"line {lineno}: index {mapping[pos]} out of range [0, {num_candidates})")
    if bad:
        raise ParseError(f"{path}: " + "; ".join(bad))
    if mapping.shape[0] != num_queries:
        raise ParseError(f"{path}: {mapping.shape[0]} entries for {num_queries} queries")
    return mapping
