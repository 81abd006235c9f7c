"""File formats: snapshot matrices and run reports.

Matrix files are plain ASCII. The first line is ``K,N``; each of the next
``K`` lines holds ``2N`` comma-separated decimals, real and imaginary parts
interleaved per snapshot::

    2,3
    1.0,0.0,0.5,-0.5,0,1
    -1,2,0,0,3.25,0

Run reports are JSON objects with a ``schema`` of ``"v1"``. Non-finite
floats, which JSON cannot carry, are written as ``{"$float": "inf"}`` and
restored on load.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError

SCHEMA = "v1"


def _parse_int(tok, line, col):
    try:
        val = int(tok.strip())
    except ValueError:
        raise ParseError(f"expected an integer, got {tok.strip()!r}", line, col) from None
    if val < 1:
        raise ParseError(f"dimension must be positive, got {val}", line, col)
    return val


def parse_matrix_text(text):
    """Parse matrix-file text into a complex ``K x N`` array."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty input", 1, 1)
    head = lines[0].split(",")
    if len(head) != 2:
        raise ParseError(f"header must be 'K,N', got {lines[0].strip()!r}", 1, 1)
    k, n = _parse_int(head[0], 1, 1), _parse_int(head[1], 1, 2)
    if len(lines) - 1 != k:
        # point at the first missing row, or the first surplus one
        where = len(lines) + 1 if len(lines) - 1 < k else k + 2
        raise ParseError(f"header declares K={k} rows but {len(lines) - 1} follow", where, 1)
    out = np.empty((k, n), dtype=complex)
    for i, raw in enumerate(lines[1:]):
        lineno = i + 2
        fields = raw.split(",")
        if len(fields) != 2 * n:
            raise ParseError(f"expected {2 * n} fields, got {len(fields)}", lineno, min(len(fields), 2 * n) + 1)
        vals = np.empty(2 * n)
        for j, tok in enumerate(fields):
            try:
                v = float(tok.strip())
            except ValueError:
                raise ParseError(f"not a decimal number: {tok.strip()!r}", lineno, j + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {tok.strip()!r}", lineno, j + 1)
            vals[j] = v
        out[i] = vals[0::2] + 1j * vals[1::2]
    return out


def read_matrix_file(path):
    return parse_matrix_text(Path(path).read_text(encoding="ascii"))


def format_matrix(y):
    """Matrix-file text for ``y``; values use 17 significant digits, so reading back is exact."""
    y = np.asarray(y, dtype=complex)
    k, n = y.shape
    rows = [f"{k},{n}"]
    for row in y:
        rows.append(",".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
    return "\n".join(rows) + "\n"


def write_matrix_file(path, y):
    Path(path).write_text(format_matrix(y), encoding="ascii")


def _encode(obj):
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else {"$float": repr(v)}
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if set(obj) == {"$float"}:
            return float(obj["$float"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


@dataclass
class RunReport:
    """Machine-readable record of one command: inputs, settings and results."""

    command: str
    version: str
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    schema: str = SCHEMA

    def to_json(self):
        return json.dumps(_encode(asdict(self)), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        data = _decode(json.loads(text))
        if data.get("schema") != SCHEMA:
            raise ParseError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**data)
