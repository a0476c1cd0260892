"""Matrix Market reading and writing.

Parsing is delegated to :func:`scipy.io.mmread`; this module adds header and
size validation with line numbers, and a fixed output format (array layout,
17 significant digits) so that files written here read back bit-exactly.
"""

from __future__ import annotations

import re

import numpy as np
import scipy.io
import scipy.sparse

from .errors import DimensionMismatch, ParseError

__all__ = ["read_matrix_market", "write_matrix_market", "read_vector"]

_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "complex", "integer", "double")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


def _check_header(line):
    tokens = line.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", line=1)
    fmt, fld, sym = tokens[2:]
    if fmt not in _FORMATS:
        raise ParseError(f"unsupported format {fmt!r}", line=1)
    if fld not in _FIELDS:
        raise ParseError(f"unsupported field {fld!r}", line=1)
    if sym not in _SYMMETRIES:
        raise ParseError(f"unsupported symmetry {sym!r}", line=1)
    return fmt, fld, sym


def _scan(path):
    """Validate header and size line; count data lines."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    fmt, fld, sym = _check_header(lines[0])
    size_at = None
    entries = 0
    for number, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        if size_at is None:
            size_at = number
            try:
                size = [int(t) for t in text.split()]
            except ValueError:
                raise ParseError(f"malformed size line {text!r}", line=number) from None
            expected = 3 if fmt == "coordinate" else 2
            if len(size) != expected or min(size) < 0:
                raise ParseError(f"size line needs {expected} nonnegative integers", line=number)
            continue
        width = (2 if fmt == "array" else 4) if fld == "complex" else (1 if fmt == "array" else 3)
        if len(text.split()) != width:
            raise ParseError(f"expected {width} fields, got {len(text.split())}", line=number)
        entries += 1
    if size_at is None:
        raise ParseError("missing size line", line=len(lines) + 1)
    rows, cols = size[0], size[1]
    if fmt == "coordinate":
        declared = size[2]
    elif sym == "general":
        declared = rows * cols
    else:
        if rows != cols:
            raise DimensionMismatch(f"{sym} array storage needs a square matrix, got {rows}x{cols}")
        declared = rows * (rows + 1) // 2 - (rows if sym == "skew-symmetric" else 0)
    if entries != declared:
        raise DimensionMismatch(f"{rows}x{cols} {fmt} matrix declares {declared} entries, found {entries}")
    return fmt


def read_matrix_market(path, dense=None):
    """Read a Matrix Market file.

    Symmetric, skew-symmetric and Hermitian storage is expanded. Array files
    come back as ``ndarray``; coordinate files as CSR matrices unless
    ``dense=True``.

    Raises
    ------
    ParseError
        Malformed header or data line (carries ``.line``).
    DimensionMismatch
        Entry count inconsistent with the declared size.
    FileNotFoundError
        ``path`` does not exist.
    """
    fmt = _scan(path)
    try:
        M = scipy.io.mmread(path)
    except ValueError as exc:
        found = re.search(r"line (\d+)", str(exc), flags=re.IGNORECASE)
        message = re.sub(r"^line \d+:\s*", "", str(exc), flags=re.IGNORECASE)
        raise ParseError(message, line=int(found.group(1)) if found else None) from exc
    if scipy.sparse.issparse(M):
        M = M.tocsr()
        if dense or dense is None and fmt == "array":
            M = M.toarray()
    elif dense is False:
        M = scipy.sparse.csr_matrix(M)
    if isinstance(M, np.ndarray) and M.dtype.kind in "iu":
        M = M.astype(float)
    return M


def read_vector(path):
    """Read an ``n x 1`` (or ``1 x n``) Matrix Market file as a 1-D array."""
    M = read_matrix_market(path, dense=True)
    if min(M.shape) != 1:
        raise DimensionMismatch(f"expected a vector, got shape {M.shape}")
    return np.asarray(M).ravel()


def write_matrix_market(path, M, comment=""):
    """Write ``M`` in array format with 17 significant digits.

    1-D input is written as a column. Sparse input is densified.
    """
    if scipy.sparse.issparse(M):
        M = M.toarray()
    M = np.asarray(M)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if np.iscomplexobj(M) and not np.any(M.imag):
        M = M.real
    scipy.io.mmwrite(path, M, comment=comment, field="complex" if np.iscomplexobj(M) else "real",
                     precision=17, symmetry="general")
