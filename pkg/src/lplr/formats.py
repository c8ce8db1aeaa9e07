"""On-disk formats.

``MATF``  dense float64 matrix: magic, u32 version, u64 rows, u64 cols, then
          the entries row-major, little-endian.
``LPLR``  packed factorization: magic, u32 version, u8 algorithm id, u64 n, m,
          d, u8 B, B', f64 R_Q, R_Q', u8 affine flag, optional f64 alpha,
          beta, then the L codes and the R codes. Each code block is row-major,
          bit-packed LSB-first and zero-padded to a whole byte.
CSV       one row per line, shortest round-trip decimals.
PGM       binary P5 greyscale with maxval 255.

A naive-quantization result is stored with ``m = d``, the codes in the L
block, ``B' = 0`` and an empty R block.
"""

import os
import struct

import numpy as np

from .compressor import Factorization
from .linalg import as_matrix
from .quantize import QuantizedMatrix, QuantizerSpec


class FormatError(ValueError):
    """Malformed or unsupported file contents."""


MATF_MAGIC = b"MATF"
FACTOR_MAGIC = b"LPLR"
VERSION = 1
_MATF_HEADER = struct.Struct("<4sIQQ")
_FACTOR_HEADER = struct.Struct("<4sIBQQQBBddB")
FACTOR_HEADER_SIZE = _FACTOR_HEADER.size
ALGORITHM_IDS = {"lplr": 0, "lplr_svd": 1, "dsvd": 2, "naive": 3}
ALGORITHM_NAMES = {v: k for k, v in ALGORITHM_IDS.items()}


# matrices

def matf_bytes(A):
    A = as_matrix(A)
    rows, cols = A.shape
    return _MATF_HEADER.pack(MATF_MAGIC, VERSION, rows, cols) + A.astype("<f8").tobytes()


def parse_matf(data):
    if len(data) < _MATF_HEADER.size:
        raise FormatError(f"malformed header: {len(data)} bytes, need {_MATF_HEADER.size}")
    magic, version, rows, cols = _MATF_HEADER.unpack_from(data)
    if magic != MATF_MAGIC:
        raise FormatError(f"malformed header: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"version mismatch: file has {version}, reader supports {VERSION}")
    if rows < 1 or cols < 1:
        raise FormatError(f"malformed header: shape {rows}x{cols}")
    need = _MATF_HEADER.size + 8 * rows * cols
    if len(data) < need:
        raise FormatError(f"truncated payload: {len(data)} bytes, expected {need}")
    if len(data) > need:
        raise FormatError(f"trailing data: {len(data) - need} bytes after payload")
    A = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=_MATF_HEADER.size)
    return A.astype(np.float64).reshape(rows, cols)


def csv_text(A):
    A = as_matrix(A)
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in A)


def parse_csv(text):
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: not a number ({exc})") from None
        if len(rows[-1]) != len(rows[0]):
            raise FormatError(
                f"ragged rows: line {lineno} has {len(rows[-1])} fields, expected {len(rows[0])}"
            )
    if not rows:
        raise FormatError("empty CSV file")
    return np.array(rows, dtype=np.float64)


def pgm_bytes(A, clip=False):
    """P5 image. Entries must be integers in [0, 255] unless ``clip`` rounds
    and clamps them."""
    A = as_matrix(A)
    if clip:
        A = np.clip(np.rint(A), 0, 255)
    elif np.any((A < 0) | (A > 255) | (A != np.rint(A))):
        raise FormatError("PGM needs integer values in [0, 255]; pass clip=True to round")
    rows, cols = A.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + A.astype(np.uint8).tobytes()


def _pgm_tokens(data, count):
    """First ``count`` whitespace-separated header tokens and the payload offset."""
    tokens, i, n = [], 0, len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise FormatError("malformed header: PGM header ends early")
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    if i >= n or not data[i:i + 1].isspace():
        raise FormatError("malformed header: no whitespace after PGM maxval")
    return tokens, i + 1


def parse_pgm(data):
    tokens, offset = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"malformed header: expected P5, got {tokens[0]!r}")
    try:
        cols, rows, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("malformed header: non-integer PGM dimensions") from None
    if maxval != 255:
        raise FormatError(f"unsupported PGM maxval {maxval}; only 255 is supported")
    if rows < 1 or cols < 1:
        raise FormatError(f"malformed header: shape {rows}x{cols}")
    need = rows * cols
    if len(data) - offset < need:
        raise FormatError(f"truncated payload: {len(data) - offset} pixels, expected {need}")
    pix = np.frombuffer(data, dtype=np.uint8, count=need, offset=offset)
    return pix.astype(np.float64).reshape(rows, cols)


FORMATS = ("matf", "csv", "pgm")


def infer_format(path):
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext in FORMATS:
        return ext
    if ext in ("bin", "mat"):
        return "matf"
    raise FormatError(f"cannot infer matrix format from {path!r}; use one of {FORMATS}")


def save_matrix(path, A, format=None, clip=False):
    fmt = format or infer_format(path)
    if fmt == "matf":
        payload = matf_bytes(A)
    elif fmt == "csv":
        payload = csv_text(A).encode("ascii")
    elif fmt == "pgm":
        payload = pgm_bytes(A, clip=clip)
    else:
        raise FormatError(f"unknown matrix format {fmt!r}")
    with open(path, "wb") as fh:
        fh.write(payload)


def load_matrix(path, format=None):
    fmt = format or infer_format(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt == "matf":
        return parse_matf(data)
    if fmt == "csv":
        try:
            return parse_csv(data.decode("ascii"))
        except UnicodeDecodeError:
            raise FormatError("CSV file is not ASCII text") from None
    if fmt == "pgm":
        return parse_pgm(data)
    raise FormatError(f"unknown matrix format {fmt!r}")


# factorizations

def pack_codes(codes, bits):
    """Row-major codes, each ``bits`` wide, LSB-first, zero-padded to a byte."""
    codes = np.ascontiguousarray(codes, dtype=np.uint64).ravel()
    if bits == 0 or codes.size == 0:
        return b""
    shifts = np.arange(bits, dtype=np.uint64)
    bitplane = ((codes[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bitplane.ravel(), bitorder="little").tobytes()


def unpack_codes(data, count, bits):
    """Inverse of :func:`pack_codes`; nonzero padding bits are rejected."""
    if bits == 0 or count == 0:
        return np.zeros(count, dtype=np.uint64)
    nbits = count * bits
    raw = np.frombuffer(data, dtype=np.uint8)
    flat = np.unpackbits(raw, bitorder="little")
    if np.any(flat[nbits:]):
        raise FormatError("code overflow: nonzero bits past the last code")
    weights = np.uint64(1) << np.arange(bits, dtype=np.uint64)
    return flat[:nbits].reshape(count, bits).astype(np.uint64) @ weights


def _block_size(count, bits):
    return (count * bits + 7) // 8


def factor_file_size(n, m, d, B, Bprime, affine=False):
    return (FACTOR_HEADER_SIZE + _block_size(n * m, B) + _block_size(m * d, Bprime)
            + (16 if affine else 0))


def factorization_bytes(F):
    n, m = F.L.shape
    if F.R is None:
        d, Bp, r2 = m, 0, 0.0
    else:
        d, Bp, r2 = F.R.shape[1], F.R.spec.bits, F.R.spec.dynamic_range
    header = _FACTOR_HEADER.pack(FACTOR_MAGIC, VERSION, ALGORITHM_IDS[F.algorithm], n, m, d,
                                 F.L.spec.bits, Bp, F.L.spec.dynamic_range, r2,
                                 int(F.has_affine))
    parts = [header]
    if F.has_affine:
        parts.append(struct.pack("<dd", F.alpha, F.beta))
    parts.append(pack_codes(F.L.codes, F.L.spec.bits))
    if F.R is not None:
        parts.append(pack_codes(F.R.codes, Bp))
    return b"".join(parts)


def parse_factorization(data):
    if len(data) < FACTOR_HEADER_SIZE:
        raise FormatError(f"malformed header: {len(data)} bytes, need {FACTOR_HEADER_SIZE}")
    (magic, version, algo, n, m, d, B, Bp, rq, rq2,
     affine) = _FACTOR_HEADER.unpack_from(data)
    if magic != FACTOR_MAGIC:
        raise FormatError(f"malformed header: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"version mismatch: file has {version}, reader supports {VERSION}")
    if algo not in ALGORITHM_NAMES:
        raise FormatError(f"malformed header: unknown algorithm id {algo}")
    name = ALGORITHM_NAMES[algo]
    naive = name == "naive"
    if affine not in (0, 1):
        raise FormatError(f"malformed header: affine flag {affine}")
    if min(n, m, d) < 1 or not 1 <= B <= 32 or (naive and (Bp != 0 or m != d)) \
            or (not naive and not 1 <= Bp <= 32):
        raise FormatError(f"malformed header: n={n} m={m} d={d} B={B} B'={Bp}")
    expected = factor_file_size(n, m, 0 if naive else d, B, Bp, bool(affine))
    if len(data) < expected:
        raise FormatError(f"truncated payload: {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise FormatError(f"trailing data: {len(data) - expected} bytes after payload")
    pos = FACTOR_HEADER_SIZE
    alpha = beta = None
    if affine:
        alpha, beta = struct.unpack_from("<dd", data, pos)
        pos += 16
    try:
        lsize = _block_size(n * m, B)
        L = QuantizedMatrix(unpack_codes(data[pos:pos + lsize], n * m, B).reshape(n, m),
                            QuantizerSpec(rq, B))
        pos += lsize
        R = None
        if not naive:
            R = QuantizedMatrix(unpack_codes(data[pos:], m * d, Bp).reshape(m, d),
                                QuantizerSpec(rq2, Bp))
        return Factorization(L, R, name, alpha=alpha, beta=beta)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"invalid factorization contents: {exc}") from None


def save_factorization(path, F):
    with open(path, "wb") as fh:
        fh.write(factorization_bytes(F))


def load_factorization(path):
    with open(path, "rb") as fh:
        return parse_factorization(fh.read())
