"""Dataset files and CSV ingestion.

Binary dataset layout (version 1, all fields little-endian)::

    offset  size  field
    0       8     magic  b"RLSQDAT\\0"
    8       4     u32    format version (1)
    12      4     u32    flags; bit 0 set = ground truth blocks present
    16      24    3*u64  p, n, m
    40      16    2*f64  gamma, sigma
    56      8     u64    seed
    64      8     u8     layout kind (0 none, 1 uniform, 2 heavy) + 7 pad bytes
    72      24    u64 k, f64 heavy ratio, f64 light ratio
    96            m batch blocks:
                    u64 batch id
                    p*n f64  X, column-major (sample by sample)
                    n f64    y
                    if truth: n f64 u, ceil(n/8) bytes Z* bitmap (LSB first)
                  if truth: p f64 beta*
    end-4   4     u32    CRC-32 of every preceding byte
"""
from __future__ import annotations

import csv
import logging
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .batch_model import GroundTruth, MiniBatch
from .datagen import Layout, SynthSpec, rng_for
from .errors import ContractError, DataFormatError, DatasetIOError, UnsupportedVersionError

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "Dataset",
    "CsvSchema",
    "CsvData",
    "save_dataset",
    "load_dataset",
    "load_csv",
    "split_batches",
]

log = logging.getLogger(__name__)

MAGIC = b"RLSQDAT\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sII3Q2dQB7xQ2d")
_LAYOUT_CODES = {None: 0, "uniform": 1, "heavy": 2}
_F8 = np.dtype("<f8")


@dataclass(frozen=True, eq=False)
class Dataset:
    batches: list
    truth: GroundTruth | None = None
    spec: SynthSpec | None = None


def save_dataset(path, batches: Sequence[MiniBatch], truth: GroundTruth | None = None,
                 spec: SynthSpec | None = None) -> None:
    """Write ``batches`` (and optional ground truth) to ``path``.

    Every batch must share ``p`` and ``n``.
    """
    if not batches:
        raise ContractError("nothing to save: no batches")
    p, n = batches[0].p, batches[0].n
    if any(b.p != p or b.n != n for b in batches):
        raise ContractError("all batches in a dataset file must share p and n")
    if truth is not None and len(truth.corruption_vectors) != len(batches):
        raise ContractError("ground truth must describe every batch")

    lay = spec.layout if spec is not None else None
    head = _HEADER.pack(
        MAGIC, FORMAT_VERSION, 1 if truth is not None else 0, p, n, len(batches),
        spec.gamma if spec else 0.0, spec.sigma if spec else 0.0, int(spec.seed) if spec else 0,
        _LAYOUT_CODES[lay.kind if lay else None],
        lay.k if lay else 0, lay.heavy_ratio if lay else 0.0, lay.light_ratio if lay else 0.0,
    )
    parts = [head]
    for i, b in enumerate(batches):
        parts.append(struct.pack("<Q", b.id))
        parts.append(np.asarray(b.x, dtype=_F8).tobytes(order="F"))
        parts.append(np.asarray(b.y, dtype=_F8).tobytes())
        if truth is not None:
            u = truth.corruption_vectors[i]
            mask = np.zeros(n, dtype=bool)
            mask[truth.uncorrupted_sets[i]] = True
            parts.append(np.asarray(u, dtype=_F8).tobytes())
            parts.append(np.packbits(mask, bitorder="little").tobytes())
    if truth is not None:
        parts.append(np.asarray(truth.beta_star, dtype=_F8).tobytes())
    payload = b"".join(parts)
    blob = payload + struct.pack("<I", zlib.crc32(payload))
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise DatasetIOError(exc.errno, f"cannot write dataset: {exc.strerror}", str(path)) from exc


class _Reader:
    def __init__(self, buf, path):
        self.buf, self.pos, self.path = buf, 0, path

    def take(self, size):
        if self.pos + size > len(self.buf):
            raise DataFormatError(f"{self.path}: truncated dataset file at byte {self.pos}")
        out = self.buf[self.pos:self.pos + size]
        self.pos += size
        return out

    def floats(self, count):
        return np.frombuffer(self.take(8 * count), dtype=_F8).astype(np.float64)


def load_dataset(path) -> Dataset:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DatasetIOError(exc.errno, f"cannot read dataset: {exc.strerror}", str(path)) from exc
    if len(blob) < _HEADER.size + 4:
        raise DataFormatError(f"{path}: file too short to be a dataset ({len(blob)} bytes)")
    if blob[:8] != MAGIC:
        raise DataFormatError(f"{path}: not a robust_lsq dataset (bad magic)")
    version = struct.unpack_from("<I", blob, 8)[0]
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: dataset format version {version} is not supported (expected {FORMAT_VERSION})")
    payload, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != crc:
        raise DataFormatError(f"{path}: checksum mismatch (file truncated or corrupted)")

    rd = _Reader(payload, path)
    (_, _, flags, p, n, m, gamma, sigma, seed, kind, k, heavy, light) = _HEADER.unpack(
        rd.take(_HEADER.size))
    has_truth = bool(flags & 1)
    batches, us, zs = [], [], []
    for _ in range(m):
        bid = struct.unpack("<Q", rd.take(8))[0]
        x = rd.floats(p * n).reshape((p, n), order="F")
        y = rd.floats(n)
        batches.append(MiniBatch(x, y, bid))
        if has_truth:
            us.append(rd.floats(n))
            bits = np.frombuffer(rd.take((n + 7) // 8), dtype=np.uint8)
            zs.append(np.flatnonzero(np.unpackbits(bits, count=n, bitorder="little")))
    truth = GroundTruth(rd.floats(p), zs, us) if has_truth else None
    if rd.pos != len(payload):
        raise DataFormatError(f"{path}: {len(payload) - rd.pos} unexpected trailing bytes")

    spec = None
    if kind:
        layout = Layout() if kind == 1 else Layout("heavy", int(k), heavy, light)
        spec = SynthSpec(p, n, m, gamma, sigma, layout, seed)
    return Dataset(batches, truth, spec)


@dataclass(frozen=True)
class CsvSchema:
    """Which columns to read. ``add_intercept`` appends a constant-one feature."""

    target: str
    features: tuple
    delimiter: str = ","
    add_intercept: bool = False

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise ContractError("schema needs at least one feature column")
        if self.target in self.features:
            raise ContractError(f"target column {self.target!r} is also listed as a feature")

    @classmethod
    def from_mapping(cls, d) -> "CsvSchema":
        feats = d["features"]
        if isinstance(feats, str):
            feats = [f.strip() for f in feats.split(",") if f.strip()]
        delim = d.get("delimiter", ",")
        delim = "\t" if delim in ("\\t", "tab") else delim
        intercept = str(d.get("add_intercept", "false")).lower() in ("1", "true", "yes")
        return cls(d["target"], tuple(feats), delim, intercept)


class CsvData(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    dropped: int


def load_csv(path, schema: CsvSchema) -> CsvData:
    """Read the schema's columns; rows with missing or non-numeric values are dropped.

    Returns ``x`` as a ``p x N`` matrix in schema column order.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(exc.errno, f"cannot read CSV: {exc.strerror}", str(path)) from exc
    with fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty CSV file") from None
        except csv.Error as exc:
            raise DataFormatError(f"{path}: line 1: {exc}") from None
        header = [h.strip() for h in header]
        wanted = (schema.target, *schema.features)
        missing = [c for c in wanted if c not in header]
        if missing:
            if len(header) == 1:
                raise DataFormatError(
                    f"{path}: line 1: header parsed as a single field; "
                    f"delimiter {schema.delimiter!r} does not match the file")
            raise DataFormatError(f"{path}: missing column(s) {missing}")
        cols = [header.index(c) for c in wanted]
        rows, dropped = [], 0
        try:
            for rec in reader:
                if not rec:
                    continue
                if len(rec) != len(header):
                    raise DataFormatError(
                        f"{path}: line {reader.line_num}: expected {len(header)} fields, "
                        f"got {len(rec)}")
                try:
                    vals = [float(rec[c]) for c in cols]
                except ValueError:
                    dropped += 1
                    continue
                if not all(np.isfinite(vals)):
                    dropped += 1
                    continue
                rows.append(vals)
        except csv.Error as exc:
            raise DataFormatError(f"{path}: line {reader.line_num}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no usable rows after dropping {dropped}")
    data = np.array(rows, dtype=np.float64)
    x = data[:, 1:].T
    if schema.add_intercept:
        x = np.vstack([x, np.ones(x.shape[1])])
    if dropped:
        log.info("%s: dropped %d row(s) with missing or non-numeric values", path, dropped)
    return CsvData(np.asfortranarray(x), data[:, 0].copy(), dropped)


def split_batches(x, y, batch_size: int, order: str = "sequential", seed: int | None = None,
                  first_id: int = 0) -> list:
    """Cut ``N`` samples into ``N // batch_size`` batches; the tail remainder is dropped."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    total = y.size
    if x.ndim != 2 or x.shape[1] != total:
        raise ContractError("x must be p x N with N = len(y)")
    if batch_size < 1 or batch_size > total:
        raise ContractError(f"batch size {batch_size} must be in [1, N={total}]")
    if order == "sequential":
        idx = np.arange(total)
    elif order == "shuffled":
        if seed is None:
            raise ContractError("shuffled splitting needs a seed")
        idx = rng_for(seed, 4).permutation(total)
    else:
        raise ContractError(f"unknown batch order {order!r}")
    count = total // batch_size
    if total - count * batch_size:
        log.info("split_batches: dropped %d remainder row(s)", total - count * batch_size)
    return [
        MiniBatch(x[:, idx[i * batch_size:(i + 1) * batch_size]],
                  y[idx[i * batch_size:(i + 1) * batch_size]], first_id + i)
        for i in range(count)
    ]
