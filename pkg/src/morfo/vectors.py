"""Pretrained word vectors and subword (character n-gram) vector synthesis.

A :class:`SubwordTable` is induced from an existing word-vector table: every
word spreads its vector over the hash buckets of its character n-grams and
each bucket keeps the mean of what it received. Out-of-vocabulary words then
get the mean of their covered buckets instead of a zero vector.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from morfo.errors import DataError
from morfo.features import hash_row

log = logging.getLogger(__name__)

SUBWORD_MAGIC = b"MSUB"
SUBWORD_VERSION = 1


@dataclass
class VectorTable:
    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise DataError("vector dim must be positive")
        for word, vec in self.entries.items():
            if not word:
                raise DataError("empty token in vector table")
            if np.shape(vec) != (self.dim,):
                raise DataError(f"vector for {word!r} has shape {np.shape(vec)}, expected ({self.dim},)")

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def get(self, word):
        return self.entries.get(word)

    def words(self) -> list[str]:
        return list(self.entries)

    def matrix(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, self.dim))
        return np.stack(list(self.entries.values()))


def load_vec_text(path) -> VectorTable:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split("\n")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8") from exc
    header = lines[0].split()
    if len(header) != 2:
        raise DataError("line 1: expected '<count> <dim>' header")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise DataError("line 1: non-integer header") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise DataError(f"header announces {count} vectors, file has {len(body)}")
    entries = {}
    for lineno, line in enumerate(lines[1:count + 1], start=2):
        parts = line.rstrip().split(" ")
        if len(parts) != dim + 1:
            raise DataError(f"line {lineno}: expected {dim} components")
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric component") from None
        if parts[0] in entries:
            log.warning("line %d: duplicate token %r overwrites earlier vector", lineno, parts[0])
        entries[parts[0]] = vec
    return VectorTable(dim, entries)


def save_vec_text(table: VectorTable, path) -> None:
    lines = [f"{len(table)} {table.dim}"]
    for word, vec in table.entries.items():
        lines.append(word + " " + " ".join(repr(float(x)) for x in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def char_ngrams(word: str, min_n: int = 3, max_n: int = 6) -> list[str]:
    wrapped = f"<{word}>"
    n = len(wrapped)
    return [
        wrapped[start:start + size]
        for size in range(min_n, max_n + 1)
        for start in range(n - size + 1)
    ]


@dataclass
class SubwordTable:
    dim: int
    buckets: np.ndarray
    counts: np.ndarray
    min_n: int = 3
    max_n: int = 6
    seed: int = 0

    @property
    def bucket_count(self) -> int:
        return len(self.counts)

    def bucket_ids(self, word: str) -> list[int]:
        return [hash_row(g, self.bucket_count, self.seed) for g in char_ngrams(word, self.min_n, self.max_n)]


def induce_subword_table(table: VectorTable, bucket_count: int = 100_000, seed: int = 0,
                         min_n: int = 3, max_n: int = 6) -> SubwordTable:
    if bucket_count < 1:
        raise DataError("bucket_count must be >= 1")
    buckets = np.zeros((bucket_count, table.dim))
    counts = np.zeros(bucket_count, dtype=np.int64)
    sub = SubwordTable(table.dim, buckets, counts, min_n, max_n, seed)
    rows, ids = [], []
    for row, word in enumerate(table.entries):
        b = sub.bucket_ids(word)
        ids.extend(b)
        rows.extend([row] * len(b))
    if ids:
        ids = np.asarray(ids)
        # np.add.at accumulates sequentially in index order, keeping sums reproducible
        np.add.at(buckets, ids, table.matrix()[np.asarray(rows)])
        np.add.at(counts, ids, 1)
    hit = counts > 0
    buckets[hit] /= counts[hit, None]
    return sub


def synthesize_oov_vector(word: str, sub: SubwordTable):
    """Mean of the word's covered n-gram buckets; returns ``(vector, covered)``."""
    ids = [b for b in sub.bucket_ids(word) if sub.counts[b] > 0]
    if not ids:
        return np.zeros(sub.dim), 0
    return sub.buckets[ids].mean(axis=0), len(ids)


def backfill_table(table: VectorTable, oov_words, mode: str = "oov-only",
                   bucket_count: int = 100_000, seed: int = 0, sub: SubwordTable | None = None):
    """Return a new table with synthesized vectors for ``oov_words``.

    ``oov-only`` keeps every existing vector untouched and appends covered
    OOV words. ``all`` re-synthesizes the whole vocabulary plus the OOV words
    from the induced subword table. Words with no covered n-gram are left out.
    """
    if mode not in ("oov-only", "all"):
        raise DataError(f"unknown backfill mode {mode!r}")
    if sub is None:
        sub = induce_subword_table(table, bucket_count, seed)
    if mode == "oov-only":
        entries = dict(table.entries)
        words = [w for w in dict.fromkeys(oov_words) if w not in entries]
    else:
        entries = {}
        words = list(dict.fromkeys([*table.entries, *oov_words]))
    for word in words:
        vec, covered = synthesize_oov_vector(word, sub)
        if covered:
            entries[word] = vec
    return VectorTable(table.dim, entries)


def save_subword_table(sub: SubwordTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(SUBWORD_MAGIC)
        fh.write(struct.pack("<IIQIIQ", SUBWORD_VERSION, sub.dim, sub.bucket_count,
                             sub.min_n, sub.max_n, sub.seed))
        fh.write(sub.counts.astype("<u8").tobytes())
        fh.write(sub.buckets.astype("<f8").tobytes())


def load_subword_table(path) -> SubwordTable:
    data = Path(path).read_bytes()
    if data[:4] != SUBWORD_MAGIC:
        raise DataError("bad magic")
    head = struct.calcsize("<IIQIIQ")
    if len(data) < 4 + head:
        raise DataError("truncated subword table")
    version, dim, n, min_n, max_n, seed = struct.unpack_from("<IIQIIQ", data, 4)
    if version != SUBWORD_VERSION:
        raise DataError("unsupported version")
    off = 4 + head
    if len(data) != off + 8 * n + 8 * n * dim:
        raise DataError("truncated subword table")
    counts = np.frombuffer(data, "<u8", n, off).astype(np.int64)
    buckets = np.frombuffer(data, "<f8", n * dim, off + 8 * n).reshape(n, dim).copy()
    return SubwordTable(dim, buckets, counts, min_n, max_n, seed)
