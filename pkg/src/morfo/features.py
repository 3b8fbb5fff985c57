"""Lexical features, hashed embedding tables and the input projection.

Every token is described by its lowercase form, first code point, last
three code points and orthographic shape (plus, optionally, a POS tag).
Each feature string is hashed into its own learned table; the selected
rows are concatenated with the frozen pretrained vector of the lowercase
form and projected to the working width through a ReLU.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from morfo.errors import ConfigError

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

FEATURES = ("norm", "prefix", "suffix", "shape")


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 20)
def hash_row(key: str, rows: int, seed: int) -> int:
    """FNV-1a 64 over the seed's 8 little-endian bytes followed by UTF-8 ``key``, mod ``rows``."""
    if rows < 1:
        raise ConfigError("rows must be >= 1")
    data = (seed & _MASK64).to_bytes(8, "little") + key.encode("utf-8")
    return fnv1a_64(data) % rows


def word_shape(form: str) -> str:
    out = []
    run_char, run_len = "", 0
    for ch in form:
        if ch.isalpha():
            c = "X" if ch.isupper() else "x"
        elif ch.isdigit():
            c = "d"
        else:
            c = ch
        if c == run_char:
            run_len += 1
        else:
            run_char, run_len = c, 1
        if run_len <= 4:
            out.append(c)
    return "".join(out)


@dataclass(frozen=True)
class FeatureSet:
    norm: str
    prefix: str
    suffix: str
    shape: str


@lru_cache(maxsize=1 << 18)
def extract_features(form: str, prefix_len: int = 1, suffix_len: int = 3) -> FeatureSet:
    return FeatureSet(
        norm=form.lower(),
        prefix=form[:prefix_len],
        suffix=form[-suffix_len:],
        shape=word_shape(form),
    )


class HashEmbedTable:
    def __init__(self, rows: int, dim: int, seed: int, weights=None):
        if rows < 1 or dim < 1:
            raise ConfigError("hash table rows and dim must be >= 1")
        self.rows = rows
        self.dim = dim
        self.seed = seed
        self.weights = np.zeros((rows, dim)) if weights is None else weights

    def lookup(self, keys) -> np.ndarray:
        return np.array([hash_row(k, self.rows, self.seed) for k in keys], dtype=np.int64)


@dataclass
class EmbedConfig:
    norm_rows: int = 5000
    norm_dim: int = 64
    affix_rows: int = 1000
    affix_dim: int = 16
    pos_rows: int = 100
    pos_dim: int = 16
    prefix_len: int = 1
    suffix_len: int = 3
    use_pos: bool = False


class EmbedLayer:
    """Hash tables for each active feature and the projection to ``width``.

    ``pretrained_dim`` is the width of the frozen vector slot; 0 disables it.
    """

    def __init__(self, cfg: EmbedConfig, width: int, pretrained_dim: int, seed: int = 0):
        self.cfg = cfg
        self.width = width
        self.pretrained_dim = pretrained_dim
        self.tables = {
            "norm": HashEmbedTable(cfg.norm_rows, cfg.norm_dim, seed + 1),
            "prefix": HashEmbedTable(cfg.affix_rows, cfg.affix_dim, seed + 2),
            "suffix": HashEmbedTable(cfg.affix_rows, cfg.affix_dim, seed + 3),
            "shape": HashEmbedTable(cfg.affix_rows, cfg.affix_dim, seed + 4),
        }
        if cfg.use_pos:
            self.tables["pos"] = HashEmbedTable(cfg.pos_rows, cfg.pos_dim, seed + 5)
        self.in_dim = sum(t.dim for t in self.tables.values()) + pretrained_dim
        self.proj_W = np.zeros((self.in_dim, width))
        self.proj_b = np.zeros(width)

    def parameters(self) -> dict[str, np.ndarray]:
        params = {f"embed.{name}": t.weights for name, t in self.tables.items()}
        params["embed.proj_W"] = self.proj_W
        params["embed.proj_b"] = self.proj_b
        return params

    def featurize(self, forms, pos=None) -> dict[str, np.ndarray]:
        """Row indices into every active table for a token sequence."""
        feats = [extract_features(f, self.cfg.prefix_len, self.cfg.suffix_len) for f in forms]
        idx = {name: self.tables[name].lookup([getattr(fs, name) for fs in feats]) for name in FEATURES}
        if self.cfg.use_pos:
            if pos is None or len(pos) != len(forms):
                raise ConfigError("pos feature is active but no per-token POS sequence was given")
            idx["pos"] = self.tables["pos"].lookup(pos)
        return idx

    def pretrained_rows(self, forms, pretrained) -> np.ndarray:
        out = np.zeros((len(forms), self.pretrained_dim))
        if self.pretrained_dim == 0:
            return out
        if pretrained is None or pretrained.dim != self.pretrained_dim:
            got = None if pretrained is None else pretrained.dim
            raise ConfigError(f"pretrained vectors have dim {got}, layer expects {self.pretrained_dim}")
        for i, form in enumerate(forms):
            vec = pretrained.get(form.lower())
            if vec is not None:
                out[i] = vec
        return out

    def inputs(self, idx: dict[str, np.ndarray], pre: np.ndarray) -> np.ndarray:
        parts = [self.tables[name].weights[idx[name]] for name in self.tables]
        parts.append(pre)
        return np.concatenate(parts, axis=-1)


def embed_sequence(sentence, layer: EmbedLayer, pretrained, pos_feature=None) -> np.ndarray:
    """Embed one sentence (Sentence or list of forms) to a ``len x width`` matrix."""
    forms = sentence.forms if hasattr(sentence, "forms") else list(sentence)
    idx = layer.featurize(forms, pos_feature)
    x = layer.inputs(idx, layer.pretrained_rows(forms, pretrained))
    return np.maximum(x @ layer.proj_W + layer.proj_b, 0.0)
