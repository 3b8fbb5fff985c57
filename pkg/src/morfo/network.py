"""Encode, attend and predict: the convolutional sequence labeller.

Shapes follow the convention ``B`` sentences, ``L`` padded length, ``W``
model width. Padded positions are kept at exactly zero after every layer,
so shifting along the padded axis implements per-sentence zero padding.
All arithmetic is float64 and every random draw comes from a
``numpy.random.Generator`` seeded from the model config.
"""

from __future__ import annotations

import copy
import io
import json
import math
import struct
from dataclasses import asdict, dataclass, fields

import numpy as np

from morfo.errors import ConfigError, DataError, NumericError
from morfo.features import EmbedConfig, EmbedLayer
from morfo.vectors import VectorTable

MODEL_MAGIC = b"MRFO"
MODEL_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class ModelConfig:
    width: int = 128
    depth: int = 4
    window: int = 1
    attn_window: int = 4
    n_tags: int = 1
    dropout_start: float = 0.6
    dropout_end: float = 0.4
    batch_start: int = 4
    batch_max: int = 32
    batch_factor: float = 1.001
    epochs: int = 30
    learning_rate: float = 0.001
    clip_norm: float = 10.0
    seed: int = 0
    norm_rows: int = 5000
    norm_dim: int = 64
    affix_rows: int = 1000
    affix_dim: int = 16
    pos_rows: int = 100
    pos_dim: int = 16
    prefix_len: int = 1
    suffix_len: int = 3
    use_pos: bool = False

    def __post_init__(self):
        for name in ("width", "depth", "window", "n_tags", "epochs", "batch_start"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.attn_window < 0:
            raise ConfigError("attn_window must be >= 0")
        if not 0 <= self.dropout_end <= self.dropout_start < 1:
            raise ConfigError("need 0 <= dropout_end <= dropout_start < 1")
        if self.batch_start > self.batch_max:
            raise ConfigError("batch_start must not exceed batch_max")
        if self.batch_factor < 1:
            raise ConfigError("batch_factor must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def embed_config(self) -> EmbedConfig:
        return EmbedConfig(
            norm_rows=self.norm_rows, norm_dim=self.norm_dim,
            affix_rows=self.affix_rows, affix_dim=self.affix_dim,
            pos_rows=self.pos_rows, pos_dim=self.pos_dim,
            prefix_len=self.prefix_len, suffix_len=self.suffix_len,
            use_pos=self.use_pos,
        )


# -- schedules ---------------------------------------------------------------

def batch_schedule(step: int, start: int = 4, stop: int = 32, factor: float = 1.001) -> int:
    """Compounding batch size: ``floor(min(stop, start * factor**step))``."""
    if step < 0:
        raise ValueError("step must be >= 0")
    return int(math.floor(min(stop, start * factor ** step)))


def dropout_schedule(epoch: int, total_epochs: int, start: float = 0.6, end: float = 0.4) -> float:
    """Linear decay from ``start`` at the first epoch to ``end`` at the last."""
    if total_epochs < 1 or not 0 <= epoch < total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {total_epochs})")
    if total_epochs == 1:
        return start
    t = epoch / (total_epochs - 1)
    return (1.0 - t) * start + t * end


# -- model -------------------------------------------------------------------

def _glorot(rng, fan_in, fan_out, shape):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class PipelineModel:
    """All learned weights plus the frozen pretrained vectors and Adam state."""

    def __init__(self, config: ModelConfig, tag_inventory, pretrained: VectorTable | None = None,
                 extra: dict | None = None, init: bool = True):
        tag_inventory = list(tag_inventory)
        if len(set(tag_inventory)) != len(tag_inventory) or not tag_inventory:
            raise DataError("tag inventory must be non-empty and unique")
        config.n_tags = len(tag_inventory)
        self.config = config
        self.tag_inventory = tag_inventory
        self.tag_index = {t: i for i, t in enumerate(tag_inventory)}
        self.pretrained = pretrained
        self.extra = dict(extra or {})
        pdim = pretrained.dim if pretrained is not None else 0
        W, K = config.width, config.width * (2 * config.window + 1)
        self.embed = EmbedLayer(config.embed_config(), W, pdim, seed=config.seed)
        self.conv_W = [np.zeros((K, W)) for _ in range(config.depth)]
        self.conv_b = [np.zeros(W) for _ in range(config.depth)]
        self.attn_query = np.zeros(W)
        self.out_W = np.zeros((W, config.n_tags))
        self.out_b = np.zeros(config.n_tags)
        self.opt_step = 0
        if init:
            self._initialize(np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[0]))
        self.opt_m = {k: np.zeros_like(v) for k, v in self.parameters().items()}
        self.opt_v = {k: np.zeros_like(v) for k, v in self.parameters().items()}

    def _initialize(self, rng):
        for table in self.embed.tables.values():
            table.weights[...] = _glorot(rng, table.rows, table.dim, table.weights.shape)
        self.embed.proj_W[...] = _glorot(rng, *self.embed.proj_W.shape, self.embed.proj_W.shape)
        for Wl in self.conv_W:
            Wl[...] = _glorot(rng, *Wl.shape, Wl.shape)
        self.attn_query[...] = _glorot(rng, self.config.width, 1, self.attn_query.shape)
        self.out_W[...] = _glorot(rng, *self.out_W.shape, self.out_W.shape)

    def parameters(self) -> dict[str, np.ndarray]:
        """Trainable arrays in declaration order (live references)."""
        params = self.embed.parameters()
        for i, (Wl, bl) in enumerate(zip(self.conv_W, self.conv_b)):
            params[f"conv{i}.W"] = Wl
            params[f"conv{i}.b"] = bl
        params["attn.query"] = self.attn_query
        params["out.W"] = self.out_W
        params["out.b"] = self.out_b
        return params

    def snapshot(self):
        return (
            {k: v.copy() for k, v in self.parameters().items()},
            {k: v.copy() for k, v in self.opt_m.items()},
            {k: v.copy() for k, v in self.opt_v.items()},
            self.opt_step,
        )

    def restore(self, snap):
        params, m, v, step = snap
        for k, arr in self.parameters().items():
            arr[...] = params[k]
        self.opt_m = {k: a.copy() for k, a in m.items()}
        self.opt_v = {k: a.copy() for k, a in v.items()}
        self.opt_step = step

    # -- batching ------------------------------------------------------------

    def prepare(self, forms, pos=None) -> dict:
        """Featurize one token sequence once; reused across epochs."""
        forms = list(forms)
        return {
            "n": len(forms),
            "idx": self.embed.featurize(forms, pos if self.config.use_pos else None),
            "pre": self.embed.pretrained_rows(forms, self.pretrained),
        }

    def collate(self, prepared) -> dict:
        B = len(prepared)
        L = max(p["n"] for p in prepared)
        mask = np.zeros((B, L))
        pre = np.zeros((B, L, self.embed.pretrained_dim))
        idx = {name: np.zeros((B, L), dtype=np.int64) for name in self.embed.tables}
        for b, p in enumerate(prepared):
            n = p["n"]
            mask[b, :n] = 1.0
            pre[b, :n] = p["pre"]
            for name in idx:
                idx[name][b, :n] = p["idx"][name]
        return {"mask": mask, "pre": pre, "idx": idx, "lengths": [p["n"] for p in prepared]}


# -- forward -------------------------------------------------------------------

def _shift_concat(H, window):
    B, L, W = H.shape
    Hp = np.zeros((B, L + 2 * window, W))
    Hp[:, window:window + L] = H
    return np.concatenate([Hp[:, k:k + L] for k in range(2 * window + 1)], axis=-1)


def _embed_forward(model, batch, cache):
    mask = batch["mask"][..., None]
    X = model.embed.inputs(batch["idx"], batch["pre"])
    Z0 = X @ model.embed.proj_W + model.embed.proj_b
    cache.update(X=X, Z0=Z0)
    return np.maximum(Z0, 0.0) * mask


def _encode_forward(model, H, mask, dropout, rng, cache):
    if not 0 <= dropout < 1:
        raise ConfigError("dropout must lie in [0, 1)")
    layers = []
    for Wl, bl in zip(model.conv_W, model.conv_b):
        U = _shift_concat(H, model.config.window)
        A = U @ Wl + bl
        R = np.maximum(A, 0.0)
        keep = None
        if dropout > 0:
            keep = (rng.random(R.shape) >= dropout) / (1.0 - dropout)
            R = R * keep
        layers.append((U, A, keep))
        H = (H + R) * mask
    cache["conv"] = layers
    return H


def _attention_weights(model, H, valid):
    B, L, W = H.shape
    s = (H @ model.attn_query) / math.sqrt(W)
    pos = np.arange(L)
    band = np.abs(pos[:, None] - pos[None, :]) <= model.config.attn_window
    # padded query rows fall back to the band alone so their softmax stays finite
    allowed = band[None] & (valid[:, None, :] | ~valid[:, :, None])
    Z = np.where(allowed, s[:, None, :], -np.inf)
    Z = Z - Z.max(axis=-1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=-1, keepdims=True)


def _attend_forward(model, H, mask, cache):
    A = _attention_weights(model, H, mask[..., 0] > 0)
    cache.update(H_att=H, A_att=A)
    return (H + A @ H) * mask


def _softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: PipelineModel, batch: dict, dropout: float = 0.0, rng=None, cache=None):
    """Return ``(B, L, n_tags)`` probabilities for a collated batch."""
    cache = {} if cache is None else cache
    mask = batch["mask"][..., None]
    H = _embed_forward(model, batch, cache)
    H = _encode_forward(model, H, mask, dropout, rng, cache)
    O = _attend_forward(model, H, mask, cache)
    cache["O"] = O
    return _softmax(O @ model.out_W + model.out_b)


def encode(h: np.ndarray, model: PipelineModel, dropout: float = 0.0, rng=None) -> np.ndarray:
    """Residual convolution stack over one ``len x width`` matrix."""
    mask = np.ones((1, h.shape[0], 1))
    return _encode_forward(model, h[None], mask, dropout, rng, {})[0]


def attend(h: np.ndarray, model: PipelineModel) -> np.ndarray:
    mask = np.ones((1, h.shape[0], 1))
    return _attend_forward(model, h[None], mask, {})[0]


def attention_weights(h: np.ndarray, model: PipelineModel) -> np.ndarray:
    return _attention_weights(model, h[None], np.ones((1, h.shape[0]), dtype=bool))[0]


def predict(h: np.ndarray, model: PipelineModel) -> np.ndarray:
    return _softmax(h @ model.out_W + model.out_b)


# -- loss and gradients --------------------------------------------------------------

def _gold_matrix(model, golds, B, L):
    gold = np.zeros((B, L), dtype=np.int64)
    for b, g in enumerate(golds):
        g = np.asarray(g, dtype=np.int64)
        if g.size and (g.min() < 0 or g.max() >= model.config.n_tags):
            raise DataError(f"gold tag index out of range [0, {model.config.n_tags})")
        gold[b, :len(g)] = g
    return gold


def prepared_loss_and_gradients(model, prepared, golds, dropout=0.0, rng=None, need_grads=True):
    batch = model.collate(prepared)
    mask = batch["mask"]
    B, L = mask.shape
    for p, g in zip(prepared, golds):
        if len(g) != p["n"]:
            raise DataError("gold sequence length differs from sentence length")
    gold = _gold_matrix(model, golds, B, L)
    cache = {}
    P = forward(model, batch, dropout, rng, cache)
    n_tok = mask.sum()
    p_gold = np.take_along_axis(P, gold[..., None], axis=-1)[..., 0]
    loss = float(-(np.log(np.where(mask > 0, p_gold, 1.0))).sum() / n_tok)
    if not math.isfinite(loss):
        raise NumericError("non-finite loss")
    if not need_grads:
        return loss, None
    return loss, _backward(model, batch, cache, P, gold, n_tok)


def _backward(model, batch, cache, P, gold, n_tok):
    mask = batch["mask"]
    m3 = mask[..., None]
    B, L = mask.shape
    W = model.config.width
    w = model.config.window
    grads = {}

    dlogits = P.copy()
    np.put_along_axis(dlogits, gold[..., None], np.take_along_axis(P, gold[..., None], -1) - 1.0, -1)
    dlogits *= m3 / n_tok
    O = cache["O"]
    grads["out.W"] = O.reshape(-1, W).T @ dlogits.reshape(-1, model.config.n_tags)
    grads["out.b"] = dlogits.sum(axis=(0, 1))
    dO = (dlogits @ model.out_W.T) * m3

    # attention: O = H + A @ H, A = softmax over s_j = q . h_j / sqrt(W)
    H, A = cache["H_att"], cache["A_att"]
    dH = dO + np.einsum("bij,bid->bjd", A, dO)
    dA = np.einsum("bid,bjd->bij", dO, H)
    dZ = A * (dA - (A * dA).sum(axis=-1, keepdims=True))
    ds = dZ.sum(axis=1) / math.sqrt(W)
    grads["attn.query"] = np.einsum("bj,bjd->d", ds, H)
    dH += ds[..., None] * model.attn_query

    conv_grads = []
    for l in range(model.config.depth - 1, -1, -1):
        U, Apre, keep = cache["conv"][l]
        dH = dH * m3
        dR = dH if keep is None else dH * keep
        dApre = dR * (Apre > 0)
        K = U.shape[-1]
        gW = U.reshape(-1, K).T @ dApre.reshape(-1, W)
        gb = dApre.sum(axis=(0, 1))
        conv_grads.append((l, gW, gb))
        dU = dApre @ model.conv_W[l].T
        dHp = np.zeros((B, L + 2 * w, W))
        for k in range(2 * w + 1):
            dHp[:, k:k + L] += dU[..., k * W:(k + 1) * W]
        dH = dH + dHp[:, w:w + L]

    dZ0 = dH * m3 * (cache["Z0"] > 0)
    X = cache["X"]
    embed = model.embed
    grads["embed.proj_W"] = X.reshape(-1, embed.in_dim).T @ dZ0.reshape(-1, W)
    grads["embed.proj_b"] = dZ0.sum(axis=(0, 1))
    dX = dZ0 @ embed.proj_W.T
    valid = mask.reshape(-1) > 0
    offset = 0
    for name, table in embed.tables.items():
        g = np.zeros_like(table.weights)
        part = dX[..., offset:offset + table.dim].reshape(-1, table.dim)[valid]
        np.add.at(g, batch["idx"][name].reshape(-1)[valid], part)
        grads[f"embed.{name}"] = g
        offset += table.dim

    for l, gW, gb in sorted(conv_grads, key=lambda t: t[0]):
        grads[f"conv{l}.W"] = gW
        grads[f"conv{l}.b"] = gb
    return {k: grads[k] for k in model.parameters()}


def _as_item(item):
    sent, gold = item[0], item[1]
    pos = item[2] if len(item) > 2 else None
    forms = sent.forms if hasattr(sent, "forms") else list(sent)
    return forms, gold, pos


def loss_and_gradients(model: PipelineModel, batch, dropout: float = 0.0, rng=None):
    """Mean token cross-entropy over ``batch`` and its gradient for every parameter.

    ``batch`` holds ``(sentence, gold_indices)`` or ``(sentence, gold_indices, pos)``.
    """
    items = [_as_item(it) for it in batch]
    prepared = [model.prepare(forms, pos) for forms, _, pos in items]
    return prepared_loss_and_gradients(model, prepared, [g for _, g, _ in items], dropout, rng)


# -- optimizer -----------------------------------------------------------------

def optimizer_step(model: PipelineModel, gradients: dict, lr: float) -> None:
    """Adam with global gradient-norm clipping. Raises before touching weights on NaN/Inf."""
    params = model.parameters()
    if set(gradients) != set(params):
        raise ConfigError("gradients do not match model parameters")
    for k, g in gradients.items():
        if g.shape != params[k].shape:
            raise ConfigError(f"gradient shape mismatch for {k}")
    total = math.sqrt(sum(float(np.vdot(g, g)) for g in gradients.values()))
    scale = 1.0
    if math.isfinite(total) and total > model.config.clip_norm:
        scale = model.config.clip_norm / total
    if not math.isfinite(total * scale):
        raise NumericError("non-finite gradient")
    t = model.opt_step + 1
    updates = {}
    for k, p in params.items():
        g = gradients[k] * scale
        m = ADAM_BETA1 * model.opt_m[k] + (1 - ADAM_BETA1) * g
        v = ADAM_BETA2 * model.opt_v[k] + (1 - ADAM_BETA2) * g * g
        m_hat = m / (1 - ADAM_BETA1 ** t)
        v_hat = v / (1 - ADAM_BETA2 ** t)
        new = p - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        if not np.isfinite(new).all():
            raise NumericError(f"update would make {k} non-finite")
        updates[k] = (new, m, v)
    for k, (new, m, v) in updates.items():
        params[k][...] = new
        model.opt_m[k] = m
        model.opt_v[k] = v
    model.opt_step = t


# -- persistence -----------------------------------------------------------------

def _write_tensor(fh, arr):
    arr = np.ascontiguousarray(arr, dtype="<f8")
    fh.write(struct.pack("<Q", arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    fh.write(arr.tobytes())


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise DataError("truncated model file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def tensor(self):
        (ndim,) = self.unpack("<Q")
        shape = self.unpack(f"<{ndim}Q")
        n = int(np.prod(shape)) if ndim else 1
        return np.frombuffer(self.take(8 * n), dtype="<f8").reshape(shape).astype(np.float64)


def model_bytes(model: PipelineModel) -> bytes:
    params = model.parameters()
    for k, arr in params.items():
        if not np.isfinite(arr).all():
            raise NumericError(f"refusing to save non-finite parameter {k}")
    header = {
        "config": asdict(model.config),
        "tag_inventory": model.tag_inventory,
        "parameters": list(params),
        "opt_step": model.opt_step,
        "extra": model.extra,
        "pretrained": None if model.pretrained is None else {
            "dim": model.pretrained.dim, "words": model.pretrained.words()},
    }
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    fh = io.BytesIO()
    fh.write(MODEL_MAGIC)
    fh.write(struct.pack("<I", MODEL_VERSION))
    fh.write(struct.pack("<Q", len(blob)))
    fh.write(blob)
    for group in (params, model.opt_m, model.opt_v):
        for k in params:
            _write_tensor(fh, group[k])
    if model.pretrained is not None:
        _write_tensor(fh, model.pretrained.matrix())
    return fh.getvalue()


def save_model(model: PipelineModel, path) -> None:
    data = model_bytes(model)
    with open(path, "wb") as fh:
        fh.write(data)


def load_model(path) -> PipelineModel:
    with open(path, "rb") as fh:
        r = _Reader(fh.read())
    if r.take(4) != MODEL_MAGIC:
        raise DataError("bad magic")
    (version,) = r.unpack("<I")
    if version != MODEL_VERSION:
        raise DataError("unsupported version")
    (n,) = r.unpack("<Q")
    try:
        header = json.loads(r.take(n).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"corrupt model header ({exc})") from exc
    config = ModelConfig.from_dict(header["config"])
    names = header["parameters"]
    groups = [[r.tensor() for _ in names] for _ in range(3)]
    pretrained = None
    if header["pretrained"] is not None:
        info = header["pretrained"]
        mat = r.tensor()
        pretrained = VectorTable(info["dim"], {w: mat[i].copy() for i, w in enumerate(info["words"])})
    model = PipelineModel(config, header["tag_inventory"], pretrained, header.get("extra"), init=False)
    params = model.parameters()
    if list(params) != names:
        raise DataError("model parameter layout does not match its config")
    for k, arr in zip(names, groups[0]):
        if arr.shape != params[k].shape:
            raise DataError(f"parameter {k} has shape {arr.shape}, expected {params[k].shape}")
        params[k][...] = arr
    model.opt_m = dict(zip(names, groups[1]))
    model.opt_v = dict(zip(names, groups[2]))
    model.opt_step = header["opt_step"]
    if r.pos != len(r.data):
        raise DataError("trailing bytes after model payload")
    return model


# -- gradient check --------------------------------------------------------------

@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_parameter: str
    n_checked: int


def _random_instance(config: ModelConfig, seed: int):
    rng = np.random.default_rng(seed)
    alphabet = "αβγδεζηθικλμνξοπρστυφχψωΑΒΓΔ0123456789-"
    n_sent = 3
    sentences, golds = [], []
    for _ in range(n_sent):
        n = int(rng.integers(1, 7))
        forms = ["".join(rng.choice(list(alphabet), size=int(rng.integers(1, 8)))) for _ in range(n)]
        sentences.append(forms)
        golds.append(rng.integers(0, config.n_tags, size=n))
    pdim = 4
    vocab = {f.lower() for s in sentences for f in s}
    pretrained = VectorTable(pdim, {w: rng.normal(size=pdim) for w in sorted(vocab) if rng.random() < 0.6})
    pos = [[str(t) for t in rng.integers(0, 5, size=len(s))] for s in sentences]
    return sentences, golds, pos, pretrained, rng


def gradient_check(config: ModelConfig, seed: int = 0, eps: float = 1e-5, fault=None) -> GradCheckReport:
    """Compare analytic gradients with central finite differences at dropout 0.

    Every entry of every dense parameter is checked; for the hash tables only
    the rows the batch touches (all other rows have an exact zero gradient on
    both sides). ``fault=(name, flat_index)`` adds 1.0 to that analytic entry.
    """
    config = copy.deepcopy(config)
    if config.n_tags < 2:
        config.n_tags = 5
    sentences, golds, pos, pretrained, rng = _random_instance(config, seed)
    model = PipelineModel(config, [f"T{i}" for i in range(config.n_tags)], pretrained)
    # glorot weights plus small random biases keep the softmax unsaturated
    for name, arr in model.parameters().items():
        if arr.ndim == 1:
            arr[...] = rng.normal(scale=0.1, size=arr.shape)
    prepared = [model.prepare(s, p) for s, p in zip(sentences, pos)]
    _, grads = prepared_loss_and_gradients(model, prepared, golds)
    if fault is not None:
        name, flat = fault
        grads[name].reshape(-1)[flat] += 1.0

    touched = {
        name: sorted({int(i) for p in prepared for i in p["idx"][name]})
        for name in model.embed.tables
    }
    worst, worst_name, n_checked = 0.0, "", 0
    for name, arr in model.parameters().items():
        flat = arr.reshape(-1)
        g = grads[name].reshape(-1)
        if name.startswith("embed.") and name[6:] in touched:
            dim = arr.shape[1]
            entries = [r * dim + c for r in touched[name[6:]] for c in range(dim)]
        else:
            entries = range(flat.size)
        for i in entries:
            orig = flat[i]
            flat[i] = orig + eps
            lp, _ = prepared_loss_and_gradients(model, prepared, golds, need_grads=False)
            flat[i] = orig - eps
            lm, _ = prepared_loss_and_gradients(model, prepared, golds, need_grads=False)
            flat[i] = orig
            numeric = (lp - lm) / (2 * eps)
            denom = max(abs(g[i]), abs(numeric), 1e-8)
            err = abs(g[i] - numeric) / denom
            n_checked += 1
            if err > worst:
                worst, worst_name = err, f"{name}[{i}]"
    return GradCheckReport(worst, worst_name, n_checked)
