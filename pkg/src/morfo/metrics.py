"""Per-class precision/recall/F1 from integer counts."""

from __future__ import annotations

from collections import Counter


def _ratio(num, den):
    return num / den if den else 0.0


def per_class_prf(gold, pred, classes=()) -> dict[str, tuple[float, float, float, int]]:
    """Map class -> (precision, recall, f1, support); 0/0 counts as 0.

    ``classes`` are always reported, even when absent from both sequences.
    """
    tp, n_gold, n_pred = Counter(), Counter(gold), Counter(pred)
    for g, p in zip(gold, pred):
        if g == p:
            tp[g] += 1
    out = {}
    for cls in sorted(set(n_gold) | set(n_pred) | set(classes)):
        p = _ratio(tp[cls], n_pred[cls])
        r = _ratio(tp[cls], n_gold[cls])
        f = _ratio(2 * p * r, p + r)
        out[cls] = (p, r, f, n_gold[cls])
    return out


def macro(per_class) -> tuple[float, float, float]:
    """Unweighted mean over classes with non-zero support."""
    rows = [v for v in per_class.values() if v[3] > 0]
    if not rows:
        return 0.0, 0.0, 0.0
    n = len(rows)
    return (sum(r[0] for r in rows) / n, sum(r[1] for r in rows) / n, sum(r[2] for r in rows) / n)


def weighted(per_class) -> tuple[float, float, float]:
    total = sum(v[3] for v in per_class.values())
    if not total:
        return 0.0, 0.0, 0.0
    return tuple(sum(v[k] * v[3] for v in per_class.values()) / total for k in range(3))


def prf_dict(per_class) -> dict:
    return {c: {"precision": p, "recall": r, "f1": f, "support": s} for c, (p, r, f, s) in per_class.items()}
