"""Epoch loop shared by the tagger and the entity recognizer."""

from __future__ import annotations

import logging

import numpy as np

from morfo.corpus import fisher_yates
from morfo.network import (
    PipelineModel,
    batch_schedule,
    dropout_schedule,
    forward,
    optimizer_step,
    prepared_loss_and_gradients,
)

log = logging.getLogger(__name__)


def run_rng(seed: int) -> np.random.Generator:
    # stream 0 initializes weights, stream 1 drives shuffling and dropout
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])


def predict_prepared(model: PipelineModel, prepared, batch_size: int = 64) -> list[np.ndarray]:
    out = []
    for start in range(0, len(prepared), batch_size):
        chunk = prepared[start:start + batch_size]
        probs = forward(model, model.collate(chunk))
        out.extend(probs[b, :p["n"]] for b, p in enumerate(chunk))
    return out


def accuracy(model, prepared, golds) -> float:
    if not prepared:
        return 0.0
    correct = total = 0
    for probs, gold in zip(predict_prepared(model, prepared), golds):
        correct += int((probs.argmax(axis=-1) == gold).sum())
        total += len(gold)
    return correct / total if total else 0.0


def fit(model: PipelineModel, train, dev) -> list[dict]:
    """Train in place; ``train``/``dev`` are lists of ``(forms, pos, gold_indices)``.

    Batch size compounds per optimizer step across the whole run, dropout
    decays per epoch, and the weights of the best dev epoch are restored.
    """
    cfg = model.config
    rng = run_rng(cfg.seed)
    train_prep = [model.prepare(f, p) for f, p, _ in train]
    train_gold = [np.asarray(g, dtype=np.int64) for _, _, g in train]
    dev_prep = [model.prepare(f, p) for f, p, _ in dev]
    dev_gold = [np.asarray(g, dtype=np.int64) for _, _, g in dev]

    history = []
    best, best_acc = None, -1.0
    step = 0
    for epoch in range(cfg.epochs):
        dropout = dropout_schedule(epoch, cfg.epochs, cfg.dropout_start, cfg.dropout_end)
        order = fisher_yates(len(train_prep), rng)
        losses = []
        i = 0
        while i < len(order):
            size = batch_schedule(step, cfg.batch_start, cfg.batch_max, cfg.batch_factor)
            idx = order[i:i + size]
            i += size
            loss, grads = prepared_loss_and_gradients(
                model, [train_prep[j] for j in idx], [train_gold[j] for j in idx], dropout, rng)
            optimizer_step(model, grads, cfg.learning_rate)
            losses.append(loss)
            step += 1
        dev_acc = accuracy(model, dev_prep, dev_gold)
        history.append({
            "epoch": epoch,
            "dropout": dropout,
            "batch_size": batch_schedule(max(step - 1, 0), cfg.batch_start, cfg.batch_max, cfg.batch_factor),
            "train_loss": float(np.mean(losses)),
            "dev_accuracy": dev_acc,
        })
        log.info("epoch %d loss %.4f dev accuracy %.4f", epoch, history[-1]["train_loss"], dev_acc)
        if dev_acc > best_acc:
            best_acc, best = dev_acc, model.snapshot()
    if best is not None:
        model.restore(best)
    return history
