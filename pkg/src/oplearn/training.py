"""Risk minimization with an L1 Riemann-sum loss, resolution-grouped
mini-batches, and Adam with per-epoch geometric learning-rate decay.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .grid import trapezoid_weights
from .model import forward_batch_with_backward
from .nets import AdamState, adam_step


@dataclass
class TrainConfig:
    lr0: float
    decay: float
    epochs: int
    batch_size: int = 10
    seed: int = 0
    loss: str = "l1"  # "l1", "l2", or "rel_l2"

    def __post_init__(self):
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch size and epochs must be >= 1")
        if self.loss not in ("l1", "l2", "rel_l2"):
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass
class TrainHistory:
    epoch_loss: list = field(default_factory=list)
    learning_rate: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)


def l1_riemann_loss(pred, truth):
    """Quadrature-weighted sum of absolute differences on a shared grid."""
    if pred.grid != truth.grid:
        raise ValueError("loss requires a shared grid")
    w = trapezoid_weights(pred.grid).weights
    return float(np.dot(w, np.abs(pred.values - truth.values)))


def _batch_loss_and_upstream(preds, truths, w, loss):
    """Mean loss over the batch and its gradient w.r.t. preds.

    preds, truths: (B, n); w: quadrature weights (n,).
    """
    B = preds.shape[0]
    diff = preds - truths
    if loss == "l1":
        value = float(np.mean(np.abs(diff) @ w))
        upstream = (w * np.sign(diff)) / B
    elif loss == "l2":
        norms = np.sqrt((diff**2) @ w)
        value = float(np.mean(norms))
        safe = np.where(norms > 0, norms, 1.0)
        upstream = (w * diff) / (safe[:, None] * B)
    else:  # rel_l2
        norms = np.sqrt((diff**2) @ w)
        ref = np.sqrt((truths**2) @ w)
        ref = np.where(ref > 0, ref, 1.0)
        value = float(np.mean(norms / ref))
        safe = np.where(norms > 0, norms, 1.0)
        upstream = (w * diff) / (safe[:, None] * ref[:, None] * B)
    return value, upstream


def make_batches(ds, batch_size, epoch_seed):
    """Shuffle samples, group each batch to a single resolution, shuffle the
    batch order; every sample appears exactly once.

    Returns a list of index arrays into ds.samples.
    """
    rng = np.random.default_rng(epoch_seed)
    order = rng.permutation(ds.N)
    by_res = {}
    for idx in order:
        by_res.setdefault(ds.samples[idx][0].grid.R, []).append(idx)
    batches = []
    for R in sorted(by_res):
        group = by_res[R]
        for i in range(0, len(group), batch_size):
            batches.append(np.array(group[i : i + batch_size]))
    rng.shuffle(batches)
    return batches


def train(model, ds, cfg):
    """Train in place; returns (model, TrainHistory).

    Per epoch e the learning rate is lr0 * decay**e; each batch takes one Adam
    step on the mean loss over the batch.
    """
    if model.encoder_features.d != ds.d:
        raise ValueError("model dimension does not match dataset")
    params = model.parameters()
    state = AdamState.for_params(params)
    history = TrainHistory()
    # per-resolution dense value matrices, built once
    stacked = {}
    for R in ds.resolutions_present():
        idxs = [i for i, (inp, _) in enumerate(ds.samples) if inp.grid.R == R]
        grid = ds.samples[idxs[0]][0].grid
        U = np.stack([ds.samples[i][0].values for i in idxs])
        V = np.stack([ds.samples[i][1].values for i in idxs])
        pos = {g: j for j, g in enumerate(idxs)}
        stacked[R] = (grid, U, V, pos, trapezoid_weights(grid).weights)

    t0 = time.perf_counter()
    for epoch in range(cfg.epochs):
        lr = cfg.lr0 * cfg.decay**epoch
        batches = make_batches(ds, cfg.batch_size, epoch_seed=[cfg.seed, epoch])
        losses = []
        for bi, batch in enumerate(batches):
            R = ds.samples[batch[0]][0].grid.R
            grid, U, V, pos, w = stacked[R]
            rows = [pos[i] for i in batch]
            values, truths = U[rows], V[rows]
            try:
                loss_value, grads = _loss_step(model, values, truths, grid, w, cfg.loss)
            except FloatingPointError as exc:
                raise FloatingPointError(
                    f"training diverged at epoch {epoch}, batch {bi}: {exc}"
                ) from exc
            losses.append(loss_value)
            adam_step(state, params, grads, lr)
        history.epoch_loss.append(float(np.mean(losses)))
        history.learning_rate.append(lr)
        history.wall_time.append(time.perf_counter() - t0)
    return model, history


def _loss_step(model, values, truths, grid, w, loss):
    """One batch: mean loss and parameter gradients."""
    preds, backward = forward_batch_with_backward(model, values, grid, grid)
    value, upstream = _batch_loss_and_upstream(preds, truths, w, loss)
    if not np.isfinite(value):
        raise FloatingPointError("non-finite loss")
    return value, backward(upstream)


def history_to_csv(history, path):
    # wall time is kept in memory only so the CSV is bit-reproducible
    rows = np.column_stack(
        [
            np.arange(len(history.epoch_loss)),
            history.epoch_loss,
            history.learning_rate,
        ]
    )
    np.savetxt(
        path,
        rows,
        delimiter=",",
        header="epoch,mean_loss,learning_rate",
        comments="",
    )
