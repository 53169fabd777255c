"""Difficulty-profile regression: a small MLP from condition embeddings.

Three affine layers with ReLU after the first two, dropout during training
only, trained with a cosine-similarity loss (1 - cos). Everything is plain
numpy: forward, exact analytic backward, and an adaptive-moment optimizer,
deterministic for a given seed. Raw outputs are not forced nonnegative;
callers clamp before planning (``clamp_for_planning``).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .profile import DnaProfile, TimeGrid
from .serialize import dumps

PARAMS_FORMAT_VERSION = 1

# (d_in, h1, h2, d_out). The full-size preset lands on a 0.96M parameter
# count; desk scale is what the tests and CLI default to.
DESK_SCALE = (16, 256, 256, 100)
FULL_SCALE = (512, 720, 720, 100)

OUTPUT_FLOOR = 1e-12


@dataclass(frozen=True)
class RegressorParams:
    """Weights and biases of the three affine layers."""

    w1: np.ndarray  # (h1, d_in)
    b1: np.ndarray  # (h1,)
    w2: np.ndarray  # (h2, h1)
    b2: np.ndarray  # (h2,)
    w3: np.ndarray  # (d_out, h2)
    b3: np.ndarray  # (d_out,)

    @property
    def layer_sizes(self) -> tuple[int, int, int, int]:
        return (self.w1.shape[1], self.w1.shape[0], self.w2.shape[0], self.w3.shape[0])

    def validate(self) -> None:
        d_in, h1, h2, d_out = self.layer_sizes
        expect = {
            "w1": (h1, d_in), "b1": (h1,),
            "w2": (h2, h1), "b2": (h2,),
            "w3": (d_out, h2), "b3": (d_out,),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 60
    dropout: float = 0.1
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    holdout_fraction: float = 0.1

    def validate(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be > 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch size and epochs must be >= 1")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise ValueError("holdout fraction must lie in [0, 1)")


@dataclass
class TrainResult:
    params: RegressorParams
    loss_history: list[float]
    holdout_cosine_mean: float
    holdout_cosine_median: float
    n_train: int
    n_holdout: int


def init_params(
    d_in: int, h1: int, h2: int, d_out: int, rng: np.random.Generator
) -> RegressorParams:
    """He-scaled Gaussian init for the ReLU stack."""
    def layer(n_out: int, n_in: int) -> np.ndarray:
        return rng.normal(0.0, math.sqrt(2.0 / n_in), size=(n_out, n_in))

    return RegressorParams(
        w1=layer(h1, d_in), b1=np.zeros(h1),
        w2=layer(h2, h1), b2=np.zeros(h2),
        w3=layer(d_out, h2), b3=np.zeros(d_out),
    )


def _as_batch(e: np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(e, dtype=np.float64)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ValueError("embedding input must be a vector or a batch of vectors")


def _forward_pass(
    params: RegressorParams,
    e: np.ndarray,
    masks: tuple[np.ndarray, np.ndarray] | None,
):
    z1 = e @ params.w1.T + params.b1
    a1 = np.maximum(z1, 0.0)
    if masks is not None:
        a1 = a1 * masks[0]
    z2 = a1 @ params.w2.T + params.b2
    a2 = np.maximum(z2, 0.0)
    if masks is not None:
        a2 = a2 * masks[1]
    out = a2 @ params.w3.T + params.b3
    return out, (z1, a1, z2, a2)


def forward(
    params: RegressorParams,
    e: np.ndarray,
    training: bool = False,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Predict a profile vector from an embedding (or batch of embeddings).

    With ``training=False`` the pass is deterministic and independent of the
    dropout rate. Training mode applies inverted dropout after each ReLU and
    needs an ``rng``.
    """
    params.validate()
    batch, squeeze = _as_batch(e)
    if batch.shape[1] != params.layer_sizes[0]:
        raise ValueError(
            f"embedding dimension {batch.shape[1]} does not match model input "
            f"{params.layer_sizes[0]}"
        )
    masks = None
    if training and dropout > 0.0:
        if rng is None:
            raise ValueError("training-mode forward with dropout needs an rng")
        masks = _dropout_masks(params, batch.shape[0], dropout, rng)
    out, _ = _forward_pass(params, batch, masks)
    return out[0] if squeeze else out


def _dropout_masks(
    params: RegressorParams, n_rows: int, rate: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    keep = 1.0 - rate
    _, h1, h2, _ = params.layer_sizes
    m1 = (rng.random((n_rows, h1)) < keep) / keep
    m2 = (rng.random((n_rows, h2)) < keep) / keep
    return m1, m2


def cosine_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """1 - cos(pred, target); 0 iff the vectors are positive scalar multiples."""
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(target, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ValueError("vectors must have equal length")
    np_, nt = float(np.linalg.norm(p)), float(np.linalg.norm(t))
    if np_ == 0.0 or nt == 0.0:
        raise ValueError("cosine loss is undefined for zero-norm vectors")
    return 1.0 - float(p @ t) / (np_ * nt)


def _cosine_grad_rows(pred: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row cosine losses and d(loss)/d(pred) for batched predictions."""
    pn = np.linalg.norm(pred, axis=1, keepdims=True)
    tn = np.linalg.norm(target, axis=1, keepdims=True)
    if np.any(pn == 0.0) or np.any(tn == 0.0):
        raise ValueError("cosine loss is undefined for zero-norm vectors")
    dots = np.sum(pred * target, axis=1, keepdims=True)
    cos = dots / (pn * tn)
    grad = cos * pred / (pn * pn) - target / (pn * tn)
    return (1.0 - cos.ravel()), grad


def backward(
    params: RegressorParams,
    e: np.ndarray,
    target: np.ndarray,
    masks: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[float, RegressorParams]:
    """Mean cosine loss over the batch and its exact parameter gradient.

    Returns gradients in a RegressorParams-shaped bundle. With ``masks``
    given (training), the same masks used in the forward pass enter the
    chain rule.
    """
    params.validate()
    batch, _ = _as_batch(e)
    tgt, _ = _as_batch(target)
    if batch.shape[0] != tgt.shape[0]:
        raise ValueError("embedding and target batches must have equal rows")
    out, (z1, a1, z2, a2) = _forward_pass(params, batch, masks)
    losses, d_out = _cosine_grad_rows(out, tgt)
    n = batch.shape[0]
    d_out = d_out / n

    g_w3 = d_out.T @ a2
    g_b3 = d_out.sum(axis=0)
    d_a2 = d_out @ params.w3
    if masks is not None:
        d_a2 = d_a2 * masks[1]
    d_z2 = d_a2 * (z2 > 0.0)
    g_w2 = d_z2.T @ a1
    g_b2 = d_z2.sum(axis=0)
    d_a1 = d_z2 @ params.w2
    if masks is not None:
        d_a1 = d_a1 * masks[0]
    d_z1 = d_a1 * (z1 > 0.0)
    g_w1 = d_z1.T @ batch
    g_b1 = d_z1.sum(axis=0)

    grads = RegressorParams(w1=g_w1, b1=g_b1, w2=g_w2, b2=g_b2, w3=g_w3, b3=g_b3)
    return float(np.mean(losses)), grads


_PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3")


def train(
    dataset: Sequence[tuple[np.ndarray, np.ndarray]],
    cfg: TrainConfig,
    hidden: tuple[int, int] = (DESK_SCALE[1], DESK_SCALE[2]),
) -> TrainResult:
    """Fit the regressor on (embedding, profile-vector) pairs.

    Deterministic for a fixed seed: init, split, shuffles and dropout all
    draw from one seeded generator. Reports mean/median cosine similarity
    on the held-out split.
    """
    cfg.validate()
    if not dataset:
        raise ValueError("dataset is empty")
    emb = np.asarray([np.asarray(e, dtype=np.float64) for e, _ in dataset])
    tgt = np.asarray([np.asarray(d, dtype=np.float64) for _, d in dataset])
    if emb.ndim != 2 or tgt.ndim != 2:
        raise ValueError("dataset entries must have consistent dimensions")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(emb.shape[1], hidden[0], hidden[1], tgt.shape[1], rng)

    n = emb.shape[0]
    order = rng.permutation(n)
    n_holdout = int(round(cfg.holdout_fraction * n))
    hold_idx = order[:n_holdout]
    train_idx = order[n_holdout:]
    if len(train_idx) == 0:
        raise ValueError("holdout fraction leaves no training data")

    moments = {
        name: (np.zeros_like(getattr(params, name)), np.zeros_like(getattr(params, name)))
        for name in _PARAM_FIELDS
    }
    step = 0
    history: list[float] = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(len(train_idx))
        epoch_losses: list[float] = []
        for lo in range(0, len(perm), cfg.batch_size):
            rows = train_idx[perm[lo : lo + cfg.batch_size]]
            masks = (
                _dropout_masks(params, len(rows), cfg.dropout, rng)
                if cfg.dropout > 0.0
                else None
            )
            loss, grads = backward(params, emb[rows], tgt[rows], masks=masks)
            epoch_losses.append(loss)
            step += 1
            updated = {}
            for name in _PARAM_FIELDS:
                g = getattr(grads, name)
                m, v = moments[name]
                m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
                v = cfg.beta2 * v + (1.0 - cfg.beta2) * (g * g)
                moments[name] = (m, v)
                m_hat = m / (1.0 - cfg.beta1**step)
                v_hat = v / (1.0 - cfg.beta2**step)
                updated[name] = getattr(params, name) - cfg.learning_rate * m_hat / (
                    np.sqrt(v_hat) + cfg.eps
                )
            params = RegressorParams(**updated)
        history.append(float(np.mean(epoch_losses)))

    if n_holdout > 0:
        cos = cosine_similarities(params, emb[hold_idx], tgt[hold_idx])
    else:
        cos = cosine_similarities(params, emb[train_idx], tgt[train_idx])
    return TrainResult(
        params=params,
        loss_history=history,
        holdout_cosine_mean=float(np.mean(cos)),
        holdout_cosine_median=float(np.median(cos)),
        n_train=len(train_idx),
        n_holdout=int(n_holdout),
    )


def cosine_similarities(
    params: RegressorParams, embeddings: np.ndarray, targets: np.ndarray
) -> np.ndarray:
    pred = forward(params, embeddings, training=False)
    losses, _ = _cosine_grad_rows(np.atleast_2d(pred), np.atleast_2d(targets))
    return 1.0 - losses


def clamp_for_planning(raw: np.ndarray, floor: float = OUTPUT_FLOOR) -> np.ndarray:
    """Clamp raw predictions at a small positive floor so profiles validate."""
    return np.maximum(np.asarray(raw, dtype=np.float64), floor)


def parameter_count(params: RegressorParams) -> int:
    return sum(getattr(params, name).size for name in _PARAM_FIELDS)


def flop_estimate(params: RegressorParams) -> int:
    """2 * sum(in * out) over the affine layers."""
    d_in, h1, h2, d_out = params.layer_sizes
    return 2 * (d_in * h1 + h1 * h2 + h2 * d_out)


@dataclass(frozen=True)
class BenchmarkReport:
    parameter_count: int
    flop_estimate: int
    mean_latency_ms: float
    trials: int


def benchmark(params: RegressorParams, trials: int = 200) -> BenchmarkReport:
    """Size statistics plus measured single-call forward latency."""
    d_in = params.layer_sizes[0]
    x = np.zeros(d_in)
    forward(params, x)  # warm-up
    start = time.perf_counter()
    for _ in range(trials):
        forward(params, x)
    elapsed = time.perf_counter() - start
    return BenchmarkReport(
        parameter_count=parameter_count(params),
        flop_estimate=flop_estimate(params),
        mean_latency_ms=elapsed / trials * 1e3,
        trials=trials,
    )


def params_to_json_dict(
    params: RegressorParams,
    grid: TimeGrid | None = None,
    training_info: dict | None = None,
) -> dict:
    """Versioned, language-neutral parameter document with explicit shapes."""
    params.validate()
    d_in, h1, h2, d_out = params.layer_sizes
    doc: dict = {
        "format_version": PARAMS_FORMAT_VERSION,
        "layer_sizes": [d_in, h1, h2, d_out],
        "layers": [
            {
                "weights_shape": list(getattr(params, w).shape),
                "weights": [list(row) for row in getattr(params, w)],
                "bias": list(getattr(params, b)),
            }
            for w, b in (("w1", "b1"), ("w2", "b2"), ("w3", "b3"))
        ],
    }
    if grid is not None:
        doc["grid"] = list(grid.points)
    if training_info is not None:
        doc["training"] = training_info
    return doc


def params_from_json_dict(doc: dict) -> tuple[RegressorParams, TimeGrid | None]:
    if doc.get("format_version") != PARAMS_FORMAT_VERSION:
        raise ValueError(f"unsupported params format: {doc.get('format_version')!r}")
    layers = doc["layers"]
    arrays = []
    for layer in layers:
        w = np.array(layer["weights"], dtype=np.float64)
        if list(w.shape) != list(layer["weights_shape"]):
            raise ValueError("weights do not match their declared shape")
        arrays.append((w, np.array(layer["bias"], dtype=np.float64)))
    params = RegressorParams(
        w1=arrays[0][0], b1=arrays[0][1],
        w2=arrays[1][0], b2=arrays[1][1],
        w3=arrays[2][0], b3=arrays[2][1],
    )
    params.validate()
    grid = TimeGrid(tuple(doc["grid"])) if "grid" in doc else None
    return params, grid


def save_params(
    params: RegressorParams,
    path: str | Path,
    grid: TimeGrid | None = None,
    training_info: dict | None = None,
) -> None:
    Path(path).write_text(
        dumps(params_to_json_dict(params, grid=grid, training_info=training_info)),
        encoding="utf-8",
    )


def load_params(path: str | Path) -> tuple[RegressorParams, TimeGrid | None]:
    return params_from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def dataset_to_json_list(
    embeddings: np.ndarray, profiles: Sequence[DnaProfile]
) -> list[dict]:
    from .profile import profile_to_json_dict

    return [
        {"embedding": list(np.asarray(e, dtype=np.float64)), "dna": profile_to_json_dict(p)}
        for e, p in zip(embeddings, profiles)
    ]


def load_dataset(path: str | Path) -> tuple[np.ndarray, np.ndarray, TimeGrid]:
    """Read an (embedding, dna) dataset; all entries must share one grid."""
    from .profile import profile_from_json_dict

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list) or not doc:
        raise ValueError("dataset must be a non-empty JSON array")
    embeddings = []
    vectors = []
    grid: TimeGrid | None = None
    for i, entry in enumerate(doc):
        emb = np.asarray(entry["embedding"], dtype=np.float64)
        dna = profile_from_json_dict(entry["dna"])
        if grid is None:
            grid = dna.grid
        elif dna.grid.points != grid.points:
            raise ValueError(f"dataset entry {i} uses a different grid")
        embeddings.append(emb)
        vectors.append(np.asarray(dna.values, dtype=np.float64))
    emb_arr = np.asarray(embeddings)
    if emb_arr.ndim != 2:
        raise ValueError("dataset embeddings have inconsistent dimensions")
    assert grid is not None
    return emb_arr, np.asarray(vectors), grid
