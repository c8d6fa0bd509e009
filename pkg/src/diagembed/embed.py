"""Skip-gram with negative sampling, trained by sparse RMSProp.

The model keeps a center matrix (the exported embeddings) and a context
matrix.  Each training pair touches one center row and ``1 + negatives``
context rows; only those rows and their RMSProp accumulators change.

:func:`pair_loss_and_grads` and :func:`rmsprop_step` are the reference
numpy implementations.  :func:`train_embeddings` runs the same arithmetic
in a compiled loop, since the default budget is one million pairs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import IO, Sequence
from urllib.parse import quote, unquote

import numba
import numpy as np

INIT_RANGE = 0.05


class TrainingError(RuntimeError):
    pass


@dataclass
class RmsProp:
    """RMSProp hyper-parameters.  Defaults follow the usual framework values."""

    lr: float = 0.001
    rho: float = 0.9
    eps: float = 1e-7

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must be in (0, 1), got {self.rho}")
        if self.eps < 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")


@dataclass
class EmbeddingModel:
    center: np.ndarray
    context: np.ndarray
    acc_center: np.ndarray = None
    acc_context: np.ndarray = None

    def __post_init__(self):
        if self.acc_center is None:
            self.acc_center = np.zeros_like(self.center)
        if self.acc_context is None:
            self.acc_context = np.zeros_like(self.context)

    @property
    def dim(self) -> int:
        return self.center.shape[1]

    @property
    def num_nodes(self) -> int:
        return self.center.shape[0]


@dataclass
class EmbedConfig:
    dim: int = 100
    negatives: int = 5
    window: int = 5
    pairs: int | None = 1_000_000
    epochs: int = 1
    optimizer: RmsProp = field(default_factory=RmsProp)
    seed: int = 0


@dataclass
class TrainReport:
    pairs_seen: int
    mean_loss: float
    wall_time: float
    losses: np.ndarray = field(repr=False, default=None)

    def __str__(self):
        return f"pairs seen: {self.pairs_seen}  mean loss: {self.mean_loss:.6f}  wall time: {self.wall_time:.2f}s"


def init_matrix(num_rows: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-INIT_RANGE, INIT_RANGE, size=(num_rows, dim))


def init_model(num_nodes: int, dim: int, rng: np.random.Generator) -> EmbeddingModel:
    if num_nodes < 1 or dim < 1:
        raise ValueError(f"model needs at least one node and one dimension, got {num_nodes}x{dim}")
    center = init_matrix(num_nodes, dim, rng)
    context = init_matrix(num_nodes, dim, rng)
    return EmbeddingModel(center, context)


def noise_distribution(corpus: Sequence[Sequence[int]], num_nodes: int | None = None) -> np.ndarray:
    """Unigram counts raised to 3/4, normalised.  Length is ``num_nodes`` if given."""
    lengths = [len(w) for w in corpus]
    if not corpus or sum(lengths) == 0:
        raise ValueError("noise distribution needs a nonempty corpus")
    flat = np.concatenate([np.asarray(w, dtype=np.int64) for w in corpus])
    counts = np.bincount(flat, minlength=num_nodes or 0).astype(float)
    weights = counts ** 0.75
    return weights / weights.sum()


def _log_sigmoid_neg(x):
    # -log(sigmoid(x)), stable for large |x|
    return np.logaddexp(0.0, -x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def pair_loss_and_grads(model: EmbeddingModel, center: int, context: int, negatives: Sequence[int]):
    """SGNS loss for one pair and gradients of the touched rows.

    Returns ``(loss, grad_center_row, context_rows, grad_context_rows)``
    where ``context_rows`` lists the positive context first, then the
    negatives (duplicates kept; gradients of duplicates are summed when the
    rows are applied).
    """
    n = model.num_nodes
    rows = [context, *negatives]
    for r in (center, *rows):
        if not 0 <= r < n:
            raise IndexError(f"node id {r} out of range for {n} nodes")
    u = model.center[center]
    v = model.context[rows]
    scores = v @ u
    labels = np.zeros(len(rows))
    labels[0] = 1.0
    # label 1: -log s(x); label 0: -log(1 - s(x)) = -log s(-x)
    loss = float(_log_sigmoid_neg(scores[0]) + _log_sigmoid_neg(-scores[1:]).sum())
    coef = _sigmoid(scores) - labels
    grad_u = coef @ v
    grad_v = np.outer(coef, u)
    return loss, grad_u, rows, grad_v


def rmsprop_step(params: np.ndarray, grads: np.ndarray, acc: np.ndarray, opt: RmsProp):
    """One RMSProp update, in place.  ``params``, ``grads`` and ``acc`` share a shape."""
    if params.shape != grads.shape or params.shape != acc.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, acc {acc.shape}")
    if not np.all(np.isfinite(grads)):
        raise TrainingError("non-finite gradient")
    acc *= opt.rho
    acc += (1.0 - opt.rho) * grads * grads
    params -= opt.lr * grads / (np.sqrt(acc) + opt.eps)
    return params, acc


def apply_pair_update(model: EmbeddingModel, center: int, grad_u: np.ndarray, rows: Sequence[int],
                      grad_v: np.ndarray, opt: RmsProp) -> None:
    """Apply gradients from :func:`pair_loss_and_grads` to the touched rows only."""
    rows = np.asarray(rows)
    uniq, inv = np.unique(rows, return_inverse=True)
    summed = np.zeros((len(uniq), grad_v.shape[1]))
    np.add.at(summed, inv, grad_v)
    p, a = model.center[center].copy(), model.acc_center[center].copy()
    rmsprop_step(p, grad_u.copy(), a, opt)
    model.center[center], model.acc_center[center] = p, a
    p, a = model.context[uniq], model.acc_context[uniq]
    rmsprop_step(p, summed, a, opt)
    model.context[uniq], model.acc_context[uniq] = p, a


@numba.njit(cache=True)
def _sgns_loop(center_m, context_m, acc_c, acc_x, centers, contexts, negs, lr, rho, eps, losses):
    """Sequential SGNS/RMSProp over all pairs.  Returns index of a bad pair or -1."""
    dim = center_m.shape[1]
    n_neg = negs.shape[1]
    rows = np.empty(n_neg + 1, dtype=np.int64)
    coef = np.empty(n_neg + 1)
    grad_u = np.empty(dim)
    grad_v = np.empty((n_neg + 1, dim))
    for t in range(centers.shape[0]):
        c = centers[t]
        rows[0] = contexts[t]
        for j in range(n_neg):
            rows[j + 1] = negs[t, j]
        loss = 0.0
        for j in range(n_neg + 1):
            s = 0.0
            for d in range(dim):
                s += context_m[rows[j], d] * center_m[c, d]
            sig = 0.5 * (1.0 + np.tanh(0.5 * s))
            if j == 0:
                loss += np.logaddexp(0.0, -s)
                coef[j] = sig - 1.0
            else:
                loss += np.logaddexp(0.0, s)
                coef[j] = sig
        losses[t] = loss
        for d in range(dim):
            g = 0.0
            for j in range(n_neg + 1):
                g += coef[j] * context_m[rows[j], d]
            grad_u[d] = g
        # duplicate rows: accumulate into the first occurrence, skip the rest
        for j in range(n_neg + 1):
            first = j
            for i in range(j):
                if rows[i] == rows[j]:
                    first = i
                    break
            if first == j:
                for d in range(dim):
                    grad_v[j, d] = coef[j] * center_m[c, d]
            else:
                for d in range(dim):
                    grad_v[first, d] += coef[j] * center_m[c, d]
        ok = np.isfinite(loss)
        for d in range(dim):
            if not np.isfinite(grad_u[d]):
                ok = False
        if not ok:
            return t
        for d in range(dim):
            g = grad_u[d]
            a = rho * acc_c[c, d] + (1.0 - rho) * g * g
            acc_c[c, d] = a
            center_m[c, d] -= lr * g / (np.sqrt(a) + eps)
        for j in range(n_neg + 1):
            dup = False
            for i in range(j):
                if rows[i] == rows[j]:
                    dup = True
                    break
            if dup:
                continue
            r = rows[j]
            for d in range(dim):
                g = grad_v[j, d]
                if not np.isfinite(g):
                    return t
                a = rho * acc_x[r, d] + (1.0 - rho) * g * g
                acc_x[r, d] = a
                context_m[r, d] -= lr * g / (np.sqrt(a) + eps)
    return -1


def draw_negatives(contexts: np.ndarray, noise: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` noise nodes per pair, none equal to that pair's positive context."""
    negs = rng.choice(len(noise), size=(len(contexts), k), p=noise)
    for _ in range(1000):
        clash = negs == contexts[:, None]
        if not clash.any():
            return negs
        negs[clash] = rng.choice(len(noise), size=int(clash.sum()), p=noise)
    raise TrainingError("cannot draw negatives distinct from the positive context; noise support too small")


def train_embeddings(pairs: np.ndarray, num_nodes: int, config: EmbedConfig | None = None,
                     noise: np.ndarray | None = None,
                     model: EmbeddingModel | None = None) -> tuple[EmbeddingModel, TrainReport]:
    """Train SGNS embeddings over ``pairs`` for ``config.epochs`` shuffled passes.

    ``noise`` defaults to the 3/4-power unigram law over the pair centers,
    which for an unsubsampled pool is proportional to walk occurrences.
    """
    config = config or EmbedConfig()
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        raise ValueError("no skip-gram pairs to train on")
    if pairs.min() < 0 or pairs.max() >= num_nodes:
        raise IndexError(f"pair node ids out of range for {num_nodes} nodes")
    rng = np.random.default_rng(config.seed)
    if model is None:
        model = init_model(num_nodes, config.dim, rng)
    if noise is None:
        noise = noise_distribution([pairs[:, 0]], num_nodes)
    opt = config.optimizer
    start = time.perf_counter()
    all_losses = []
    for _ in range(config.epochs):
        order = rng.permutation(len(pairs))
        centers = np.ascontiguousarray(pairs[order, 0])
        contexts = np.ascontiguousarray(pairs[order, 1])
        negs = draw_negatives(contexts, noise, config.negatives, rng).astype(np.int64)
        losses = np.empty(len(pairs))
        bad = _sgns_loop(model.center, model.context, model.acc_center, model.acc_context,
                         centers, contexts, negs, opt.lr, opt.rho, opt.eps, losses)
        if bad >= 0:
            raise TrainingError(f"non-finite gradient at pair index {int(order[bad])}")
        all_losses.append(losses)
    losses = np.concatenate(all_losses)
    report = TrainReport(len(losses), float(losses.mean()), time.perf_counter() - start, losses)
    return model, report


def encode_key(key: str) -> str:
    """Make a node key safe for whitespace-separated text files."""
    return quote(key, safe=":|!$&'()*+,;=@/-._~")


def decode_key(token: str) -> str:
    return unquote(token)


def export_embeddings(matrix: np.ndarray | EmbeddingModel, keys: Sequence[str], sink: IO[str]) -> None:
    """word2vec text format: ``<rows> <dim>`` header, then ``key v1 ... vdim`` per row."""
    if isinstance(matrix, EmbeddingModel):
        matrix = matrix.center
    if len(keys) != matrix.shape[0]:
        raise ValueError(f"{len(keys)} keys for {matrix.shape[0]} rows")
    sink.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
    for key, row in zip(keys, matrix):
        sink.write(encode_key(key) + " " + " ".join(repr(float(x)) for x in row) + "\n")


def import_embeddings(source: IO[str]) -> tuple[list[str], np.ndarray]:
    header = source.readline().split()
    if len(header) != 2:
        raise ValueError("embedding file header must be '<rows> <dim>'")
    rows, dim = int(header[0]), int(header[1])
    keys, data = [], np.empty((rows, dim))
    for i in range(rows):
        parts = source.readline().split()
        if len(parts) != dim + 1:
            raise ValueError(f"embedding row {i + 1}: expected {dim} values, got {len(parts) - 1}")
        keys.append(decode_key(parts[0]))
        data[i] = [float(x) for x in parts[1:]]
    return keys, data
