"""Downstream networks: an embedding layer followed by one sigmoid layer.

``ClassifierModel`` maps a single node to class probabilities and is trained
with binary cross-entropy against one-hot labels.  ``PredictorModel`` pools
the embeddings of a symptom set and maps the result to disease
probabilities, trained with mean squared error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, NamedTuple, Sequence

import numpy as np

from .embed import INIT_RANGE, EmbeddingModel, RmsProp, TrainingError, init_matrix, rmsprop_step


class LabeledNode(NamedTuple):
    node: int
    label: int


class PatientCase(NamedTuple):
    disease: int
    symptoms: tuple[int, ...]


@dataclass
class HeadConfig:
    epochs: int = 10
    optimizer: RmsProp = field(default_factory=RmsProp)
    freeze_embedding: bool = False
    pooling: str = "mean"  # predictor only: "mean" or "sum"
    seed: int = 0


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class _Head:
    """Shared parameter handling: embedding, output weights, bias and RMSProp state."""

    def __init__(self, embedding: np.ndarray, n_out: int, rng: np.random.Generator):
        self.embedding = np.array(embedding, dtype=float)
        self.weights = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(self.embedding.shape[1], n_out))
        self.bias = np.zeros(n_out)
        self.reset_optimizer()

    def reset_optimizer(self):
        self.acc_embedding = np.zeros_like(self.embedding)
        self.acc_weights = np.zeros_like(self.weights)
        self.acc_bias = np.zeros_like(self.bias)

    @property
    def dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def n_out(self) -> int:
        return self.bias.shape[0]

    def _row(self, v: int) -> np.ndarray:
        if not 0 <= v < self.embedding.shape[0]:
            raise IndexError(f"node id {v} out of range for {self.embedding.shape[0]} nodes")
        return self.embedding[v]

    def _apply(self, rows, g_rows, g_w, g_b, cfg: HeadConfig):
        opt = cfg.optimizer
        rmsprop_step(self.weights, g_w, self.acc_weights, opt)
        rmsprop_step(self.bias, g_b, self.acc_bias, opt)
        if cfg.freeze_embedding:
            return
        p, a = self.embedding[rows], self.acc_embedding[rows]
        rmsprop_step(p, g_rows, a, opt)
        self.embedding[rows], self.acc_embedding[rows] = p, a

    def save(self, sink: IO[str]) -> None:
        """Text checkpoint: a shape header, then embedding, weight and bias rows."""
        n, d = self.embedding.shape
        sink.write(f"{type(self).__name__} {n} {d} {self.n_out}\n")
        for block in (self.embedding, self.weights, self.bias[None, :]):
            for row in block:
                sink.write(" ".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load(cls, source: IO[str]):
        kind, n, d, c = source.readline().split()
        if kind != cls.__name__:
            raise ValueError(f"checkpoint holds a {kind}, not a {cls.__name__}")
        n, d, c = int(n), int(d), int(c)

        def block(rows):
            return np.array([[float(x) for x in source.readline().split()] for _ in range(rows)]).reshape(rows, -1)

        obj = cls.__new__(cls)
        obj.embedding = block(n)
        obj.weights = block(d)
        obj.bias = block(1)[0]
        if obj.embedding.shape != (n, d) or obj.weights.shape != (d, c) or obj.bias.shape != (c,):
            raise ValueError("checkpoint shapes do not match its header")
        obj.reset_optimizer()
        return obj


class ClassifierModel(_Head):
    def __init__(self, embedding: np.ndarray | EmbeddingModel, num_classes: int, rng: np.random.Generator):
        if isinstance(embedding, EmbeddingModel):
            embedding = embedding.center
        super().__init__(embedding, num_classes, rng)

    @classmethod
    def random(cls, num_nodes: int, dim: int, num_classes: int, rng: np.random.Generator) -> "ClassifierModel":
        """Classifier whose embedding layer is only randomly initialised."""
        return cls(init_matrix(num_nodes, dim, rng), num_classes, rng)

    @property
    def num_classes(self) -> int:
        return self.n_out

    def forward(self, node: int) -> np.ndarray:
        return _sigmoid(self._row(node) @ self.weights + self.bias)

    def loss_and_grads(self, node: int, label: int):
        """Summed BCE against the one-hot ``label``; gradients for (row, weights, bias)."""
        e = self._row(node)
        z = e @ self.weights + self.bias
        y = np.zeros(self.n_out)
        y[label] = 1.0
        # BCE with logits: log(1 + exp(z)) - y*z
        loss = float(np.sum(np.logaddexp(0.0, z) - y * z))
        dz = _sigmoid(z) - y
        return loss, self.weights @ dz, np.outer(e, dz), dz


class PredictorModel(_Head):
    """Disease predictor.  Output column ``i`` is disease node ``diseases[i]`` of the full network."""

    def __init__(self, embedding: np.ndarray | EmbeddingModel, diseases: Sequence[int], rng: np.random.Generator,
                 pooling: str = "mean"):
        if isinstance(embedding, EmbeddingModel):
            embedding = embedding.center
        super().__init__(embedding, len(diseases), rng)
        if pooling not in ("mean", "sum"):
            raise ValueError(f"pooling must be 'mean' or 'sum', got {pooling!r}")
        self.pooling = pooling
        self.diseases = [int(d) for d in diseases]
        self._column = {d: i for i, d in enumerate(self.diseases)}

    @classmethod
    def random(cls, num_nodes: int, dim: int, diseases: Sequence[int], rng: np.random.Generator,
               pooling: str = "mean") -> "PredictorModel":
        return cls(init_matrix(num_nodes, dim, rng), diseases, rng, pooling)

    def column(self, disease: int) -> int:
        try:
            return self._column[disease]
        except KeyError:
            raise KeyError(f"node {disease} is not one of the predictor's diseases") from None

    def save(self, sink):
        super().save(sink)
        sink.write(self.pooling + " " + " ".join(map(str, self.diseases)) + "\n")

    @classmethod
    def load(cls, source):
        obj = super().load(source)
        pooling, *diseases = source.readline().split()
        obj.pooling = pooling
        obj.diseases = [int(d) for d in diseases]
        obj._column = {d: i for i, d in enumerate(obj.diseases)}
        if len(obj.diseases) != obj.n_out:
            raise ValueError("checkpoint disease list does not match its output width")
        return obj

    def _pool(self, symptoms: Sequence[int]) -> tuple[list[int], np.ndarray, float]:
        rows = sorted(set(int(x) for x in symptoms))
        if not rows:
            raise ValueError("a case needs at least one symptom")
        for r in rows:
            self._row(r)
        scale = 1.0 / len(rows) if self.pooling == "mean" else 1.0
        pooled = self.embedding[rows].sum(axis=0) * scale
        return rows, pooled, scale

    def forward(self, symptoms: Sequence[int]) -> np.ndarray:
        _, pooled, _ = self._pool(symptoms)
        return _sigmoid(pooled @ self.weights + self.bias)

    def loss_and_grads(self, symptoms: Sequence[int], target: int):
        """MSE against the one-hot output column ``target``.

        Returns ``(loss, rows, row_grads, weight_grad, bias_grad)`` with
        ``rows`` the distinct symptom ids in ascending order.
        """
        rows, pooled, scale = self._pool(symptoms)
        z = pooled @ self.weights + self.bias
        out = _sigmoid(z)
        y = np.zeros(self.n_out)
        y[target] = 1.0
        diff = out - y
        loss = float(np.mean(diff * diff))
        dz = 2.0 / self.n_out * diff * out * (1.0 - out)
        g_pooled = self.weights @ dz
        g_rows = np.tile(g_pooled * scale, (len(rows), 1))
        return loss, rows, g_rows, np.outer(pooled, dz), dz


def predict(probabilities: Sequence[float]) -> int:
    """Argmax with ties going to the lowest index."""
    probs = np.asarray(probabilities)
    if probs.size == 0:
        raise ValueError("empty probability vector")
    return int(np.argmax(probs))


def _check_loss(loss: float, epoch: int, i: int):
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite loss at epoch {epoch}, example {i}")


def train_classifier(model: ClassifierModel, data: Sequence[LabeledNode], config: HeadConfig | None = None) -> list[float]:
    """Per-example RMSProp over shuffled epochs.  Returns the mean loss of each epoch."""
    config = config or HeadConfig()
    if not data:
        raise ValueError("no training examples")
    for item in data:
        if not 0 <= item.label < model.num_classes:
            raise ValueError(f"label {item.label} out of range for {model.num_classes} classes")
    rng = np.random.default_rng(config.seed)
    history = []
    for epoch in range(config.epochs):
        total = 0.0
        for i in rng.permutation(len(data)):
            node, label = data[i]
            loss, g_e, g_w, g_b = model.loss_and_grads(node, label)
            _check_loss(loss, epoch, i)
            model._apply([node], g_e[None, :], g_w, g_b, config)
            total += loss
        history.append(total / len(data))
    return history


def train_predictor(model: PredictorModel, cases: Sequence[PatientCase], config: HeadConfig | None = None) -> list[float]:
    config = config or HeadConfig()
    if not cases:
        raise ValueError("no training cases")
    rng = np.random.default_rng(config.seed)
    history = []
    for epoch in range(config.epochs):
        total = 0.0
        for i in rng.permutation(len(cases)):
            disease, symptoms = cases[i]
            loss, rows, g_rows, g_w, g_b = model.loss_and_grads(symptoms, model.column(disease))
            _check_loss(loss, epoch, i)
            model._apply(rows, g_rows, g_w, g_b, config)
            total += loss
        history.append(total / len(cases))
    return history
