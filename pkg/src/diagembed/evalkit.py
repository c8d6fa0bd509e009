"""Evaluation harness: F1 metrics, cross-validation, case generation and
missing-data sweeps for the node-classification and disease-prediction tasks.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .diagnet import D, S, HetNet, neighbors_of_type, trim_network
from .embed import EmbedConfig, init_matrix, noise_distribution, train_embeddings
from .seeding import derive_rng
from .taskheads import (ClassifierModel, HeadConfig, LabeledNode, PatientCase, PredictorModel, predict,
                        train_classifier, train_predictor)
from .walker import MetaPath, MetaPaths, Node2vec, WalkParams, extract_skipgrams, generate_corpus

log = logging.getLogger(__name__)

METHODS = ("none", "node2vec", "metapath", "multimetapath")
DEFAULT_METAPATH = "D,S,N,S,W,S,D"
DEFAULT_MULTI_METAPATHS = ("D,S,N,S,D", "D,S,W,S,D")
CSV_COLUMNS = ["method", "task", "level", "f1_micro", "f1_micro_std", "f1_macro", "f1_macro_std", "repeats"]


class EmptyCaseSetError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    levels: tuple[float, ...]
    repeats: int = 10
    seed: int = 0

    def __post_init__(self):
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("a sweep needs at least one level")
        if any(not 0 <= x < 100 for x in levels):
            raise ValueError(f"levels must lie in [0, 100): {levels}")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"levels must be strictly increasing: {levels}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    @staticmethod
    def parse_levels(text: str) -> tuple[float, ...]:
        """``"0:90:10"`` (inclusive range) or ``"50,70,90"``."""
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError("level step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            levels = [start + i * step for i in range(count)]
        else:
            levels = [float(x) for x in text.split(",") if x.strip()]
        return tuple(int(x) if float(x).is_integer() else x for x in levels)


@dataclass(frozen=True)
class CaseGenSpec:
    n: int = 10
    h: int = 10
    alpha: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.h < 1:
            raise ValueError(f"n and h must be >= 1, got n={self.n}, h={self.h}")
        if not 0 <= self.alpha < 100:
            raise ValueError(f"alpha must be in [0, 100), got {self.alpha}")


@dataclass
class MetricRow:
    method: str
    task: str
    level: float
    f1_micro: float
    f1_micro_std: float
    f1_macro: float
    f1_macro_std: float
    repeats: int
    skipped: str | None = None


@dataclass
class PretrainConfig:
    """Walk and skip-gram settings for producing an embedding layer."""

    walk: WalkParams = field(default_factory=WalkParams)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    p: float = 1.0
    q: float = 1.0
    metapath: str = DEFAULT_METAPATH
    multi_metapaths: tuple[str, ...] = DEFAULT_MULTI_METAPATHS


def f1_scores(predictions: Sequence[int], truths: Sequence[int], num_classes: int) -> tuple[float, float]:
    """Micro and macro F1 for single-label predictions.

    Classes with no support and no predictions count as F1 = 0 in the macro mean.
    """
    if len(predictions) != len(truths):
        raise ValueError(f"{len(predictions)} predictions for {len(truths)} truths")
    if len(truths) == 0:
        raise ValueError("no predictions to score")
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truths, dtype=np.int64)
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    tp = np.diag(confusion)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    micro_den = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / micro_den if micro_den else 0.0
    per_class = []
    for c in range(num_classes):
        den = 2 * tp[c] + fp[c] + fn[c]
        per_class.append(2 * int(tp[c]) / int(den) if den else 0.0)
    macro = sum(per_class) / num_classes
    return float(micro), float(macro)


def kfold_split(items: Sequence, k: int, rng: np.random.Generator) -> list[list]:
    """Shuffle and cut into ``k`` folds whose sizes differ by at most one."""
    if k < 1 or k > len(items):
        raise ValueError(f"cannot split {len(items)} items into {k} folds")
    order = rng.permutation(len(items))
    return [[items[i] for i in chunk] for chunk in np.array_split(order, k)]


def drop_fraction(items: Sequence, pct: float, rng: np.random.Generator) -> list:
    """Remove ``floor(pct% * len(items))`` items at random; survivors keep their order."""
    if not 0 <= pct < 100:
        raise ValueError(f"pct must be in [0, 100), got {pct}")
    n_drop = int(pct * len(items) // 100)
    dropped = set(rng.choice(len(items), size=n_drop, replace=False).tolist()) if n_drop else set()
    return [x for i, x in enumerate(items) if i not in dropped]


def sample_cases(net: HetNet, n: int, h: int, rng: np.random.Generator) -> list[PatientCase]:
    """``n`` cases per disease of ``net``, ids mapped back through ``net.origin``.

    Each case holds between 1 and ``min(h, |S_d|)`` distinct symptoms, the
    count drawn uniformly, then the symptoms drawn uniformly without
    replacement from the disease's symptom neighbours ``S_d``.
    """
    cases = []
    for d in net.nodes_of_type(D):
        pool = neighbors_of_type(net, d, S)
        if not pool:
            continue
        for _ in range(n):
            count = int(rng.integers(1, min(h, len(pool)) + 1))
            chosen = rng.choice(len(pool), size=count, replace=False)
            cases.append(PatientCase(net.origin[d], tuple(sorted(net.origin[pool[i]] for i in chosen))))
    return cases


def generate_cases(net: HetNet, spec: CaseGenSpec, rng: np.random.Generator) -> list[PatientCase]:
    """Trim ``spec.alpha``% of the nodes, then sample cases from what survives.

    The trim draws from ``rng`` first, so ``trim_network(net, alpha, rng')``
    with an identically seeded ``rng'`` reproduces the trimmed graph.
    Returned ids refer to ``net``.
    """
    trimmed = trim_network(net, spec.alpha, rng)
    # trimmed.origin points into net only when net is itself untrimmed
    trimmed = _rebase(trimmed, net)
    cases = sample_cases(trimmed, spec.n, spec.h, rng)
    if not cases:
        raise EmptyCaseSetError(f"no disease with surviving symptoms at alpha={spec.alpha}")
    return cases


def _rebase(trimmed: HetNet, parent: HetNet) -> HetNet:
    if all(parent.origin[i] == i for i in range(len(parent))):
        return trimmed
    origin = tuple(parent.node_id(k) for k in trimmed.keys)
    return HetNet(trimmed.keys, trimmed.types, trimmed.edges, origin)


def pretrain_embeddings(net: HetNet, method: str, config: PretrainConfig, rng: np.random.Generator) -> np.ndarray:
    """Embedding layer (``|V| x dim``) for ``method``: random init, or walks + SGNS."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    dim = config.embed.dim
    if method == "none":
        return init_matrix(len(net), dim, rng)
    if method == "node2vec":
        strategy = Node2vec(config.p, config.q)
    elif method == "metapath":
        strategy = MetaPaths([MetaPath.parse(config.metapath)])
    else:
        strategy = MetaPaths([MetaPath.parse(m) for m in config.multi_metapaths])
    walks = generate_corpus(net, strategy, config.walk, rng)
    pairs = extract_skipgrams(walks, config.embed.window, config.embed.pairs, rng)
    noise = noise_distribution(walks, len(net))
    embed_cfg = EmbedConfig(**{**config.embed.__dict__, "seed": int(rng.integers(2**63 - 1))})
    model, report = train_embeddings(pairs, len(net), embed_cfg, noise=noise)
    log.info("pretrained %s: %d walks, %s", method, len(walks), report)
    return model.center


def _summarise(method, task, level, scores, repeats) -> MetricRow:
    arr = np.asarray(scores, dtype=float)
    return MetricRow(method, task, level, float(arr[:, 0].mean()), float(arr[:, 0].std()),
                     float(arr[:, 1].mean()), float(arr[:, 1].std()), repeats)


def _skipped(method, task, level, reason) -> MetricRow:
    log.warning("%s/%s level %s skipped: %s", task, method, level, reason)
    nan = float("nan")
    return MetricRow(method, task, level, nan, nan, nan, nan, 0, reason)


def _head_config(head: HeadConfig, seed: int) -> HeadConfig:
    return HeadConfig(**{**head.__dict__, "seed": seed})


def run_classification_sweep(net: HetNet, labels: Sequence[LabeledNode], method: str, sweep: SweepSpec,
                             pretrain: PretrainConfig | None = None, head: HeadConfig | None = None,
                             folds: int = 10, num_classes: int | None = None) -> list[MetricRow]:
    """Node classification under missing training labels.

    At each level the embedding layer is built once on the full network; then
    ``folds``-fold cross-validation runs with every training fold thinned by
    ``level`` percent.  Fold splits, label drops and head initialisation
    depend only on ``(sweep.seed, level, fold)``, so all methods see the same
    data.
    """
    pretrain = pretrain or PretrainConfig()
    head = head or HeadConfig()
    labels = list(labels)
    C = num_classes or (max(x.label for x in labels) + 1 if labels else 0)
    rows = []
    for level in sweep.levels:
        if len(labels) < folds:
            rows.append(_skipped(method, "classify", level, f"{len(labels)} labelled nodes for {folds} folds"))
            continue
        emb = pretrain_embeddings(net, method, pretrain, derive_rng(sweep.seed, "classify", "pretrain", method, level))
        split_rng = derive_rng(sweep.seed, "classify", "folds", level)
        parts = kfold_split(labels, folds, split_rng)
        scores = []
        for f, test in enumerate(parts):
            cell_rng = derive_rng(sweep.seed, "classify", "cell", level, f)
            train = [x for g, part in enumerate(parts) if g != f for x in part]
            train = drop_fraction(train, level, cell_rng)
            model = ClassifierModel(emb, C, cell_rng)
            train_classifier(model, train, _head_config(head, int(cell_rng.integers(2**63 - 1))))
            preds = [predict(model.forward(x.node)) for x in test]
            scores.append(f1_scores(preds, [x.label for x in test], C))
        rows.append(_summarise(method, "classify", level, scores, folds))
    return rows


def run_prediction_sweep(net: HetNet, method: str, sweep: SweepSpec, casegen: CaseGenSpec | None = None,
                         pretrain: PretrainConfig | None = None, head: HeadConfig | None = None,
                         validation_cases: int = 10) -> list[MetricRow]:
    """Disease prediction with training cases drawn from an alpha-trimmed graph.

    Validation cases always come from the whole graph.  Each level averages
    ``sweep.repeats`` independent train/validate runs; the per-repeat data
    depends only on ``(sweep.seed, level, repeat)``.  Repeats whose trimmed
    graph yields no case are left out of the average (``repeats`` counts the
    ones kept); a level where every repeat fails is reported as skipped.
    """
    casegen = casegen or CaseGenSpec()
    pretrain = pretrain or PretrainConfig()
    head = head or HeadConfig()
    diseases = net.nodes_of_type(D)
    if len(diseases) < 2:
        raise ValueError("disease prediction needs at least two diseases")
    rows = []
    for level in sweep.levels:
        emb = pretrain_embeddings(net, method, pretrain, derive_rng(sweep.seed, "predict", "pretrain", method, level))
        scores, failures = [], []
        for rep in range(sweep.repeats):
            rep_rng = derive_rng(sweep.seed, "predict", "cell", level, rep)
            try:
                train = generate_cases(net, CaseGenSpec(casegen.n, casegen.h, level), rep_rng)
            except EmptyCaseSetError as exc:
                failures.append(str(exc))
                continue
            valid = generate_cases(net, CaseGenSpec(validation_cases, casegen.h, 0), rep_rng)
            model = PredictorModel(emb, diseases, rep_rng, pooling=head.pooling)
            train_predictor(model, train, _head_config(head, int(rep_rng.integers(2**63 - 1))))
            preds = [predict(model.forward(c.symptoms)) for c in valid]
            scores.append(f1_scores(preds, [model.column(c.disease) for c in valid], len(diseases)))
        if not scores:
            rows.append(_skipped(method, "predict", level, failures[0]))
            continue
        if failures:
            log.warning("predict/%s level %s: %d of %d repeats had no cases", method, level, len(failures), sweep.repeats)
        rows.append(_summarise(method, "predict", level, scores, len(scores)))
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.6f}"
    return str(x)


def write_results_csv(rows: Sequence[MetricRow], sink: IO[str]) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.method, r.task, _fmt(r.level), _fmt(r.f1_micro), _fmt(r.f1_micro_std),
                         _fmt(r.f1_macro), _fmt(r.f1_macro_std), r.repeats])


def read_results_csv(source: IO[str]) -> list[MetricRow]:
    reader = csv.DictReader(source)
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"unexpected results header {reader.fieldnames}")
    rows = []
    for rec in reader:
        level = float(rec["level"])
        rows.append(MetricRow(rec["method"], rec["task"], int(level) if level.is_integer() else level,
                              float(rec["f1_micro"]), float(rec["f1_micro_std"]), float(rec["f1_macro"]),
                              float(rec["f1_macro_std"]), int(rec["repeats"])))
    return rows


def write_plot_data(rows: Sequence[MetricRow], metric: str, sink: IO[str]) -> None:
    """``level`` column plus one column per method, tab-separated."""
    methods = list(dict.fromkeys(r.method for r in rows))
    levels = sorted(set(r.level for r in rows))
    table = {(r.method, r.level): getattr(r, metric) for r in rows}
    sink.write("\t".join(["level", *methods]) + "\n")
    for level in levels:
        cells = [_fmt(table.get((m, level), float("nan"))) for m in methods]
        sink.write("\t".join([_fmt(level), *cells]) + "\n")
