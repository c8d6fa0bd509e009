"""Shared fixtures-by-function for the test modules."""
import numpy as np

from diagembed.diagnet import S, Triplet, build_network, neighbors_of_type, trim_network
from diagembed.embed import init_model, pair_loss_and_grads
from diagembed.evalkit import generate_cases
from diagembed.taskheads import ClassifierModel, PredictorModel


class PlainGraph:
    """Untyped adjacency graph exposing the two methods the node2vec sampler uses."""

    def __init__(self, adjacency: dict[str, list[str]]):
        self.names = list(adjacency)
        index = {k: i for i, k in enumerate(self.names)}
        self._nbrs = [tuple(sorted(index[x] for x in adjacency[k])) for k in self.names]

    def ids(self, *names):
        return tuple(self.names.index(n) for n in names)

    def neighbors(self, v):
        if not 0 <= v < len(self._nbrs):
            raise KeyError(v)
        return self._nbrs[v]

    def neighbor_set(self, v):
        return frozenset(self._nbrs[v])


TWENTY_NODE_TRIPLETS = [
    Triplet("d1", "n1", "w1"), Triplet("d1", "n2", "w1"), Triplet("d1", "n3", "w2"),
    Triplet("d2", "n1", "w1"), Triplet("d2", "n4", "w2"), Triplet("d2", "n2", "w2"),
    Triplet("d3", "n3", "w2"), Triplet("d3", "n4", "w1"), Triplet("d3", "n5", "w1"),
    Triplet("d3", "n1", "w2"), Triplet("d3", "n6", "w1"),
]


def twenty_node_net():
    net = build_network(TWENTY_NODE_TRIPLETS)
    assert len(net) == 20
    return net


def cyclic_prefix_ok(net, walk, mp) -> bool:
    """Is the walk's type sequence a prefix of the meta-path's cyclic extension?"""
    return all(net.types[v] is mp.type_at(i) for i, v in enumerate(walk))


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / scale


def numeric_grad(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        old = x[i]
        x[i] = old + h
        up = f()
        x[i] = old - h
        down = f()
        x[i] = old
        g[i] = (up - down) / (2 * h)
    return g


def sgns_gradient_errors(rng, dim=8, n=12):
    """Max relative error between analytic and central-difference SGNS gradients for one random draw."""
    model = init_model(n, dim, rng)
    model.center *= 20  # move away from the flat region around zero
    model.context *= 20
    c, ctx = rng.choice(n, 2, replace=False)
    negs = [int(x) for x in rng.choice(np.setdiff1d(np.arange(n), [ctx]), size=int(rng.integers(1, 6)))]
    loss, g_u, rows, g_v = pair_loss_and_grads(model, int(c), int(ctx), negs)

    def f():
        return pair_loss_and_grads(model, int(c), int(ctx), negs)[0]

    errs = [rel_err(g_u, numeric_grad(f, model.center[c]))]
    # duplicate negative rows accumulate
    summed = {}
    for r, g in zip(rows, g_v):
        summed[r] = summed.get(r, 0) + g
    for r, g in summed.items():
        errs.append(rel_err(g, numeric_grad(f, model.context[r])))
    return max(errs)


def random_classifier(rng, n=6, dim=4, C=3):
    m = ClassifierModel(rng.normal(size=(n, dim)), C, rng)
    m.weights = rng.normal(size=(dim, C))
    m.bias = rng.normal(size=C)
    return m


def random_predictor(rng, n=8, dim=4, diseases=(0, 1, 2), pooling="mean"):
    m = PredictorModel(rng.normal(size=(n, dim)), list(diseases), rng, pooling)
    m.weights = rng.normal(size=(dim, len(diseases)))
    m.bias = rng.normal(size=len(diseases))
    return m


def classifier_grad_error(rng):
    m = random_classifier(rng)
    node, label = int(rng.integers(6)), int(rng.integers(3))
    _, g_e, g_w, g_b = m.loss_and_grads(node, label)

    def f():
        return m.loss_and_grads(node, label)[0]

    return max(rel_err(g_e, numeric_grad(f, m.embedding[node])), rel_err(g_w, numeric_grad(f, m.weights)),
               rel_err(g_b, numeric_grad(f, m.bias)))


def predictor_grad_error(rng, pooling="mean"):
    m = random_predictor(rng, pooling=pooling)
    symptoms = [int(x) for x in rng.choice(np.arange(3, 8), size=int(rng.integers(1, 5)), replace=False)]
    target = int(rng.integers(3))
    _, rows, g_rows, g_w, g_b = m.loss_and_grads(symptoms, target)

    def f():
        return m.loss_and_grads(symptoms, target)[0]

    errs = [rel_err(g_w, numeric_grad(f, m.weights)), rel_err(g_b, numeric_grad(f, m.bias))]
    for r, g in zip(rows, g_rows):
        errs.append(rel_err(g, numeric_grad(f, m.embedding[r])))
    return max(errs)


def check_case_contract(net, spec, seed):
    cases = generate_cases(net, spec, np.random.default_rng(seed))
    trimmed = trim_network(net, spec.alpha, np.random.default_rng(seed))
    for case in cases:
        d = trimmed.node_id(net.keys[case.disease])
        allowed = {net.node_id(trimmed.keys[s]) for s in neighbors_of_type(trimmed, d, S)}
        assert 1 <= len(case.symptoms) <= spec.h
        assert len(set(case.symptoms)) == len(case.symptoms)
        assert set(case.symptoms) <= allowed
    return cases, trimmed
