"""
Walk corpora
============

node2vec walks against meta-path guided walks on a small synthetic network.
"""
import numpy as np

from diagembed.synth import SynthSpec, synth_network
from diagembed.walker import MetaPaths, Node2vec, WalkParams, extract_skipgrams, generate_corpus

net, _ = synth_network(SynthSpec(groups=3, diseases_per_group=3, names_per_group=5))
params = WalkParams(r=4, l=9)


def show(walk):
    return " ".join(net.types[v].value for v in walk)


# biased second-order walks start from every node
walks = generate_corpus(net, Node2vec(p=0.5, q=2.0), params, np.random.default_rng(1))
print(len(walks), "node2vec walks, e.g.", show(walks[0]))

# the walk budget r is split across the meta-paths, so each gets r // 2 rounds
multi = MetaPaths(["D,S,N,S,D", "D,S,W,S,D"])
walks = generate_corpus(net, multi, params, np.random.default_rng(1))
print(len(walks), "meta-path walks")
for w in walks[:2]:
    print("  ", show(w))

# skip-gram pairs within a window of 2
pairs = extract_skipgrams(walks, 2)
print(pairs.shape[0], "pairs; first:", [(net.keys[a], net.keys[b]) for a, b in pairs[:3]])
