"""
Skip-gram embeddings
====================

Train node vectors from multi-meta-path walks and look at nearest diseases.
"""
import io

import numpy as np

from diagembed.embed import EmbedConfig, export_embeddings, noise_distribution, train_embeddings
from diagembed.diagnet import D
from diagembed.synth import SynthSpec, synth_network
from diagembed.walker import MetaPaths, WalkParams, extract_skipgrams, generate_corpus

net, _ = synth_network(SynthSpec(groups=4, diseases_per_group=4, names_per_group=10, overlap=0.5))
rng = np.random.default_rng(0)
walks = generate_corpus(net, MetaPaths(["D,S,N,S,D", "D,S,W,S,D"]), WalkParams(r=20, l=40), rng)

config = EmbedConfig(dim=16, pairs=200_000, epochs=2, seed=3)
pairs = extract_skipgrams(walks, config.window, config.pairs, rng)
model, report = train_embeddings(pairs, len(net), config, noise=noise_distribution(walks, len(net)))
print(report)

# diseases of the same planted group should sit close together
emb = model.center / np.linalg.norm(model.center, axis=1, keepdims=True)
diseases = net.nodes_of_type(D)
for d in diseases[:4]:
    sims = emb[diseases] @ emb[d]
    best = [net.keys[diseases[i]] for i in np.argsort(-sims)[1:4]]
    print(net.keys[d], "->", best)

# word2vec-style text export
buf = io.StringIO()
export_embeddings(model, net.keys, buf)
print(buf.getvalue().splitlines()[0])
