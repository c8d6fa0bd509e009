"""
Building a diagnostic network
=============================

Triplets of (disease, symptom name, symptom value) become a typed graph.
"""
import io

import numpy as np

from diagembed import diagnet

# three facts; d1 and d2 share the "fever = high" occurrence
text = "d1\tfever\thigh\nd2\tfever\thigh\nd2\tcough\tdry\n"
net = diagnet.build_network(diagnet.load_triplets(io.StringIO(text)))
print(diagnet.format_stats(diagnet.network_stats(net)))

# every node key is namespaced by its type letter
for v in range(len(net)):
    print(net.types[v].value, net.keys[v], [net.keys[u] for u in net.neighbors(v)])

# symptom occurrences reachable from d2
d2 = net.node_id("d:d2")
print([net.keys[s] for s in diagnet.neighbors_of_type(net, d2, diagnet.S)])

# removing 40% of the nodes keeps only edges between survivors
trimmed = diagnet.trim_network(net, 40, np.random.default_rng(0))
print(diagnet.format_stats(diagnet.network_stats(trimmed)))
