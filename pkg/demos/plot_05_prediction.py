"""
Disease prediction from sampled cases
=====================================

Training cases come from a graph with some nodes removed; validation
cases always come from the whole graph.
"""
import numpy as np

from diagembed.embed import EmbedConfig
from diagembed.evalkit import CaseGenSpec, PretrainConfig, SweepSpec, generate_cases, run_prediction_sweep
from diagembed.synth import SynthSpec, synth_network
from diagembed.walker import WalkParams

net, _ = synth_network(SynthSpec(groups=4, diseases_per_group=4, names_per_group=10))

# a few generated cases: a disease and up to h of its symptom occurrences
for case in generate_cases(net, CaseGenSpec(n=1, h=4), np.random.default_rng(0))[:3]:
    print(net.keys[case.disease], [net.keys[s] for s in case.symptoms])

pretrain = PretrainConfig(walk=WalkParams(r=10, l=40), embed=EmbedConfig(dim=32, pairs=200_000))
sweep = SweepSpec([0, 20, 50], repeats=3, seed=0)
for method in ("none", "metapath"):
    for row in run_prediction_sweep(net, method, sweep, pretrain=pretrain):
        print(f"{method:>9} alpha={row.level:>2}  micro {row.f1_micro:.3f} +- {row.f1_micro_std:.3f}")
