"""
Node classification with missing labels
=======================================

Compare a randomly initialised embedding layer against multi-meta-path
pretraining as more training labels are withheld.
"""
from diagembed.embed import EmbedConfig
from diagembed.evalkit import PretrainConfig, SweepSpec, run_classification_sweep
from diagembed.synth import SynthSpec, synth_network
from diagembed.taskheads import HeadConfig
from diagembed.walker import WalkParams

net, labels = synth_network(SynthSpec(groups=5, diseases_per_group=4, names_per_group=10))
print(len(labels), "labelled nodes")

# a lighter pretraining budget than the defaults keeps this quick
pretrain = PretrainConfig(walk=WalkParams(r=10, l=40), embed=EmbedConfig(dim=32, pairs=200_000))
sweep = SweepSpec([0, 50, 90], seed=1)

for method in ("none", "multimetapath"):
    for row in run_classification_sweep(net, labels, method, sweep, pretrain, HeadConfig(epochs=5)):
        print(f"{method:>14} {row.level:>3}%  micro {row.f1_micro:.3f}  macro {row.f1_macro:.3f}")
