"""Representation learning on heterogeneous diagnostic networks."""
from .diagnet import (D, N, S, W, EdgeType, HetNet, NodeType, Triplet, build_network, load_triplets,
                      neighbors_of_type, network_stats, trim_network)
from .embed import EmbedConfig, EmbeddingModel, RmsProp, TrainingError, train_embeddings
from .evalkit import (CaseGenSpec, MetricRow, PretrainConfig, SweepSpec, f1_scores, generate_cases,
                      run_classification_sweep, run_prediction_sweep)
from .synth import SynthSpec, synth_network
from .taskheads import ClassifierModel, HeadConfig, LabeledNode, PatientCase, PredictorModel
from .walker import MetaPath, MetaPaths, Node2vec, WalkParams, extract_skipgrams, generate_corpus

__version__ = "0.1.0"
