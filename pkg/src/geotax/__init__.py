"""geotax: geometric fidelity auditing for learned embeddings of
continuous systems.

A library + CLI implementing a stability harness over model-agnostic
embedding files: RDM similarity and split metrics, Procrustes spin tests,
Lipschitz walk profiles, MINE mutual information with bias correction,
vector-quantization rate-distortion sweeps, and sequence-texture controls.
"""

__version__ = "0.1.0"
