"""Ground-truth compositional features for MI estimation.

DNA: GC content plus 16 dinucleotide frequencies (normalized by L - 1).
Protein: 20 amino acid frequencies, normalized length L/1000, net charge
per residue (K + R - D - E)/L, mean Kyte-Doolittle hydropathy, and a
2-dimensional one-hot species indicator.
"""

from __future__ import annotations

import numpy as np

from ..core.sequence import DNA, PROTEIN, PROTEIN_LETTERS, SymbolSequence
from ..errors import BadBaseError, BadResidueError, DataError

# Kyte & Doolittle hydropathy index, standard published scale.
KYTE_DOOLITTLE = {
    "A": 1.8, "C": 2.5, "D": -3.5, "E": -3.5, "F": 2.8,
    "G": -0.4, "H": -3.2, "I": 4.5, "K": -3.9, "L": 3.8,
    "M": 1.9, "N": -3.5, "P": -1.6, "Q": -3.5, "R": -4.5,
    "S": -0.8, "T": -0.7, "V": 4.2, "W": -0.9, "Y": -1.3,
}
_KD_VECTOR = np.array([KYTE_DOOLITTLE[a] for a in PROTEIN_LETTERS])

DNA_FEATURE_DIM = 17
PROTEIN_FEATURE_DIM = 25


def _dna_indices(seq: SymbolSequence | str) -> np.ndarray:
    if isinstance(seq, str):
        seq = SymbolSequence.from_string(seq, DNA)
    if seq.alphabet.name != "dna":
        raise BadBaseError("DNA features need the DNA alphabet")
    return seq.symbols


def dna_features(seq: SymbolSequence | str) -> np.ndarray:
    """17-vector: GC content then dinucleotide frequencies in AA..TT order."""
    idx = _dna_indices(seq)
    n = idx.size
    if n < 2:
        raise DataError("need at least 2 bases")
    gc = float(((idx == 1) | (idx == 2)).mean())  # C or G
    pair_rank = idx[:-1] * 4 + idx[1:]
    counts = np.bincount(pair_rank, minlength=16).astype(np.float64)
    return np.concatenate([[gc], counts / (n - 1)])


def features_from_fasta(path, kind: str = "dna", species: int = 0) -> np.ndarray:
    """Compositional feature matrix for every record in a FASTA file."""
    from ..ingest.fasta import parse_fasta

    records = parse_fasta(path)
    if kind == "dna":
        return np.vstack([dna_features(r.sequence.upper()) for r in records])
    if kind == "protein":
        return np.vstack(
            [protein_features(r.sequence.upper(), species) for r in records]
        )
    raise DataError(f"unknown feature kind {kind!r}")


def protein_features(seq: SymbolSequence | str, species: int = 0) -> np.ndarray:
    """25-vector of compositional protein features (see module docstring)."""
    if isinstance(seq, str):
        seq = SymbolSequence.from_string(seq, PROTEIN)
    if seq.alphabet.name != "protein":
        raise BadResidueError("protein features need the protein alphabet")
    if species not in (0, 1):
        raise DataError("species indicator must be 0 or 1")
    idx = seq.symbols
    n = idx.size
    if n < 1:
        raise DataError("empty sequence")
    freqs = np.bincount(idx, minlength=20).astype(np.float64) / n
    k = PROTEIN_LETTERS.index("K")
    r = PROTEIN_LETTERS.index("R")
    d = PROTEIN_LETTERS.index("D")
    e = PROTEIN_LETTERS.index("E")
    counts = np.bincount(idx, minlength=20)
    net_charge = float(counts[k] + counts[r] - counts[d] - counts[e]) / n
    hydropathy = float(freqs @ _KD_VECTOR)
    onehot = np.zeros(2)
    onehot[species] = 1.0
    return np.concatenate([freqs, [n / 1000.0, net_charge, hydropathy], onehot])
