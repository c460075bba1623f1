"""Discrete sequences over declared alphabets (DNA, protein, integer bins)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadBaseError, BadResidueError

DNA_LETTERS = "ACGT"
PROTEIN_LETTERS = "ACDEFGHIKLMNPQRSTVWY"


@dataclass(frozen=True)
class Alphabet:
    """A symbol set: named letters (DNA/protein) or anonymous integer bins."""

    name: str
    size: int
    letters: str | None = None

    def __post_init__(self):
        if self.letters is not None and len(self.letters) != self.size:
            raise ValueError("letters length must equal size")

    def index_of(self, ch: str) -> int:
        if self.letters is None or ch not in self.letters:
            err = BadResidueError if self.name == "protein" else BadBaseError
            raise err(f"symbol {ch!r} not in alphabet {self.name}")
        return self.letters.index(ch)


DNA = Alphabet("dna", 4, DNA_LETTERS)
PROTEIN = Alphabet("protein", 20, PROTEIN_LETTERS)


def bins_alphabet(n_bins: int) -> Alphabet:
    return Alphabet(f"bins{n_bins}", n_bins)


@dataclass(frozen=True)
class SymbolSequence:
    """Immutable integer-coded sequence over a declared alphabet."""

    symbols: np.ndarray
    alphabet: Alphabet
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=np.int64)
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)
        if sym.ndim != 1:
            raise ValueError("symbols must be 1-D")
        if sym.size and (sym.min() < 0 or sym.max() >= self.alphabet.size):
            raise BadBaseError("symbol index outside alphabet")

    def __len__(self) -> int:
        return int(self.symbols.size)

    @classmethod
    def from_string(cls, text: str, alphabet: Alphabet = DNA) -> "SymbolSequence":
        if alphabet.letters is None:
            raise ValueError("from_string needs a lettered alphabet")
        lut = np.full(128, -1, dtype=np.int64)
        for i, ch in enumerate(alphabet.letters):
            lut[ord(ch)] = i
        codes = np.frombuffer(text.encode("ascii"), dtype=np.uint8)
        idx = lut[codes]
        if (idx < 0).any():
            bad = text[int(np.argmax(idx < 0))]
            err = BadResidueError if alphabet.name == "protein" else BadBaseError
            raise err(f"symbol {bad!r} not in alphabet {alphabet.name}")
        return cls(idx, alphabet)

    def to_string(self) -> str:
        if self.alphabet.letters is None:
            raise ValueError("alphabet has no letters")
        return "".join(self.alphabet.letters[i] for i in self.symbols)

    def replace(self, symbols: np.ndarray) -> "SymbolSequence":
        return SymbolSequence(symbols, self.alphabet, dict(self.meta))
