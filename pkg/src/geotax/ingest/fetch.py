"""Genome sequence acquisition with caching and an injectable transport.

The HTTP layer is a plain callable ``transport(url) -> (status, bytes)``
so tests run against recorded responses; no live network is touched in
CI.  Fetched spans are cached on disk keyed by the canonical parameter
hash, and a synthetic source provides deterministic sequences offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core.rng import SeedSpec, rng_create
from ..core.sequence import DNA, SymbolSequence
from ..errors import (
    ConfigError,
    DataError,
    HttpError,
    RangeUnavailableError,
    TooManyAmbiguousError,
)
from .cache import ResultCache, cache_key

GENOME_API = "https://api.genome.ucsc.edu/getData/sequence"
MAX_N_FRACTION = 0.05
TELOMERIC_MARGIN = 0.10

Transport = Callable[[str], tuple[int, bytes]]


@dataclass(frozen=True)
class FetchSpec:
    """Where a sequence comes from and how ambiguity is handled."""

    source: str = "genome-rest"        # genome-rest | local-fasta | synthetic
    assembly: str = "hg38"
    chromosome: str = "chr22"
    start: int = 0
    end: int = 0
    max_n_fraction: float = MAX_N_FRACTION
    n_policy: str = "reject"           # reject | replace
    seed: SeedSpec = field(default_factory=SeedSpec)

    def __post_init__(self):
        if self.source in ("genome-rest",) and self.end <= self.start:
            raise ConfigError("fetch span needs end > start")
        if not 0.0 <= self.max_n_fraction <= 1.0:
            raise ConfigError("max_n_fraction must lie in [0, 1]")
        if self.n_policy not in ("reject", "replace"):
            raise ConfigError("n_policy must be 'reject' or 'replace'")

    @property
    def length(self) -> int:
        return self.end - self.start


def default_transport(url: str) -> tuple[int, bytes]:
    import requests

    resp = requests.get(url, timeout=60)
    return resp.status_code, resp.content


def _apply_n_policy(text: str, spec: FetchSpec) -> SymbolSequence:
    text = text.upper()
    n_count = sum(1 for ch in text if ch not in "ACGT")
    if n_count:
        frac = n_count / len(text)
        if spec.n_policy == "reject" and frac > spec.max_n_fraction:
            raise TooManyAmbiguousError(
                f"{frac:.1%} ambiguous bases exceeds the {spec.max_n_fraction:.0%} budget"
            )
        rng = rng_create(spec.seed.derive("n-replace"))
        letters = list(text)
        for i, ch in enumerate(letters):
            if ch not in "ACGT":
                letters[i] = "ACGT"[rng.integers(4)]
        text = "".join(letters)
    return SymbolSequence.from_string(text, DNA)


def synthetic_sequence(length: int, seed: SeedSpec) -> SymbolSequence:
    """Deterministic uniform DNA for offline runs."""
    rng = rng_create(seed.derive("synthetic-dna"))
    return SymbolSequence(rng.integers(0, 4, size=length), DNA)


def fetch_genome(
    spec: FetchSpec,
    transport: Transport | None = None,
    cache: ResultCache | None = None,
) -> SymbolSequence:
    """Fetch a genomic span, serving repeats from the on-disk cache.

    The raw remote payload is cached before the N policy applies, so policy
    changes never require refetching.
    """
    if spec.source == "synthetic":
        return synthetic_sequence(max(spec.length, 1), spec.seed)
    if spec.source != "genome-rest":
        raise ConfigError(f"fetch_genome cannot serve source {spec.source!r}")
    key = cache_key(
        "fetch-genome",
        assembly=spec.assembly,
        chromosome=spec.chromosome,
        start=spec.start,
        end=spec.end,
    )
    raw: bytes | None = None
    if cache is not None:
        raw = cache.get(key)
    if raw is None:
        transport = transport or default_transport
        url = (
            f"{GENOME_API}?genome={spec.assembly}"
            f";chrom={spec.chromosome};start={spec.start};end={spec.end}"
        )
        try:
            status, body = transport(url)
        except OSError as exc:  # requests errors subclass IOError
            raise HttpError(f"fetch failed: {exc}") from exc
        if status != 200:
            raise HttpError(f"genome endpoint returned {status}")
        raw = body
        if cache is not None:
            cache.put(key, raw)
    try:
        payload = json.loads(raw.decode("utf-8"))
        text = payload["dna"]
    except (ValueError, KeyError) as exc:
        raise DataError("unrecognized genome endpoint payload") from exc
    if len(text) != spec.length:
        raise RangeUnavailableError(
            f"endpoint served {len(text)} bases for a {spec.length}-base span"
        )
    return _apply_n_policy(text, spec)


def sample_windows(
    chrom_length: int,
    window: int,
    count: int,
    seed: SeedSpec,
    margin: float = TELOMERIC_MARGIN,
) -> list[tuple[int, int]]:
    """Uniform window starts inside the chromosome body, excluding the
    telomeric margins at both ends."""
    if not 0.0 <= margin < 0.5:
        raise ConfigError("margin must lie in [0, 0.5)")
    lo = int(chrom_length * margin)
    hi = int(chrom_length * (1.0 - margin)) - window
    if hi <= lo:
        raise DataError("chromosome too short for the requested window and margin")
    rng = rng_create(seed.derive("windows"))
    starts = np.sort(rng.integers(lo, hi, size=count))
    return [(int(s), int(s) + window) for s in starts]


class RecordingTransport:
    """Test seam: serves canned responses and counts network calls."""

    def __init__(self, responses: dict[str, tuple[int, bytes]] | None = None,
                 default: tuple[int, bytes] | None = None):
        self.responses = responses or {}
        self.default = default
        self.calls: list[str] = []

    def __call__(self, url: str) -> tuple[int, bytes]:
        self.calls.append(url)
        if url in self.responses:
            return self.responses[url]
        if self.default is not None:
            return self.default
        return 404, b"not found"
