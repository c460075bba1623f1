"""Perturbation suite: value noise, time reversal, symbol substitution,
reverse complement, and random padding for context-tax tests.

Every rate-based perturbation touches exactly ceil(rate * L) positions,
chosen without replacement, so "1% noise" on a 512-step series perturbs
exactly 6 positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.rng import SeedSpec, rng_create
from .core.sequence import DNA, SymbolSequence
from .dynamics import GlobalRange, Trajectory
from .errors import (
    AlphabetTooSmallError,
    BadBaseError,
    DataError,
    TargetTooShortError,
)

STANDARD_RATES = (0.01, 0.02, 0.05, 0.10)


@dataclass(frozen=True)
class PerturbationSpec:
    """What to do, how much of the input to touch, and under which seed."""

    kind: str                    # value_noise | time_reverse | substitute |
                                 # reverse_complement | reverse | pad
    rate: float = 0.0            # fraction of positions in [0, 1]
    magnitude: float = 1.0       # noise scale (fraction of global range)
    seed: SeedSpec = SeedSpec()

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise DataError("rate must lie in [0, 1]")


def n_positions(rate: float, length: int) -> int:
    """Ceiling convention: 1% of 512 perturbs 6 positions."""
    return min(length, math.ceil(rate * length))


def spec_to_config(spec: PerturbationSpec) -> dict[str, str]:
    """Flatten a spec into key=value pairs for sidecar/config files."""
    return {
        "perturb.kind": spec.kind,
        "perturb.rate": repr(spec.rate),
        "perturb.magnitude": repr(spec.magnitude),
        "perturb.seed": str(spec.seed.seed),
        "perturb.stream": spec.seed.stream,
    }


def spec_from_config(values: dict[str, str]) -> PerturbationSpec:
    return PerturbationSpec(
        kind=values["perturb.kind"],
        rate=float(values.get("perturb.rate", 0.0)),
        magnitude=float(values.get("perturb.magnitude", 1.0)),
        seed=SeedSpec(int(values.get("perturb.seed", 320)),
                      values.get("perturb.stream", "main")),
    )


def value_noise(
    traj: Trajectory, spec: PerturbationSpec, grange: GlobalRange | None = None
) -> Trajectory:
    """Additive Gaussian noise at ceil(rate*T) time positions.

    Noise sigma is magnitude * global range width per channel, so "1% noise"
    is comparable across datasets.  Without an explicit range the
    trajectory's own envelope is used.
    """
    count = n_positions(spec.rate, traj.length)
    if count == 0 or spec.magnitude == 0.0:
        return Trajectory(traj.values, traj.dt, traj.system, dict(traj.meta))
    if grange is None:
        width = np.ptp(traj.values, axis=0)
        width[width == 0] = 1.0
    else:
        if grange.minimum.shape[0] != traj.channels:
            raise DataError("range channel count does not match trajectory")
        width = grange.width
    rng = rng_create(spec.seed.derive("value-noise"))
    pos = rng.choice(traj.length, size=count, replace=False)
    out = traj.values.copy()
    out[pos] += rng.standard_normal((count, traj.channels)) * spec.magnitude * width
    meta = dict(traj.meta)
    meta["perturbed_positions"] = np.sort(pos).tolist()
    return Trajectory(out, traj.dt, traj.system, meta)


def substitute(seq: SymbolSequence, spec: PerturbationSpec) -> SymbolSequence:
    """Replace ceil(rate*L) positions by a uniformly random different symbol."""
    if seq.alphabet.size < 2:
        raise AlphabetTooSmallError("substitution needs an alphabet of size >= 2")
    count = n_positions(spec.rate, len(seq))
    if count == 0:
        return seq.replace(seq.symbols)
    rng = rng_create(spec.seed.derive("substitute"))
    pos = rng.choice(len(seq), size=count, replace=False)
    out = seq.symbols.copy()
    # draw from size-1 alternatives, then shift past the original symbol
    draw = rng.integers(0, seq.alphabet.size - 1, size=count)
    out[pos] = np.where(draw >= out[pos], draw + 1, draw)
    new = seq.replace(out)
    new.meta["perturbed_positions"] = np.sort(pos).tolist()
    return new


_DNA_COMPLEMENT = np.array([3, 2, 1, 0], dtype=np.int64)  # A<->T, C<->G


def complement(seq: SymbolSequence) -> SymbolSequence:
    if seq.alphabet.name != "dna":
        raise BadBaseError("complement defined for the DNA alphabet only")
    return seq.replace(_DNA_COMPLEMENT[seq.symbols])


def reverse_complement(seq: SymbolSequence) -> SymbolSequence:
    """Reverse order then complement each base; an involution."""
    if seq.alphabet.name != "dna":
        raise BadBaseError("reverse complement defined for the DNA alphabet only")
    return seq.replace(_DNA_COMPLEMENT[seq.symbols[::-1]])


def time_reverse(x: Trajectory | SymbolSequence):
    """Index reversal; involutive; works on either input type."""
    if isinstance(x, Trajectory):
        return Trajectory(x.values[::-1], x.dt, x.system, dict(x.meta))
    return x.replace(x.symbols[::-1])


@dataclass(frozen=True)
class PaddedSequence:
    sequence: SymbolSequence
    signal_start: int
    signal_length: int


def pad_random(
    seq: SymbolSequence, target_len: int, side: str = "right", seed: SeedSpec = SeedSpec()
) -> PaddedSequence:
    """Pad with i.i.d. uniform symbols to target_len, preserving the signal
    region verbatim at a recorded offset.  side: left | right | both."""
    if target_len < len(seq):
        raise TargetTooShortError(f"target {target_len} < sequence length {len(seq)}")
    extra = target_len - len(seq)
    if side == "left":
        left = extra
    elif side == "right":
        left = 0
    elif side == "both":
        left = extra // 2
    else:
        raise DataError(f"unknown pad side {side!r}")
    right = extra - left
    rng = rng_create(seed.derive("pad"))
    pad = rng.integers(0, seq.alphabet.size, size=extra)
    out = np.concatenate([pad[:left], seq.symbols, pad[left:]])
    return PaddedSequence(seq.replace(out), left, len(seq))


def apply_perturbation(
    x: Trajectory | SymbolSequence,
    spec: PerturbationSpec,
    grange: GlobalRange | None = None,
):
    """Dispatch a spec onto the matching operation."""
    kind = spec.kind
    if kind == "value_noise":
        if not isinstance(x, Trajectory):
            raise DataError("value_noise needs a continuous trajectory")
        return value_noise(x, spec, grange)
    if kind in ("time_reverse", "reverse"):
        return time_reverse(x)
    if kind == "substitute":
        if not isinstance(x, SymbolSequence):
            raise DataError("substitute needs a symbol sequence")
        return substitute(x, spec)
    if kind == "reverse_complement":
        if not isinstance(x, SymbolSequence):
            raise DataError("reverse_complement needs a symbol sequence")
        return reverse_complement(x)
    raise DataError(f"unknown perturbation kind {kind!r}")
