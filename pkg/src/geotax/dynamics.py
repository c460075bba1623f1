"""Synthetic dynamical systems, two-pass global discretization, and
dynamical-fidelity checks (largest Lyapunov exponent, butterfly test).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core.rng import SeedSpec, rng_create
from .core.sequence import SymbolSequence, bins_alphabet
from .errors import (
    BlowUpError,
    DataError,
    DegenerateRangeError,
    SaturatedTooEarlyError,
)

# Canonical Lorenz-63 parameters.  The source material never states them;
# these values are recorded in every report header.
LORENZ_SIGMA = 10.0
LORENZ_RHO = 28.0
LORENZ_BETA = 8.0 / 3.0
LORENZ_DT = 0.01
LORENZ_TRANSIENT = 1000
BLOWUP_LIMIT = 1e6


@dataclass(frozen=True)
class OscillatorParams:
    """Damped harmonic oscillator x(t) = A exp(-gamma t) cos(omega t + phi)."""

    amplitude: float
    damping: float
    omega: float
    phase: float


def sample_oscillator_params(rng: np.random.Generator) -> OscillatorParams:
    """Draw parameters from the standard training ranges."""
    return OscillatorParams(
        amplitude=rng.uniform(0.5, 2.0),
        damping=rng.uniform(0.2, 2.0),
        omega=rng.uniform(2.0, 20.0),
        phase=rng.uniform(0.0, 2.0 * np.pi),
    )


@dataclass(frozen=True)
class Trajectory:
    """T x m continuous time series with sample interval dt."""

    values: np.ndarray
    dt: float
    system: str = "generic"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] < 2:
            raise DataError("trajectory needs at least 2 samples")
        if not np.isfinite(vals).all():
            raise DataError("trajectory contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GlobalRange:
    """Dataset-wide per-channel min/max, computed in a first pass so the
    same physical state maps to the same bin across all sequences."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.minimum, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.maximum, dtype=np.float64))
        if lo.shape != hi.shape:
            raise DataError("range min/max shape mismatch")
        if not (hi > lo).all():
            raise DegenerateRangeError("max must exceed min in every channel")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    @property
    def width(self) -> np.ndarray:
        return self.maximum - self.minimum


def time_grid(n_steps: int, t_span: tuple[float, float]) -> np.ndarray:
    t0, t1 = t_span
    return t0 + (t1 - t0) * np.arange(n_steps) / n_steps


def gen_oscillator(
    params: OscillatorParams,
    n_steps: int = 512,
    t_span: tuple[float, float] = (0.0, 4.0),
) -> Trajectory:
    t = time_grid(n_steps, t_span)
    x = params.amplitude * np.exp(-params.damping * t) * np.cos(params.omega * t + params.phase)
    dt = (t_span[1] - t_span[0]) / n_steps
    return Trajectory(x, dt, "oscillator", {"params": params})


def waveform_from_components(
    amplitudes: Sequence[float],
    omegas: Sequence[float],
    phases: Sequence[float],
    n_steps: int = 512,
    t_span: tuple[float, float] = (0.0, 4.0),
) -> Trajectory:
    t = time_grid(n_steps, t_span)
    x = np.zeros_like(t)
    for a, w, p in zip(amplitudes, omegas, phases):
        x += a * np.cos(w * t + p)
    dt = (t_span[1] - t_span[0]) / n_steps
    return Trajectory(x, dt, "waveform")


def gen_waveform(
    spec: SeedSpec | int,
    n_components: int = 3,
    n_steps: int = 512,
    t_span: tuple[float, float] = (0.0, 4.0),
) -> Trajectory:
    """Superposed sines with per-component amplitude/frequency/phase drawn
    from the oscillator ranges, without damping."""
    rng = rng_create(spec)
    amps = rng.uniform(0.5, 2.0, size=n_components)
    omegas = rng.uniform(2.0, 20.0, size=n_components)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_components)
    traj = waveform_from_components(amps, omegas, phases, n_steps, t_span)
    traj.meta["n_components"] = n_components
    return traj


def _lorenz_deriv(state: np.ndarray) -> np.ndarray:
    x, y, z = state
    return np.array(
        [
            LORENZ_SIGMA * (y - x),
            x * (LORENZ_RHO - z) - y,
            x * y - LORENZ_BETA * z,
        ]
    )


def _rk4_step(state: np.ndarray, dt: float) -> np.ndarray:
    k1 = _lorenz_deriv(state)
    k2 = _lorenz_deriv(state + 0.5 * dt * k1)
    k3 = _lorenz_deriv(state + 0.5 * dt * k2)
    k4 = _lorenz_deriv(state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_lorenz(state: np.ndarray, n_steps: int, dt: float) -> np.ndarray:
    out = np.empty((n_steps, 3))
    for i in range(n_steps):
        out[i] = state
        state = _rk4_step(state, dt)
        if np.abs(state).max() > BLOWUP_LIMIT:
            raise BlowUpError(f"lorenz integration diverged at step {i}")
    return out


def lorenz_initial_state(spec: SeedSpec | int) -> np.ndarray:
    """On-attractor state: randomly perturbed IC plus a discarded transient."""
    rng = rng_create(spec if isinstance(spec, SeedSpec) else SeedSpec(spec))
    state = np.array([1.0, 1.0, 1.0]) + rng.uniform(-0.5, 0.5, size=3)
    for _ in range(LORENZ_TRANSIENT):
        state = _rk4_step(state, LORENZ_DT)
    return state


def gen_lorenz(spec: SeedSpec | int, n_steps: int = 512, dt: float = LORENZ_DT) -> Trajectory:
    if dt > 0.02:
        raise DataError("dt must be <= 0.02 for a faithful RK4 Lorenz integration")
    state = lorenz_initial_state(spec)
    return Trajectory(_integrate_lorenz(state, n_steps, dt), dt, "lorenz")


def lorenz_twins(
    spec: SeedSpec | int,
    n_steps: int,
    dt: float = LORENZ_DT,
    delta: float = 1e-9,
) -> tuple[Trajectory, Trajectory]:
    """Two trajectories from the same on-attractor state, offset by delta in x."""
    if dt > 0.02:
        raise DataError("dt must be <= 0.02 for a faithful RK4 Lorenz integration")
    state = lorenz_initial_state(spec)
    a = Trajectory(_integrate_lorenz(state.copy(), n_steps, dt), dt, "lorenz")
    state[0] += delta
    b = Trajectory(_integrate_lorenz(state, n_steps, dt), dt, "lorenz")
    return a, b


# -- two-pass discretization ---------------------------------------------


def fit_global_range(dataset: Sequence[Trajectory]) -> GlobalRange:
    """Exact per-channel envelope over the whole dataset (pass one)."""
    if not dataset:
        raise DataError("empty dataset")
    lo = np.min([t.values.min(axis=0) for t in dataset], axis=0)
    hi = np.max([t.values.max(axis=0) for t in dataset], axis=0)
    return GlobalRange(lo, hi)


def discretize(traj: Trajectory, grange: GlobalRange, n_bins: int = 256) -> SymbolSequence:
    """Uniform binning: bin(v) = clamp(floor((v-min)/(max-min)*n_bins), 0, n_bins-1).

    Out-of-range values clamp rather than error: perturbed continuous values
    may exceed the envelope the range was fit on.  Multichannel trajectories
    flatten row-major (time-major) into one symbol stream.
    """
    if grange.minimum.shape[0] != traj.channels:
        raise DataError("range channel count does not match trajectory")
    scaled = (traj.values - grange.minimum) / grange.width * n_bins
    bins = np.clip(np.floor(scaled), 0, n_bins - 1).astype(np.int64)
    seq = SymbolSequence(bins.reshape(-1), bins_alphabet(n_bins))
    seq.meta["channels"] = traj.channels
    seq.meta["dt"] = traj.dt
    return seq


def undiscretize(
    seq: SymbolSequence, grange: GlobalRange, n_bins: int = 256, channels: int | None = None
) -> Trajectory:
    """Map bins back to bin centers (inverse up to half a bin width)."""
    m = channels or seq.meta.get("channels", 1)
    vals = seq.symbols.reshape(-1, m).astype(np.float64)
    centers = grange.minimum + (vals + 0.5) / n_bins * grange.width
    return Trajectory(centers, float(seq.meta.get("dt", 1.0)), "reconstructed")


# -- dynamical fidelity ----------------------------------------------------

LLE_MIN_WINDOW = 50
_SEP_FLOOR = 1e-300


@dataclass(frozen=True)
class LLEResult:
    lle: float                  # per unit time
    window: tuple[int, int]     # fitted step range [start, end)
    log_separation: np.ndarray


def estimate_lle(traj_a: Trajectory, traj_b: Trajectory) -> LLEResult:
    """Largest Lyapunov exponent from twin trajectories.

    The estimate is the least-squares slope of log separation versus time
    over the pre-saturation window.  Identical trajectories give exactly 0
    (the floored separation is constant).
    """
    if traj_a.values.shape != traj_b.values.shape:
        raise DataError("twin trajectories must share shape")
    if traj_a.dt != traj_b.dt:
        raise DataError("twin trajectories must share dt")
    sep = np.linalg.norm(traj_a.values - traj_b.values, axis=1)
    sep = np.maximum(sep, _SEP_FLOOR)
    log_sep = np.log(sep)
    sep_max = sep.max()
    if sep_max <= 2.0 * sep[0]:
        # no meaningful growth (contracting or flat twins): fit everything
        end = sep.size
    else:
        end = int(np.argmax(sep >= 0.1 * sep_max)) + 1
        end = max(end, 2)
    if end < LLE_MIN_WINDOW:
        raise SaturatedTooEarlyError(
            f"linear window {end} steps < {LLE_MIN_WINDOW}; reduce the initial offset"
        )
    if np.ptp(log_sep[:end]) == 0.0:
        return LLEResult(0.0, (0, end), log_sep)   # constant separation
    t = np.arange(end) * traj_a.dt
    slope = np.polyfit(t, log_sep[:end], 1)[0]
    return LLEResult(float(slope), (0, end), log_sep)


@dataclass(frozen=True)
class ButterflyResult:
    passed: bool
    bounds_ok: bool
    n_lobe_switches: int
    mean_dwell_steps: float
    min_lobe_occupancy: float
    mean_z_at_switch: float


# Attractor envelope from a long canonical reference integration.
BUTTERFLY_BOUNDS = {"x": 25.0, "y": 30.0, "z": (0.0, 55.0)}
BUTTERFLY_MIN_SWITCHES = 3
BUTTERFLY_MIN_DWELL = 10.0      # steps; noise alternates every ~2
BUTTERFLY_MIN_OCCUPANCY = 0.1
BUTTERFLY_Z_SWITCH = 10.0


def butterfly_test(traj: Trajectory) -> ButterflyResult:
    """Structural check that a 3-channel series lives on the two-lobe attractor.

    Pass requires the attractor envelope to hold and lobe alternation
    statistics consistent with chaotic switching: several sign changes of x,
    long dwell within a lobe, both lobes visited, switches at elevated z.
    """
    if traj.channels != 3:
        raise DataError("butterfly test expects a 3-channel trajectory")
    x, y, z = traj.values.T
    bounds_ok = bool(
        (np.abs(x) < BUTTERFLY_BOUNDS["x"]).all()
        and (np.abs(y) < BUTTERFLY_BOUNDS["y"]).all()
        and (z > BUTTERFLY_BOUNDS["z"][0]).all()
        and (z < BUTTERFLY_BOUNDS["z"][1]).all()
    )
    sign = np.sign(x)
    sign[sign == 0] = 1
    switches = np.nonzero(np.diff(sign) != 0)[0]
    n_switch = int(switches.size)
    if n_switch:
        dwell = float(np.mean(np.diff(np.concatenate([[0], switches, [x.size - 1]]))))
        z_at = float(np.mean(z[switches]))
    else:
        dwell = float(x.size)
        z_at = 0.0
    occupancy = float(min((sign > 0).mean(), (sign < 0).mean()))
    passed = (
        bounds_ok
        and n_switch >= BUTTERFLY_MIN_SWITCHES
        and dwell >= BUTTERFLY_MIN_DWELL
        and occupancy >= BUTTERFLY_MIN_OCCUPANCY
        and z_at > BUTTERFLY_Z_SWITCH
    )
    return ButterflyResult(passed, bounds_ok, n_switch, dwell, occupancy, z_at)
