"""Classical per-spin dephasing noise.

The noise enters the Hamiltonian as sum_i beta_i(t) Iz^i.  Three processes
are supported, all Gaussian (or asymptotically Gaussian) with rms amplitude
``b`` in rad/s:

* ``static_gaussian``  -- one constant offset per trajectory, N(0, b^2);
* ``ornstein_uhlenbeck`` -- autocorrelation C(t) = b^2 exp(-|t|/tau_c),
  sampled by its exact Gauss-Markov update (no Euler bias);
* ``hard_cutoff`` -- a sum of random-phase cosines with a flat spectrum on
  [0, omega_cutoff].

Spectral-density convention (the single place it is fixed): S(omega) is
one-sided and normalised so that integral_0^inf S(omega) d omega = b^2 / 2,
equivalently C(t) = 2 integral_0^inf S(omega) cos(omega t) d omega.  For the
Ornstein-Uhlenbeck process S(omega) = b^2 tau_c / (pi (1 + omega^2 tau_c^2));
for the hard cutoff S(omega) = b^2 / (2 omega_cutoff) on [0, omega_cutoff].
The filter-function attenuation in :mod:`spindd.filters` uses the same
convention, which is what makes the Monte-Carlo and analytic results agree.

Randomness is reproducible: trajectory k of a run draws from a stream keyed
by (seed, stream, k), so serial and parallel execution agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOISE_KINDS = ("none", "static_gaussian", "ornstein_uhlenbeck", "hard_cutoff")

# Number of cosine modes used to synthesise the hard-cutoff bath.
HARD_CUTOFF_MODES = 128


@dataclass(frozen=True)
class NoiseModel:
    """Per-spin classical dephasing process."""

    kind: str = "none"
    b: float = 0.0                 # rms amplitude, rad/s
    tau_c: float | None = None     # correlation time, s (OU only)
    cutoff: float | None = None    # omega_cutoff, rad/s (hard_cutoff only)
    seed: int = 0
    correlated_across_spins: bool = False

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {NOISE_KINDS}")
        if self.b < 0.0:
            raise ValueError("rms amplitude b must be >= 0")
        if self.kind == "ornstein_uhlenbeck" and (self.tau_c is None or self.tau_c <= 0.0):
            raise ValueError("Ornstein-Uhlenbeck noise needs tau_c > 0")
        if self.kind == "hard_cutoff" and (self.cutoff is None or self.cutoff <= 0.0):
            raise ValueError("hard-cutoff noise needs cutoff > 0")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(kind="none")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.b > 0.0


@dataclass(frozen=True)
class NoiseTrajectory:
    """Piecewise-constant sample path on a uniform grid.

    ``values[k, i]`` is beta_i(t) on [edges[k], edges[k+1]).
    """

    edges: np.ndarray      # (n_cells + 1,)
    values: np.ndarray     # (n_cells, M)
    dt: float


def spectral_density(model: NoiseModel, omega) -> np.ndarray:
    """One-sided spectral density S(omega) for processes that have one."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("omega must be >= 0")
    if model.kind == "ornstein_uhlenbeck":
        return model.b**2 * model.tau_c / (math.pi * (1.0 + (w * model.tau_c) ** 2))
    if model.kind == "hard_cutoff":
        return np.where(w <= model.cutoff, model.b**2 / (2.0 * model.cutoff), 0.0)
    raise ValueError(f"{model.kind!r} noise has no finite spectral density")


def default_dt(model: NoiseModel, seq=None, min_event: float | None = None) -> float | None:
    """Grid step for trajectory sampling.

    The smaller of tau_c/10 (OU), a tenth of the cutoff period (hard cutoff),
    and a quarter of the shortest nonzero event duration when a sequence is
    supplied.  Returns None when the noise needs no grid (none/static).
    """
    if model.kind in ("none", "static_gaussian"):
        return None
    candidates = []
    if model.kind == "ornstein_uhlenbeck":
        candidates.append(model.tau_c / 10.0)
    if model.kind == "hard_cutoff":
        candidates.append(2.0 * math.pi / model.cutoff / 10.0)
    if seq is not None:
        durations = [ev.duration for ev in seq.events if ev.duration > 0.0]
        if durations:
            candidates.append(min(durations) / 4.0)
    if min_event is not None and min_event > 0.0:
        candidates.append(min_event / 4.0)
    return min(candidates)


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent per-trajectory generator derived from (seed, stream, index)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(stream, index))))


def _n_channels(model: NoiseModel, spins: int) -> int:
    return 1 if model.correlated_across_spins else spins


def sample_trajectory(model: NoiseModel, total_duration: float, dt: float, spins: int,
                      trajectory_index: int = 0) -> NoiseTrajectory:
    """One trajectory on a uniform grid covering [0, total_duration]."""
    if total_duration <= 0.0:
        raise ValueError("total_duration must be > 0")
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    n_cells = max(1, int(math.ceil(total_duration / dt)))
    edges = np.minimum(np.arange(n_cells + 1) * dt, total_duration)
    values = sample_on_partition(model, edges, spins, n_traj=1,
                                 stream=0, first_index=trajectory_index)[0]
    return NoiseTrajectory(edges=edges, values=values, dt=dt)


def sample_ensemble(model: NoiseModel, total_duration: float, dt: float, spins: int,
                    n_traj: int) -> np.ndarray:
    """Stack of trajectories, shape (n_traj, n_cells, M)."""
    n_cells = max(1, int(math.ceil(total_duration / dt)))
    edges = np.minimum(np.arange(n_cells + 1) * dt, total_duration)
    return sample_on_partition(model, edges, spins, n_traj=n_traj, stream=0)


def sample_on_partition(model: NoiseModel, edges: np.ndarray, spins: int, n_traj: int,
                        stream: int = 0, first_index: int = 0) -> np.ndarray:
    """Sample beta on an arbitrary time partition, shape (n_traj, n_cells, M).

    The value on cell k is: the exact OU state at the cell's left edge
    (the Gauss-Markov update is exact for uneven steps), the mode sum at the
    cell midpoint (hard cutoff), or the per-trajectory constant (static).
    """
    edges = np.asarray(edges, dtype=float)
    n_cells = len(edges) - 1
    ch = _n_channels(model, spins)
    if model.kind == "none" or model.b == 0.0:
        return np.zeros((n_traj, n_cells, spins))

    out = np.empty((n_traj, n_cells, ch))
    if model.kind == "static_gaussian":
        draws = np.empty((n_traj, ch))
        for k in range(n_traj):
            draws[k] = _rng(model.seed, stream, first_index + k).standard_normal(ch)
        out[:] = model.b * draws[:, None, :]
    elif model.kind == "ornstein_uhlenbeck":
        normals = np.empty((n_traj, n_cells, ch))
        for k in range(n_traj):
            normals[k] = _rng(model.seed, stream, first_index + k).standard_normal((n_cells, ch))
        steps = np.diff(edges)
        decay = np.exp(-steps / model.tau_c)
        kick = model.b * np.sqrt(1.0 - decay**2)
        # Stationary start at the first edge, then exact updates to each
        # subsequent left edge; cell 0 uses the initial state itself.
        state = model.b * normals[:, 0, :]
        out[:, 0, :] = state
        for c in range(1, n_cells):
            state = state * decay[c - 1] + kick[c - 1] * normals[:, c, :]
            out[:, c, :] = state
    else:  # hard_cutoff
        mids = 0.5 * (edges[:-1] + edges[1:])
        amp = model.b * math.sqrt(2.0 / HARD_CUTOFF_MODES)
        for k in range(n_traj):
            rng = _rng(model.seed, stream, first_index + k)
            omegas = rng.uniform(0.0, model.cutoff, size=(HARD_CUTOFF_MODES, ch))
            phases = rng.uniform(0.0, 2.0 * math.pi, size=(HARD_CUTOFF_MODES, ch))
            # (n_cells, modes, ch) -> summed over modes
            phase_arg = mids[:, None, None] * omegas[None, :, :] + phases[None, :, :]
            out[k] = amp * np.cos(phase_arg).sum(axis=1)

    if ch == 1 and spins > 1:
        out = np.broadcast_to(out, (n_traj, n_cells, spins)).copy()
    return out


def calibrated_rms(t2: float) -> float:
    """rms amplitude giving a quasi-static free-induction 1/e time of t2.

    The quasi-static Gaussian decay is exp(-b^2 t^2 / 2), so b = sqrt(2)/t2.
    """
    return math.sqrt(2.0) / t2
