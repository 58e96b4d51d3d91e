"""Time evolution through pulse sequences, with Monte-Carlo noise averaging.

A single trajectory evolves as rho -> U rho U^dagger with U the time-ordered
product of piecewise-constant-Hamiltonian exponentials.  During delays the
Hamiltonian is H_Z + H_D plus the dephasing term sum_i beta_i(t) Iz^i; during
a pulse it additionally has 2*pi*a*(cos(phi) Ix_tot + sin(phi) Iy_tot).
Zero-width pulses act as instantaneous collective rotations.

Trajectories are propagated as one stacked array, so the ensemble average is
taken in a fixed order and repeated runs with the same seed are bit-identical.
Events are split exactly at their boundaries; noise values are drawn on the
resulting partition (exactly for the Gauss-Markov process, see
:mod:`spindd.noise`), so short events never force a fine global grid.

With ``ideal_pulses`` set, finite pulses are replaced by an instantaneous
rotation at the pulse centre with free evolution over the nominal width,
which is the standard delta-pulse approximation at fixed total duration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import internal_hamiltonian, zeeman
from .noise import NoiseModel, default_dt, sample_on_partition
from .sequence import DDScheme, PulseSequence, delay, generate, repeat
from .system import (Operator, SpinSystem, State, collective_rotation, thermal_state,
                     total_spin_op)


@dataclass(frozen=True)
class PropagationConfig:
    """Knobs for the Monte-Carlo propagation."""

    n_traj: int = 1
    dt: float | None = None
    ideal_pulses: bool = False
    include_dipolar_during_dd: bool = True

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be > 0")


class GridTooCoarseError(ValueError):
    """An explicit dt fails the noise-resolution rule."""


def _expm_herm(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h via eigendecomposition (unitary to machine precision)."""
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * evals)) @ vecs.conj().T


def _expm_herm_batch(h: np.ndarray, t: float) -> np.ndarray:
    """Batched exp(-i h t) over the leading axis."""
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * evals)[:, None, :]) @ vecs.conj().swapaxes(1, 2)


def _spin_z_diag(sys: SpinSystem, i: int) -> np.ndarray:
    """Diagonal of Iz^i."""
    idx = np.arange(sys.dim, dtype=np.uint64)
    bit = ((idx >> np.uint64(sys.spins - 1 - i)) & np.uint64(1)).astype(float)
    return 0.5 - bit


def _resolve_dt(noise: NoiseModel, cfg: PropagationConfig) -> float | None:
    """Noise-resolution step: the correlation-time rule, or a validated override."""
    auto = default_dt(noise)
    if cfg.dt is None:
        return auto
    if auto is not None and cfg.dt > auto * (1.0 + 1e-12):
        raise GridTooCoarseError(
            f"dt = {cfg.dt:.3g} s is too coarse; the noise model requires dt <= {auto:.3g} s")
    return cfg.dt


def _build_ops(seq: PulseSequence, ideal_pulses: bool, dt_noise: float | None,
               record_after) -> tuple:
    """Flatten a sequence into primitive operations.

    Returns (ops, n_cells): ops is a list of ("step", duration, event, rf_on,
    cell), ("delta", event) and ("record", event_index) items in time order.
    Steps are split exactly at event boundaries and additionally at the lines
    of a uniform master grid of pitch ``dt_noise``; ``cell`` indexes the grid
    cell a step falls in, so noise draws depend only on (seed, stream, grid),
    never on the event layout.  With no grid there is a single cell.
    """
    record_after = set(record_after or ())
    ops = []
    t = 0.0

    def cell_of(a, b):
        return 0 if dt_noise is None else int((a + b) / 2.0 / dt_noise)

    def add_step(t0, duration, ev, rf_on):
        if duration <= 0.0:
            return
        t1 = t0 + duration
        if dt_noise is None:
            ops.append(("step", duration, ev, rf_on, 0))
            return
        lo = t0
        # First grid line strictly inside (t0, t1), guarded against roundoff.
        k = int(math.floor(t0 / dt_noise)) + 1
        while k * dt_noise < t1 - 1e-12 * dt_noise:
            hi = k * dt_noise
            if hi > lo:
                ops.append(("step", hi - lo, ev, rf_on, cell_of(lo, hi)))
                lo = hi
            k += 1
        ops.append(("step", t1 - lo, ev, rf_on, cell_of(lo, t1)))

    if -1 in record_after:
        ops.append(("record", -1))
    for idx, ev in enumerate(seq.events):
        if ev.kind == "delay":
            add_step(t, ev.duration, ev, False)
        elif ev.duration == 0.0:
            ops.append(("delta", ev))
        elif ideal_pulses:
            add_step(t, ev.duration / 2.0, ev, False)
            ops.append(("delta", ev))
            add_step(t + ev.duration / 2.0, ev.duration / 2.0, ev, False)
        else:
            add_step(t, ev.duration, ev, True)
        t += ev.duration
        if idx in record_after:
            ops.append(("record", idx))
    n_cells = 1 if dt_noise is None else max(1, int(math.ceil(t / dt_noise - 1e-9)))
    return ops, n_cells


def _as_matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex)


def propagate_batch(sys: SpinSystem, rho0: State | np.ndarray, seq: PulseSequence,
                    noise: NoiseModel | None = None, cfg: PropagationConfig | None = None,
                    record_after=None, observables: dict | None = None,
                    stream: int = 0):
    """Propagate all trajectories, optionally recording observables mid-sequence.

    Parameters
    ----------
    record_after : iterable of int, optional
        Event indices after which to record; -1 records the initial state.
    observables : dict {name: operator}, optional
        Traces Tr(rho O) recorded per trajectory at each checkpoint.
    stream : int
        Noise sub-stream; distinct runs within one experiment (e.g. the
        points of a phase sweep) use distinct streams.

    Returns
    -------
    rho : ndarray, shape (n_traj, d, d)
        Final per-trajectory states.
    records : dict {event_index: {name: ndarray (n_traj,)}}
    """
    noise = noise or NoiseModel.none()
    cfg = cfg or PropagationConfig()
    if not noise.active and cfg.n_traj != 1:
        raise ValueError("n_traj must be 1 when there is no noise to average over")

    rho_in = rho0.matrix if isinstance(rho0, State) else np.asarray(rho0, dtype=complex)
    d = sys.dim
    if rho_in.shape != (d, d):
        raise ValueError(f"state dimension {rho_in.shape} does not match system dim {d}")

    dt_noise = _resolve_dt(noise, cfg) if noise.active else None
    ops, n_cells = _build_ops(seq, cfg.ideal_pulses, dt_noise, record_after)

    h_free = internal_hamiltonian(sys).matrix
    h_nodip = zeeman(sys).matrix
    ix = total_spin_op(sys, "x").matrix
    iy = total_spin_op(sys, "y").matrix
    iz_diags = np.stack([_spin_z_diag(sys, i) for i in range(sys.spins)])
    obs = {name: _as_matrix(o) for name, o in (observables or {}).items()}

    beta = None
    if noise.active:
        total = seq.total_duration
        if dt_noise is None:
            grid_edges = np.array([0.0, total])
        else:
            grid_edges = np.minimum(np.arange(n_cells + 1) * dt_noise, total)
        beta = sample_on_partition(noise, grid_edges, sys.spins, cfg.n_traj, stream=stream)

    rho = np.broadcast_to(rho_in, (cfg.n_traj, d, d)).copy()
    records: dict = {}
    ucache: dict = {}
    eigcache: dict = {}
    diag_idx = np.arange(d)

    for op in ops:
        if op[0] == "record":
            records[op[1]] = {name: np.einsum("bij,ji->b", rho, o) for name, o in obs.items()}
            continue
        if op[0] == "delta":
            ev = op[1]
            key = ("delta", ev.flip, ev.phase)
            if key not in ucache:
                gen = math.cos(ev.phase) * ix + math.sin(ev.phase) * iy
                ucache[key] = _expm_herm(gen, ev.flip)
            u = ucache[key]
            rho = u @ rho @ u.conj().T
            continue

        _, dur, ev, rf_on, cell = op
        no_dip = ev.tag == "dd" and not cfg.include_dipolar_during_dd
        h = h_nodip if no_dip else h_free
        if rf_on:
            h = h + 2.0 * math.pi * ev.amplitude * (math.cos(ev.phase) * ix
                                                    + math.sin(ev.phase) * iy)
        if beta is None:
            key = ("step", no_dip, rf_on, ev.phase, ev.amplitude, dur)
            if key not in ucache:
                ucache[key] = _expm_herm(h, dur)
            u = ucache[key]
            rho = u @ rho @ u.conj().T
        else:
            noise_diag = beta[:, min(cell, beta.shape[1] - 1), :] @ iz_diags
            if np.count_nonzero(h - np.diag(np.diag(h))) == 0:
                phases = np.exp(-1j * dur * (np.diag(h).real[None, :] + noise_diag))
                rho = phases[:, :, None] * rho * phases.conj()[:, None, :]
            else:
                # The batched eigendecomposition is reused by every step that
                # shares a noise cell and base Hamiltonian (durations differ);
                # the cache is kept tiny since cells are visited in time order.
                key = (cell, no_dip, rf_on, ev.phase, ev.amplitude)
                if key not in eigcache:
                    hb = np.broadcast_to(h, (cfg.n_traj, d, d)).copy()
                    hb[:, diag_idx, diag_idx] += noise_diag
                    if len(eigcache) >= 4:
                        eigcache.pop(next(iter(eigcache)))
                    eigcache[key] = np.linalg.eigh(hb)
                evals, vecs = eigcache[key]
                u = (vecs * np.exp(-1j * dur * evals)[:, None, :]) @ vecs.conj().swapaxes(1, 2)
                rho = u @ rho @ u.conj().swapaxes(1, 2)

    return rho, records


def propagate(rho0: State | np.ndarray, seq: PulseSequence, sys: SpinSystem,
              noise: NoiseModel | None = None, cfg: PropagationConfig | None = None,
              stream: int = 0) -> State:
    """Ensemble-averaged final state."""
    rho, _ = propagate_batch(sys, rho0, seq, noise, cfg, stream=stream)
    avg = rho.mean(axis=0)
    avg = 0.5 * (avg + avg.conj().T)
    scale = rho0.scale if isinstance(rho0, State) else 1.0
    return State(avg, scale=scale)


@dataclass(frozen=True)
class SignalTable:
    """Normalised signal versus time; one row per readout."""

    time_s: np.ndarray
    cycle_index: np.ndarray
    signal: np.ndarray          # |mean|, deterministic frame inversion absorbed
    signal_signed: np.ndarray   # raw signed mean
    stderr: np.ndarray

    def write_csv(self, path):
        from .tables import write_csv
        write_csv(path, ["time_s", "cycle_index", "signal", "stderr"],
                  zip(self.time_s, self.cycle_index.astype(int), self.signal, self.stderr))


def sqc_dd_experiment(sys: SpinSystem, scheme: DDScheme | None, noise: NoiseModel,
                      cfg: PropagationConfig, readout_times=None) -> SignalTable:
    """Single-quantum decay under repeated DD blocks.

    A (pi/2)_y pulse turns the thermal state into transverse magnetisation;
    the signal Tr(rho Ix_tot) is recorded after every DD block (or, for the
    'none' scheme, at the requested readout times) and normalised so
    signal(0) = 1.
    """
    rho0 = thermal_state(sys)
    prep = collective_rotation(sys, math.pi / 2.0, math.pi / 2.0)
    rho0 = State(prep.matrix @ rho0.matrix @ prep.matrix.conj().T)
    ix = total_spin_op(sys, "x").matrix
    ref = float(np.real(np.trace(rho0.matrix @ ix)))

    if scheme is None or scheme.name == "none":
        times = None if readout_times is None else np.sort(np.asarray(readout_times, dtype=float))
        if times is None or times.size == 0:
            if scheme is None:
                raise ValueError("free evolution needs readout_times")
            times = np.array([scheme.duration])
        events = []
        prev = 0.0
        for t in times:
            events.append(delay(t - prev))
            prev = t
        seq = PulseSequence(tuple(events))
        marks = list(range(len(events)))
        out_times = np.concatenate(([0.0], times))
    else:
        block = generate(scheme)
        seq = repeat(block, scheme.cycles)
        per = len(block.events)
        marks = [per * (c + 1) - 1 for c in range(scheme.cycles)]
        out_times = scheme.duration * np.arange(scheme.cycles + 1)

    _, records = propagate_batch(sys, rho0, seq, noise, cfg,
                                 record_after=[-1] + marks, observables={"ix": ix})
    means, signed, errs = [], [], []
    for idx in [-1] + marks:
        s = np.real(records[idx]["ix"]) / ref
        means.append(abs(float(s.mean())))
        signed.append(float(s.mean()))
        errs.append(float(s.std(ddof=1) / math.sqrt(len(s))) if len(s) > 1 else 0.0)
    return SignalTable(out_times, np.arange(len(out_times)), np.asarray(means),
                       np.asarray(signed), np.asarray(errs))
