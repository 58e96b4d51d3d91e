"""The multiple-quantum spin-counting protocol.

Pipeline (one run): thermal state -> m cycles of the two-quantum excitation
sequence -> optional DD block -> free evolution t1 -> m mixing cycles whose
pulse phases carry the time-reversal shift pi/2 plus the encoding phase
alpha -> purge of all non-zero-quantum coherences -> (pi/2)_y detection pulse
-> Tr(rho Ix_tot).

The encoding phase is swept over alpha_k = k * pi / n_max for
k = 0 .. 2*n_max - 1, with the evolution time incremented in proportion
(t1_k = alpha_k / delta_omega), so a coherence of order n responds as
cos(n alpha).  After subtracting the mean (which removes exactly the n = 0
bin), the cosine transform over the sweep localises each order at its own
bin with no leakage, by discrete orthogonality of the full-period grid.

Signals are normalised to the directly detected thermal state, so the
perfect-echo spectrum intensities are coherence-order weight fractions.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .noise import NoiseModel, calibrated_rms
from .propagate import PropagationConfig, propagate_batch
from .sequence import (DDScheme, PulseSequence, delay, gen_mqc_cycle, generate, repeat)
from .system import (SpinSystem, State, coherence_orders, collective_rotation,
                     thermal_state, total_spin_op)

PURGE_MODES = ("projection", "evolve")


@dataclass(frozen=True)
class MQCConfig:
    """Parameters of the spin-counting experiment."""

    m: int = 5                      # excitation/mixing cycles
    delta: float = 2e-6             # cycle gap, s
    tau_90: float = 0.0             # pi/2 pulse width, s (0 = ideal pulses)
    n_max: int = 8                  # highest separable order; 2*n_max sweep points
    delta_omega: float = 2.0 * math.pi * 200e3  # encoding frequency, rad/s
    scheme: DDScheme | None = None  # DD block inserted after preparation
    t_r_mode: str = "projection"
    t_r: float = 5e-3
    seed: int | None = None         # overrides the noise model's seed when set
    n_traj: int = 1
    dt: float | None = None
    ideal_pulses: bool = False
    include_dipolar_during_dd: bool = True
    encode_t1: bool = True          # sweep t1 along with alpha
    dd_after_t1: bool = False       # move the DD block past the t1 period
    purge_noise: NoiseModel | None = None  # bath for the 'evolve' purge mode

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.delta < 0.0 or self.tau_90 < 0.0:
            raise ValueError("delta and tau_90 must be >= 0")
        if self.delta_omega <= 0.0:
            raise ValueError("delta_omega must be > 0")
        if self.t_r_mode not in PURGE_MODES:
            raise ValueError(f"t_r_mode must be one of {PURGE_MODES}")

    def prop_config(self, noise_active: bool) -> PropagationConfig:
        return PropagationConfig(n_traj=self.n_traj if noise_active else 1, dt=self.dt,
                                 ideal_pulses=self.ideal_pulses,
                                 include_dipolar_during_dd=self.include_dipolar_during_dd)


def alpha_grid(n_max: int) -> np.ndarray:
    """Encoding phases alpha_k = k*pi/n_max, k = 0 .. 2*n_max - 1."""
    return np.arange(2 * n_max) * (math.pi / n_max)


def mqc_transform(signals: np.ndarray, n_max: int) -> tuple:
    """Mean-subtracted cosine transform of a sweep; returns (orders, amplitudes).

    The amplitude at order n is the coefficient of cos(n alpha) in the
    signal; bins 0 and n_max carry weight 1/K instead of 2/K.  ``signals``
    may be a stack; the sweep runs along the last axis.
    """
    signals = np.asarray(signals, dtype=float)
    k = signals.shape[-1]
    if k != 2 * n_max:
        raise ValueError(f"expected {2 * n_max} sweep points, got {k}")
    alphas = alpha_grid(n_max)
    centered = signals - signals.mean(axis=-1, keepdims=True)
    orders = np.arange(n_max + 1)
    coef = np.where((orders == 0) | (orders == n_max), 1.0 / k, 2.0 / k)
    amplitudes = coef * (centered @ np.cos(np.outer(orders, alphas)).T)
    return orders, amplitudes


def _transform_stderr(signal_stderr: np.ndarray, n_max: int) -> np.ndarray:
    alphas = alpha_grid(n_max)
    k = len(alphas)
    orders = np.arange(n_max + 1)
    coef = np.where((orders == 0) | (orders == n_max), 1.0 / k, 2.0 / k)
    var = (coef[:, None] * np.cos(np.outer(orders, alphas))) ** 2 @ np.asarray(signal_stderr) ** 2
    return np.sqrt(var)


def default_purge_noise(seed: int = 0) -> NoiseModel:
    """Strong collective dephasing used by the 'evolve' purge mode.

    Fully correlated static noise dephases an order-n element at rate n*b and
    leaves the zero-quantum block untouched, so its long-t_R limit is exactly
    the projection purge.
    """
    return NoiseModel(kind="static_gaussian", b=calibrated_rms(25e-6),
                      correlated_across_spins=True, seed=seed)


def purge(sys: SpinSystem, rho: State | np.ndarray, mode: str = "projection",
          t_r: float = 5e-3, noise: NoiseModel | None = None,
          cfg: PropagationConfig | None = None) -> State:
    """Remove all coherences of order != 0.

    ``projection`` zeroes the off-order blocks outright (infinite-t_R
    idealisation); ``evolve`` propagates for t_r under strong noise and
    averages, approaching the same limit.
    """
    if mode not in PURGE_MODES:
        raise ValueError(f"mode must be one of {PURGE_MODES}")
    m = rho.matrix if isinstance(rho, State) else np.asarray(rho, dtype=complex)
    if mode == "projection":
        keep = coherence_orders(sys.spins) == 0
        return State(np.where(keep, m, 0.0))
    noise = noise or default_purge_noise()
    cfg = cfg or PropagationConfig(n_traj=256)
    seq = PulseSequence((delay(t_r),))
    batch, _ = propagate_batch(sys, m, seq, noise, cfg)
    avg = batch.mean(axis=0)
    return State(0.5 * (avg + avg.conj().T))


@dataclass(frozen=True)
class MQCResult:
    """Spectrum and raw sweep of one spin-counting run."""

    orders: np.ndarray
    intensity: np.ndarray          # |cosine amplitude| per order
    intensity_signed: np.ndarray
    intensity_stderr: np.ndarray
    alphas: np.ndarray
    t1: np.ndarray
    signal: np.ndarray
    signal_stderr: np.ndarray

    def spectrum(self) -> dict:
        return {int(n): float(v) for n, v in zip(self.orders, self.intensity)}

    def write_spectrum_csv(self, path) -> None:
        from .tables import write_csv
        write_csv(path, ["order", "intensity", "stderr"],
                  zip(self.orders.astype(int), self.intensity, self.intensity_stderr))

    def write_sweep_csv(self, path) -> None:
        from .tables import write_csv
        write_csv(path, ["k", "alpha_rad", "t1_s", "signal"],
                  zip(range(len(self.alphas)), self.alphas, self.t1, self.signal))


def _detection(sys: SpinSystem):
    det = collective_rotation(sys, math.pi / 2.0, math.pi / 2.0).matrix
    ix = total_spin_op(sys, "x").matrix
    iz = total_spin_op(sys, "z").matrix
    ref = float(np.linalg.norm(iz))  # Tr(rho_detected Ix) for the bare thermal state
    return det, ix, ref


def _detect_signals(sys: SpinSystem, rho_batch: np.ndarray, det, ix, ref) -> np.ndarray:
    rotated = det @ rho_batch @ det.conj().T
    return np.real(np.einsum("bij,ji->b", rotated, ix)) / ref


def _purge_batch(sys: SpinSystem, rho_batch: np.ndarray, cfg: MQCConfig,
                 noise_seed: int, stream: int) -> np.ndarray:
    if cfg.t_r_mode == "projection":
        keep = coherence_orders(sys.spins) == 0
        return np.where(keep[None, :, :], rho_batch, 0.0)
    pn = cfg.purge_noise or default_purge_noise(seed=(noise_seed or 0) + 1000003)
    seq = PulseSequence((delay(cfg.t_r),))
    out = np.empty_like(rho_batch)
    # Each main-run trajectory is purged by its own sub-ensemble of bath draws.
    for b in range(rho_batch.shape[0]):
        batch, _ = propagate_batch(sys, rho_batch[b], seq, pn,
                                   PropagationConfig(n_traj=256), stream=stream * 65536 + b)
        out[b] = batch.mean(axis=0)
    return out


def mqc_sweep_signals(sys: SpinSystem, cfg: MQCConfig, noise: NoiseModel | None = None,
                      threads: int = 1) -> np.ndarray:
    """Per-trajectory sweep signals, shape (n_traj, 2*n_max).

    Trajectory b at sweep point k draws noise from the stream (seed, k, b),
    so runs with the same seed and total duration see identical trajectories;
    comparisons between schemes can then be made pairwise per trajectory.
    """
    noise = noise or NoiseModel.none()
    if cfg.seed is not None:
        noise = replace(noise, seed=cfg.seed)
    if sys.spins > cfg.n_max:
        warnings.warn(f"n_max = {cfg.n_max} < M = {sys.spins}: orders above n_max alias",
                      stacklevel=2)

    pcfg = cfg.prop_config(noise.active)
    rho_th = thermal_state(sys)
    det, ix, ref = _detection(sys)
    prep = gen_mqc_cycle(cfg.delta, cfg.tau_90, alpha=0.0, cycles=cfg.m)

    block = None
    if cfg.scheme is not None:
        block = repeat(generate(cfg.scheme), cfg.scheme.cycles).tagged("dd")

    alphas = alpha_grid(cfg.n_max)
    dt1 = (math.pi / cfg.n_max) / cfg.delta_omega if cfg.encode_t1 else 0.0
    t1s = np.arange(len(alphas)) * dt1

    def run_k(k: int) -> np.ndarray:
        mix = gen_mqc_cycle(cfg.delta, cfg.tau_90, alpha=math.pi / 2.0 + alphas[k],
                            cycles=cfg.m)
        seq = prep
        middle = []
        if block is not None:
            middle.append(block)
        if t1s[k] > 0.0:
            middle.append(PulseSequence((delay(t1s[k], tag="t1"),)))
        if cfg.dd_after_t1:
            middle.reverse()
        for part in middle:
            seq = seq + part
        seq = seq + mix
        rho_b, _ = propagate_batch(sys, rho_th, seq, noise, pcfg, stream=k)
        rho_b = _purge_batch(sys, rho_b, cfg, noise.seed, stream=len(alphas) + k)
        return _detect_signals(sys, rho_b, det, ix, ref)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(run_k, range(len(alphas))))
    else:
        columns = [run_k(k) for k in range(len(alphas))]
    return np.stack(columns, axis=1)


def run_mqc(sys: SpinSystem, cfg: MQCConfig, noise: NoiseModel | None = None,
            threads: int = 1) -> MQCResult:
    """Full spin-counting experiment: sweep, purge, detect, cosine transform."""
    per_traj = mqc_sweep_signals(sys, cfg, noise, threads=threads)
    n_traj = per_traj.shape[0]
    signal = per_traj.mean(axis=0)
    if n_traj > 1:
        signal_err = per_traj.std(axis=0, ddof=1) / math.sqrt(n_traj)
    else:
        signal_err = np.zeros_like(signal)

    alphas = alpha_grid(cfg.n_max)
    dt1 = (math.pi / cfg.n_max) / cfg.delta_omega if cfg.encode_t1 else 0.0
    t1s = np.arange(len(alphas)) * dt1
    orders, signed = mqc_transform(signal, cfg.n_max)
    stderr = _transform_stderr(signal_err, cfg.n_max)
    return MQCResult(orders=orders, intensity=np.abs(signed), intensity_signed=signed,
                     intensity_stderr=stderr, alphas=alphas, t1=t1s, signal=signal,
                     signal_stderr=signal_err)


def encode_sweep(sys: SpinSystem, rho_mid: State | np.ndarray, cfg: MQCConfig) -> tuple:
    """Noise-free mixing sweep of an injected mid-protocol state (test seam).

    Runs only the second half of the pipeline (mixing, purge, detection) for
    every alpha and returns (alphas, signals).
    """
    m = rho_mid.matrix if isinstance(rho_mid, State) else np.asarray(rho_mid, dtype=complex)
    det, ix, ref = _detection(sys)
    pcfg = PropagationConfig(ideal_pulses=cfg.ideal_pulses)
    alphas = alpha_grid(cfg.n_max)
    signals = np.empty(len(alphas))
    for k, alpha in enumerate(alphas):
        mix = gen_mqc_cycle(cfg.delta, cfg.tau_90, alpha=math.pi / 2.0 + alpha,
                            cycles=cfg.m)
        rho_b, _ = propagate_batch(sys, m, mix, None, pcfg)
        rho_b = np.where((coherence_orders(sys.spins) == 0)[None, :, :], rho_b, 0.0)
        signals[k] = _detect_signals(sys, rho_b, det, ix, ref)[0]
    return alphas, signals


@dataclass(frozen=True)
class ScanEntry:
    """One row group of a DD-size scan: a scheme at one N (or matched no-DD)."""

    family: str
    n: int
    total_duration: float
    ok: bool
    error: str = ""
    result: MQCResult | None = None
    tabulated: dict = field(default_factory=dict)  # order -> (intensity, stderr)


def dd_on_mqc_scan(sys: SpinSystem, cfg: MQCConfig, noise: NoiseModel | None,
                   n_list, scheme_family: str, orders=(2, 4, 6, 8),
                   threads: int = 1) -> list:
    """Spin-counting intensities versus DD size N, with matched no-DD rows.

    For each N the block duration is the CPMG-matched T = N(2*tau + tau_pi)
    taken from ``cfg.scheme``; a free-evolution run of the same duration is
    tabulated alongside.  Unrealizable entries are reported as errors and the
    scan continues.
    """
    if cfg.scheme is None:
        raise ValueError("cfg.scheme supplies tau/tau_pi/cycles for the scan")
    tau = cfg.scheme.cpmg_tau
    tau_pi = cfg.scheme.tau_pi
    orders = [n for n in orders if n <= cfg.n_max]
    entries = []
    for n in n_list:
        t_block = n * (2.0 * tau + tau_pi)
        for family in (scheme_family, "none"):
            scheme = DDScheme(family, n=max(n, 1), total_duration=t_block, tau_pi=tau_pi,
                              cycles=cfg.scheme.cycles)
            try:
                res = run_mqc(sys, replace(cfg, scheme=scheme), noise, threads=threads)
            except (ValueError, ArithmeticError) as exc:
                entries.append(ScanEntry(family, n, t_block, ok=False, error=str(exc)))
                continue
            tab = {q: (float(res.intensity[q]), float(res.intensity_stderr[q]))
                   for q in orders}
            entries.append(ScanEntry(family, n, t_block, ok=True, result=res,
                                     tabulated=tab))
    return entries


def write_scan_csv(entries, path) -> None:
    from .tables import write_csv
    rows = []
    for e in entries:
        if not e.ok:
            rows.append((e.family, e.n, e.total_duration, "", "", "", e.error))
            continue
        for order, (val, err) in sorted(e.tabulated.items()):
            rows.append((e.family, e.n, e.total_duration, order, val, err, ""))
    write_csv(path, ["family", "n", "time_s", "order", "intensity", "stderr", "error"], rows)
