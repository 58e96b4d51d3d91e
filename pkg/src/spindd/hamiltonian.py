"""Internal Hamiltonians and the zeroth-order average-Hamiltonian oracle.

The internal Hamiltonian is the sum of a Zeeman term and the secular part of
the dipolar interaction,

    H_int = sum_i omega_i Iz^i  +  sum_{i<j} D_ij [3 Iz^i Iz^j - I^i . I^j],

and the engineered two-quantum target is

    H_1 = sum_{i<j} (D_ij / 2) (I+^i I+^j + I-^i I-^j).

``magnus0`` computes the zeroth-order Magnus (average Hamiltonian) term of a
delta-pulse cycle by toggling-frame time averaging, used as the oracle that
pins the 8-pulse cycle construction in :mod:`spindd.sequence`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import Operator, SpinSystem, m_values, single_spin_op, total_spin_op


def zeeman(sys: SpinSystem) -> Operator:
    """Zeeman Hamiltonian sum_i omega_i Iz^i (diagonal)."""
    diag = np.zeros(sys.dim)
    idx = np.arange(sys.dim, dtype=np.uint64)
    for i in range(sys.spins):
        bit = ((idx >> np.uint64(sys.spins - 1 - i)) & np.uint64(1)).astype(float)
        diag += sys.offsets[i] * (0.5 - bit)
    return Operator(np.diag(diag).astype(complex), label="H_Z")


def dipolar(sys: SpinSystem) -> Operator:
    """Secular dipolar Hamiltonian sum_{i<j} D_ij [3 Iz^i Iz^j - I^i . I^j]."""
    if sys.spins < 2:
        raise ValueError("dipolar Hamiltonian needs at least 2 spins")
    h = np.zeros((sys.dim, sys.dim), dtype=complex)
    ops = {(i, a): single_spin_op(sys, i, a).matrix for i in range(sys.spins) for a in ("z", "+", "-")}
    for i in range(sys.spins):
        for j in range(i + 1, sys.spins):
            d = sys.couplings[i, j]
            if d == 0.0:
                continue
            zz = ops[(i, "z")] @ ops[(j, "z")]
            flipflop = ops[(i, "+")] @ ops[(j, "-")] + ops[(i, "-")] @ ops[(j, "+")]
            # 3 IzIz - I.I = 2 IzIz - (IxIx + IyIy) = 2 IzIz - (I+I- + I-I+)/2
            h += d * (2.0 * zz - 0.5 * flipflop)
    return Operator(h, label="H_D")


def two_quantum_target(sys: SpinSystem) -> Operator:
    """Two-quantum Hamiltonian sum_{i<j} (D_ij/2)(I+^i I+^j + I-^i I-^j)."""
    if sys.spins < 2:
        raise ValueError("two-quantum Hamiltonian needs at least 2 spins")
    h = np.zeros((sys.dim, sys.dim), dtype=complex)
    for i in range(sys.spins):
        ip_i = single_spin_op(sys, i, "+").matrix
        for j in range(i + 1, sys.spins):
            d = sys.couplings[i, j]
            if d == 0.0:
                continue
            raise_both = ip_i @ single_spin_op(sys, j, "+").matrix
            h += (d / 2.0) * (raise_both + raise_both.conj().T)
    return Operator(h, label="H_1")


def phase_shifted(h1: Operator | np.ndarray, sys: SpinSystem, alpha: float) -> Operator:
    """Conjugate by a collective z rotation: exp(-i a Iz_tot) H exp(+i a Iz_tot).

    An order-n block picks up exp(-i n a); for the two-quantum Hamiltonian,
    alpha = pi/2 negates it (the time-reversal phase relation).
    """
    m = h1.matrix if isinstance(h1, Operator) else np.asarray(h1, dtype=complex)
    z = np.exp(-1j * alpha * m_values(sys.spins))
    return Operator(z[:, None] * m * z.conj()[None, :], label="H(alpha)")


def internal_hamiltonian(sys: SpinSystem, include_dipolar: bool = True) -> Operator:
    """H_Z + H_D (H_Z only for a single spin or when dipolar is disabled)."""
    h = zeeman(sys).matrix.copy()
    if include_dipolar and sys.spins >= 2:
        h = h + dipolar(sys).matrix
    return Operator(h, label="H_int")


@dataclass(frozen=True)
class AverageHamiltonianReport:
    """Zeroth-order Magnus term of a cycle and its distance to a target."""

    h_avg: Operator
    target: Operator | None
    relative_error: float | None

    @property
    def ok(self) -> bool:
        return self.relative_error is not None and self.relative_error < 1e-10


def magnus0(seq, sys: SpinSystem, target: Operator | np.ndarray | None = None,
            h_int: np.ndarray | None = None) -> AverageHamiltonianReport:
    """Zeroth-order average Hamiltonian of a delta-pulse cycle.

    H_avg = (1/T) sum_k tau_k U_k^dag H_int U_k, where U_k is the product of
    all pulse rotations applied before interval k (the toggling frame).

    Parameters
    ----------
    seq : PulseSequence
        Cycle consisting of delays and zero-width pulses only.
    sys : SpinSystem
        Supplies H_int unless ``h_int`` is given explicitly.
    target : Operator or ndarray, optional
        Reference operator; when given the report carries the relative
        Frobenius error |H_avg - target| / |target|.

    Raises
    ------
    ValueError
        If the cycle has finite-width pulses or non-positive total duration.
    """
    from .sequence import PulseSequence  # local import to avoid a cycle

    if not isinstance(seq, PulseSequence):
        raise TypeError("magnus0 expects a PulseSequence")
    if seq.total_duration <= 0.0:
        raise ValueError("cycle duration must be positive")
    for ev in seq.events:
        if ev.kind == "pulse" and ev.duration != 0.0:
            raise ValueError("magnus0 supports the delta-pulse limit only")

    h = internal_hamiltonian(sys).matrix if h_int is None else np.asarray(h_int, dtype=complex)
    ix = total_spin_op(sys, "x").matrix
    iy = total_spin_op(sys, "y").matrix

    accum = np.zeros_like(h)
    toggling = np.eye(sys.dim, dtype=complex)
    for ev in seq.events:
        if ev.kind == "delay":
            if ev.duration > 0.0:
                frame = toggling.conj().T @ h @ toggling
                accum += ev.duration * frame
        else:
            gen = np.cos(ev.phase) * ix + np.sin(ev.phase) * iy
            evals, vecs = np.linalg.eigh(gen)
            pulse = (vecs * np.exp(-1j * ev.flip * evals)) @ vecs.conj().T
            toggling = pulse @ toggling
    h_avg = accum / seq.total_duration

    rel = None
    top = None
    if target is not None:
        tm = target.matrix if isinstance(target, Operator) else np.asarray(target, dtype=complex)
        top = target if isinstance(target, Operator) else Operator(tm, label="target")
        denom = np.linalg.norm(tm)
        rel = float(np.linalg.norm(h_avg - tm) / denom) if denom > 0 else float(np.linalg.norm(h_avg))
    return AverageHamiltonianReport(Operator(h_avg, label="H_avg"), top, rel)
