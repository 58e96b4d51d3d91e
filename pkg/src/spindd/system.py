"""Spin-1/2 operator algebra on M-spin Hilbert spaces.

Conventions used throughout the package:

* Basis states are indexed by bit strings; bit ``i`` of the basis index
  addresses spin ``i`` (spin 0 is the most significant bit).  Bit value 0
  means "up" (m = +1/2), bit value 1 means "down" (m = -1/2).
* Rotations are ``U = exp(-i * angle * (cos(phase) Ix + sin(phase) Iy))``
  applied as ``U rho U^dagger``, so a +pi/2 rotation with phase pi/2
  (a "y pulse") takes ``Iz`` to ``Ix``.
* States are deviation density matrices (high-temperature convention):
  traceless, with the thermal state normalised to unit Frobenius norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10

AXES = ("x", "y", "z", "+", "-")

# Single spin-1/2 operators in the {up, down} basis.
_IZ = np.diag([0.5, -0.5]).astype(complex)
_IP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_IM = _IP.T.copy()
_ONE_SPIN = {
    "z": _IZ,
    "+": _IP,
    "-": _IM,
    "x": (_IP + _IM) / 2.0,
    "y": (_IP - _IM) / 2.0j,
}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpinSystem:
    """A cluster of M spin-1/2 nuclei.

    Parameters
    ----------
    spins : int
        Number of spins M (1 <= M <= 12; M >= 2 for anything dipolar).
    offsets : ndarray, shape (M,)
        Resonance offsets omega_i in rad/s.
    couplings : ndarray, shape (M, M)
        Symmetric dipolar coupling matrix D_ij in rad/s, zero diagonal.
    """

    spins: int
    offsets: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        if not (1 <= self.spins <= 12):
            raise ValueError(f"spin count must be in [1, 12], got {self.spins}")
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if offsets.size == 1:
            offsets = np.full(self.spins, offsets[0])
        if offsets.shape != (self.spins,):
            raise ValueError(f"offsets must have shape ({self.spins},)")
        couplings = np.asarray(self.couplings, dtype=float)
        if couplings.shape != (self.spins, self.spins):
            raise ValueError(f"couplings must have shape ({self.spins}, {self.spins})")
        if not np.allclose(couplings, couplings.T, atol=0.0, rtol=0.0):
            raise ValueError("couplings must be exactly symmetric")
        if np.any(np.diag(couplings) != 0.0):
            raise ValueError("couplings must have zero diagonal")
        object.__setattr__(self, "offsets", _readonly(offsets))
        object.__setattr__(self, "couplings", _readonly(couplings))

    @property
    def dim(self) -> int:
        return 2**self.spins

    @classmethod
    def create(cls, spins: int, offsets=0.0, couplings=None) -> "SpinSystem":
        """Build a system from scalars/partial data; omitted couplings are zero."""
        if couplings is None:
            couplings = np.zeros((spins, spins))
        return cls(spins, np.asarray(offsets, dtype=float), np.asarray(couplings, dtype=float))

    @classmethod
    def random(cls, spins: int, coupling_scale: float, seed: int, offsets=0.0) -> "SpinSystem":
        """Seeded random couplings, D_ij uniform in [-coupling_scale, +coupling_scale] rad/s."""
        rng = np.random.default_rng(seed)
        d = rng.uniform(-coupling_scale, coupling_scale, size=(spins, spins))
        d = np.triu(d, k=1)
        return cls(spins, offsets, d + d.T)


@dataclass(frozen=True)
class Operator:
    """A dense operator on the full Hilbert space, tagged with its provenance."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(np.asarray(self.matrix, dtype=complex)))


@dataclass(frozen=True)
class State:
    """Deviation density matrix (traceless, high-temperature convention).

    ``scale`` carries the physical prefactor symbolically; all intensities
    reported by the package are ratios, so it never enters numerically.
    """

    matrix: np.ndarray
    scale: float = 1.0
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("state matrix must be square")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


@dataclass(frozen=True)
class CoherenceSpectrum:
    """Intensity per coherence order n, i.e. squared Frobenius weight of each block."""

    intensities: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(n): float(v) for n, v in self.intensities.items()}
        object.__setattr__(self, "intensities", clean)

    def __getitem__(self, n: int) -> float:
        return self.intensities.get(int(n), 0.0)

    @property
    def orders(self) -> list:
        return sorted(self.intensities)

    def total(self) -> float:
        return float(sum(self.intensities.values()))

    def weight(self, orders) -> float:
        return float(sum(self[n] for n in orders))


def m_values(spins: int) -> np.ndarray:
    """Total Iz eigenvalue of each basis state: M/2 minus the popcount of the index."""
    idx = np.arange(2**spins, dtype=np.uint64)
    pop = np.zeros(idx.shape, dtype=np.int64)
    for i in range(spins):
        pop += ((idx >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
    return spins / 2.0 - pop


def coherence_orders(spins: int) -> np.ndarray:
    """Matrix of coherence orders n[r, c] = m_r - m_c (integers)."""
    m = m_values(spins)
    return np.rint(m[:, None] - m[None, :]).astype(int)


def single_spin_op(sys: SpinSystem, i: int, axis: str) -> Operator:
    """Embed a one-spin operator at slot i via Kronecker products.

    Ix = (I+ + I-)/2 and Iy = -i(I+ - I-)/2 in terms of the raising and
    lowering operators.
    """
    if not 0 <= i < sys.spins:
        raise IndexError(f"spin index {i} out of range for M={sys.spins}")
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    op = _ONE_SPIN[axis]
    left = np.eye(2**i, dtype=complex)
    right = np.eye(2 ** (sys.spins - i - 1), dtype=complex)
    return Operator(np.kron(np.kron(left, op), right), label=f"I{axis}_{i}")


def total_spin_op(sys: SpinSystem, axis: str) -> Operator:
    """Collective operator sum_i I_axis^i."""
    if axis == "z":
        # Diagonal shortcut; also used at M = 12 where krons get bulky.
        return Operator(np.diag(m_values(sys.spins)).astype(complex), label="Iz_total")
    total = np.zeros((sys.dim, sys.dim), dtype=complex)
    for i in range(sys.spins):
        total += single_spin_op(sys, i, axis).matrix
    return Operator(total, label=f"I{axis}_total")


def thermal_state(sys: SpinSystem) -> State:
    """Equilibrium deviation state, proportional to sum_i Iz^i with unit Frobenius norm."""
    iz = total_spin_op(sys, "z").matrix
    return State(iz / np.linalg.norm(iz), label="thermal")


def coherence_decompose(sys: SpinSystem, rho: State | np.ndarray) -> CoherenceSpectrum:
    """Partition a state by coherence order.

    Element (r, c) belongs to order n = m_r - m_c; the intensity of order n
    is the squared Frobenius norm of that block.  The blocks are mutually
    orthogonal, so the intensities sum to |rho|_F^2.
    """
    m = rho.matrix if isinstance(rho, State) else np.asarray(rho, dtype=complex)
    if m.shape != (sys.dim, sys.dim):
        raise ValueError(f"state dimension {m.shape} does not match system dim {sys.dim}")
    orders = coherence_orders(sys.spins)
    weights = np.abs(m) ** 2
    out = {}
    for n in range(-sys.spins, sys.spins + 1):
        w = float(weights[orders == n].sum())
        if w > 0.0 or n == 0:
            out[n] = w
    return CoherenceSpectrum(out)


def coherence_filter(sys: SpinSystem, rho: np.ndarray, n: int) -> np.ndarray:
    """Keep only the order-n block of a density matrix."""
    mask = coherence_orders(sys.spins) == n
    return np.where(mask, rho, 0.0)


def collective_rotation(sys: SpinSystem, angle: float, phase: float = 0.0) -> Operator:
    """Ideal collective rotation exp(-i*angle*(cos(phase) Ix + sin(phase) Iy)).

    phase = 0 rotates about x, phase = pi/2 about y.
    """
    gen = np.cos(phase) * total_spin_op(sys, "x").matrix + np.sin(phase) * total_spin_op(sys, "y").matrix
    evals, vecs = np.linalg.eigh(gen)
    u = (vecs * np.exp(-1j * angle * evals)) @ vecs.conj().T
    return Operator(u, label=f"rot({angle:.6g},{phase:.6g})")


def apply_unitary(u: Operator | np.ndarray, rho: State | np.ndarray) -> State:
    """U rho U^dagger as a new State."""
    um = u.matrix if isinstance(u, Operator) else np.asarray(u, dtype=complex)
    rm = rho.matrix if isinstance(rho, State) else np.asarray(rho, dtype=complex)
    out = um @ rm @ um.conj().T
    scale = rho.scale if isinstance(rho, State) else 1.0
    return State(out, scale=scale)


def expect(rho: State | np.ndarray, op: Operator | np.ndarray) -> complex:
    """Tr(rho * op)."""
    rm = rho.matrix if isinstance(rho, State) else np.asarray(rho)
    om = op.matrix if isinstance(op, Operator) else np.asarray(op)
    return complex(np.trace(rm @ om))


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    """Hermitian within tol relative Frobenius norm."""
    nrm = np.linalg.norm(a)
    if nrm == 0.0:
        return True
    return np.linalg.norm(a - a.conj().T) / nrm <= tol


def is_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    """|U^dagger U - 1|_F / sqrt(dim) within tol."""
    d = u.shape[0]
    err = np.linalg.norm(u.conj().T @ u - np.eye(d)) / np.sqrt(d)
    return err <= tol
