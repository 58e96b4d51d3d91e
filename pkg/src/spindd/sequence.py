"""Pulse-sequence generators.

Dynamical-decoupling trains::

    CPMG / CPMGp    N repetitions of [tau, pi-pulse, tau], total N*(2*tau + tau_pi)
    UDD / UDDp      pi pulses centred at t_j = T sin^2(pi j / (2N + 2))
    RUDD / RUDDp    UDD instants with j-dependent widths
                    tau_pi^j = T sin(pi j / (N + 1)) sin(theta_p) and amplitudes
                    calibrated so every flip is exactly pi

The "p" variants alternate the pulse phase between +x and -x (starting at +x);
the plain variants keep +x.

The two-quantum excitation cycle is eight pi/2 pulses with gaps delta and
delta' = 2*delta + tau_90 arranged mirror-symmetrically; in the zero-width
limit its zeroth-order average Hamiltonian equals the two-quantum target of
:func:`spindd.hamiltonian.two_quantum_target` (verified by the magnus0 oracle
tests, which pin the phase pattern).  Shifting every pulse phase by alpha
conjugates the average Hamiltonian by exp(-i alpha Iz_tot); alpha = pi/2
negates it, which is the time-reversal used for mixing.

All durations are stored in seconds as floats; pulse widths of exactly zero
denote ideal (delta) pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

SCHEME_NAMES = ("cpmg", "cpmgp", "udd", "uddp", "rudd", "ruddp", "none")


class NegativeDelayError(ValueError):
    """A generated inter-pulse delay came out negative: the (N, T, tau_pi) combination is unrealizable."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"delay {index} is negative ({value:.6g} s); sequence unrealizable")


class UnrealizableError(ValueError):
    """Scheme parameters violate a hard constraint (e.g. sin(theta_p) > 1)."""


@dataclass(frozen=True)
class SequenceEvent:
    """One delay or one rectangular pulse.

    For pulses, ``amplitude`` is the rotation rate in Hz and ``flip`` the
    nominal flip angle in radians (flip = 2*pi*amplitude*duration).  Ideal
    pulses have zero duration, infinite amplitude, and a finite flip.
    """

    kind: str            # "delay" | "pulse"
    duration: float      # seconds, >= 0
    phase: float = 0.0   # radians
    amplitude: float = 0.0  # Hz
    flip: float = 0.0    # radians
    tag: str = ""

    def __post_init__(self):
        if self.kind not in ("delay", "pulse"):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.duration < 0.0:
            raise ValueError(f"event duration must be >= 0, got {self.duration}")


def delay(duration: float, tag: str = "") -> SequenceEvent:
    return SequenceEvent("delay", float(duration), tag=tag)


def pulse(flip: float, phase: float, duration: float, tag: str = "") -> SequenceEvent:
    """Rectangular pulse with the amplitude implied by flip angle and width."""
    duration = float(duration)
    amplitude = flip / (2.0 * math.pi * duration) if duration > 0.0 else math.inf
    return SequenceEvent("pulse", duration, phase=float(phase), amplitude=amplitude,
                         flip=float(flip), tag=tag)


@dataclass(frozen=True)
class PulseSequence:
    """Time-ordered list of events."""

    events: tuple

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    @property
    def total_duration(self) -> float:
        return float(sum(ev.duration for ev in self.events))

    @property
    def n_pulses(self) -> int:
        return sum(1 for ev in self.events if ev.kind == "pulse")

    def pulses(self) -> list:
        return [ev for ev in self.events if ev.kind == "pulse"]

    def pulse_centers(self) -> np.ndarray:
        """Absolute time of the centre of each pulse."""
        centers = []
        t = 0.0
        for ev in self.events:
            if ev.kind == "pulse":
                centers.append(t + ev.duration / 2.0)
            t += ev.duration
        return np.asarray(centers)

    def tagged(self, tag: str) -> "PulseSequence":
        """Copy with every event re-tagged (used to mark DD blocks)."""
        return PulseSequence(tuple(replace(ev, tag=tag) for ev in self.events))

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.events + other.events)


def repeat(seq: PulseSequence, cycles: int) -> PulseSequence:
    """Concatenate ``cycles`` copies of a block (timings are not re-derived)."""
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    return PulseSequence(seq.events * cycles)


@dataclass(frozen=True)
class DDScheme:
    """A named decoupling scheme with its parameters.

    Either ``tau`` (CPMG parameterization, half-gap between pi pulses) or the
    total duration T must be given; they are related by T = N(2*tau + tau_pi)
    and either form is accepted for every scheme, so trains built from the
    same (N, tau, tau_pi) are directly comparable at matched duration.
    ``tau_pi = 0`` selects the ideal delta-pulse variant.
    """

    name: str
    n: int = 1
    tau: float | None = None            # CPMG half-gap; without T implies the
    total_duration: float | None = None  # CPMG-matched T = N(2*tau + tau_pi)
    tau_pi: float = 0.0
    cycles: int = 1

    def __post_init__(self):
        object.__setattr__(self, "name", self.name.lower())
        if self.name not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {self.name!r}; choose from {SCHEME_NAMES}")
        if self.name != "none" and self.n < 1:
            raise ValueError("pulse count must be >= 1")
        if self.tau_pi < 0.0:
            raise ValueError("tau_pi must be >= 0")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.name == "none":
            if self.total_duration is None:
                raise ValueError("scheme 'none' needs total_duration")
            return
        if self.tau is None and self.total_duration is None:
            raise ValueError("provide tau or total_duration")
        if self.tau is not None and self.total_duration is not None:
            implied = self.n * (2.0 * self.tau + self.tau_pi)
            if not math.isclose(implied, self.total_duration, rel_tol=1e-12):
                raise ValueError("tau and total_duration are inconsistent")

    @property
    def duration(self) -> float:
        """Total duration of one block."""
        if self.total_duration is not None:
            return self.total_duration
        return self.n * (2.0 * self.tau + self.tau_pi)

    @property
    def cpmg_tau(self) -> float:
        """Half-gap for the CPMG parameterization, derived from T if needed."""
        if self.tau is not None:
            return self.tau
        return (self.duration / self.n - self.tau_pi) / 2.0

    def delta_limit(self) -> "DDScheme":
        """Same (N, T) with zero-width pulses."""
        return replace(self, tau=None, total_duration=self.duration, tau_pi=0.0)


def _alternating_phases(name: str, n: int) -> list:
    """+x for all pulses, or +x/-x alternation for the 'p' variants (first pulse +x)."""
    if name.endswith("p"):
        return [0.0 if j % 2 == 0 else math.pi for j in range(n)]
    return [0.0] * n


def gen_cpmg(scheme: DDScheme) -> PulseSequence:
    """N repetitions of [tau, pi-pulse, tau]."""
    if scheme.name not in ("cpmg", "cpmgp"):
        raise ValueError(f"gen_cpmg cannot build {scheme.name!r}")
    tau = scheme.cpmg_tau
    if tau < 0.0:
        raise NegativeDelayError(1, tau)
    phases = _alternating_phases(scheme.name, scheme.n)
    events = []
    for j in range(scheme.n):
        events.append(delay(tau))
        events.append(pulse(math.pi, phases[j], scheme.tau_pi))
        events.append(delay(tau))
    return PulseSequence(tuple(events))


def udd_instants(n: int, total_duration: float) -> np.ndarray:
    """Pulse instants t_j = T sin^2(pi j / (2N + 2)), j = 1..N."""
    if n < 1:
        raise ValueError("N must be >= 1")
    if total_duration <= 0.0:
        raise ValueError("T must be > 0")
    j = np.arange(1, n + 1)
    return total_duration * np.sin(math.pi * j / (2 * n + 2)) ** 2


def _edge_and_gaps(centers: np.ndarray, widths: np.ndarray, total_duration: float) -> list:
    """Delays before each pulse and after the last, given centres and widths.

    The first and last delays use the half-width edge convention
    tau_1 = tau_{N+1} = t_1 - tau_pi^1 / 2; interior delays separate the
    trailing edge of one pulse from the leading edge of the next.
    """
    n = len(centers)
    delays = [centers[0] - widths[0] / 2.0]
    for j in range(1, n):
        delays.append(centers[j] - centers[j - 1] - widths[j] / 2.0 - widths[j - 1] / 2.0)
    delays.append(total_duration - centers[-1] - widths[-1] / 2.0)
    # Tolerate float roundoff at exactly-touching pulses, not real overlap.
    tol = 1e-12 * total_duration
    for idx, val in enumerate(delays):
        if val < -tol:
            raise NegativeDelayError(idx + 1, float(val))
    return [max(v, 0.0) for v in delays]


def gen_udd(scheme: DDScheme) -> PulseSequence:
    """Uhrig train: constant-width pi pulses centred at the UDD instants."""
    if scheme.name not in ("udd", "uddp"):
        raise ValueError(f"gen_udd cannot build {scheme.name!r}")
    t = scheme.duration
    centers = udd_instants(scheme.n, t)
    widths = np.full(scheme.n, scheme.tau_pi)
    gaps = _edge_and_gaps(centers, widths, t)
    phases = _alternating_phases(scheme.name, scheme.n)
    events = []
    for j in range(scheme.n):
        events.append(delay(gaps[j]))
        events.append(pulse(math.pi, phases[j], scheme.tau_pi))
    events.append(delay(gaps[scheme.n]))
    return PulseSequence(tuple(events))


def rudd_theta(n: int, total_duration: float, tau_pi: float) -> float:
    """Width parameter: sin(theta_p) = tau_pi / (T sin(pi/(N+1))).

    theta_p is fixed by requiring the narrowest pulse width to equal tau_pi;
    when the quotient exceeds 1 the scheme is unrealizable.
    """
    s = tau_pi / (total_duration * math.sin(math.pi / (n + 1)))
    if s > 1.0:
        raise UnrealizableError(
            f"tau_pi = {tau_pi:.6g} s exceeds T sin(pi/(N+1)) = "
            f"{total_duration * math.sin(math.pi / (n + 1)):.6g} s")
    return math.asin(s)


def rudd_widths(n: int, total_duration: float, tau_pi: float) -> np.ndarray:
    """Pulse durations tau_pi^j = T sin(pi j / (N+1)) sin(theta_p)."""
    theta = rudd_theta(n, total_duration, tau_pi)
    j = np.arange(1, n + 1)
    return total_duration * np.sin(math.pi * j / (n + 1)) * math.sin(theta)


def gen_rudd(scheme: DDScheme) -> PulseSequence:
    """Finite-bandwidth Uhrig train: UDD instants, j-dependent widths, pi flips."""
    if scheme.name not in ("rudd", "ruddp"):
        raise ValueError(f"gen_rudd cannot build {scheme.name!r}")
    t = scheme.duration
    centers = udd_instants(scheme.n, t)
    if scheme.tau_pi == 0.0:
        widths = np.zeros(scheme.n)
    else:
        widths = rudd_widths(scheme.n, t, scheme.tau_pi)
    gaps = _edge_and_gaps(centers, widths, t)
    phases = _alternating_phases(scheme.name, scheme.n)
    events = []
    for j in range(scheme.n):
        events.append(delay(gaps[j]))
        events.append(pulse(math.pi, phases[j], widths[j]))
    events.append(delay(gaps[scheme.n]))
    return PulseSequence(tuple(events))


def generate(scheme: DDScheme) -> PulseSequence:
    """Build one block of any named scheme ('none' gives a single delay)."""
    if scheme.name == "none":
        return PulseSequence((delay(scheme.duration),))
    if scheme.name.startswith("cpmg"):
        return gen_cpmg(scheme)
    if scheme.name.startswith("udd"):
        return gen_udd(scheme)
    return gen_rudd(scheme)


# Eight-pulse two-quantum cycle.  Phases are y-type (pi/2 offset from x) so
# the zeroth-order average Hamiltonian comes out as +H_1; the pattern is a
# mirror-symmetric arrangement whose net rotation is the identity.
_MQC_PHASES = (0.5, 1.5, 0.5, 1.5, 1.5, 0.5, 1.5, 0.5)  # units of pi


def gen_mqc_cycle(delta: float, tau_90: float, alpha: float = 0.0, cycles: int = 1) -> PulseSequence:
    """m cycles of the 8-pulse two-quantum excitation sequence.

    Gaps alternate between delta' = 2*delta + tau_90 (within pulse pairs) and
    delta (between pairs), with delta/2 at both ends of each cycle so that
    concatenated cycles join with a delta gap.  All pulse phases are shifted
    by ``alpha``; tau_90 = 0 gives the ideal delta-pulse variant.
    """
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    if tau_90 < 0.0:
        raise ValueError("tau_90 must be >= 0")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    dprime = 2.0 * delta + tau_90
    gaps = [delta / 2.0, dprime, delta, dprime, delta, dprime, delta, dprime, delta / 2.0]
    events = []
    for j in range(8):
        events.append(delay(gaps[j]))
        events.append(pulse(math.pi / 2.0, _MQC_PHASES[j] * math.pi + alpha, tau_90))
    events.append(delay(gaps[8]))
    return repeat(PulseSequence(tuple(events)), cycles)


def mqc_cycle_duration(delta: float, tau_90: float) -> float:
    """Duration of a single 8-pulse cycle: 12*delta + 12*tau_90."""
    return 4.0 * delta + 4.0 * (2.0 * delta + tau_90) + 8.0 * tau_90


def dumps(seq: PulseSequence) -> str:
    """Line-oriented text dump: kind,duration_s,phase_rad,amplitude_hz per event."""
    lines = []
    for ev in seq.events:
        lines.append(f"{ev.kind},{ev.duration:.17g},{ev.phase:.17g},{ev.amplitude:.17g}")
    return "\n".join(lines) + "\n"
