"""Analytic filter-function predictions for single-spin pure dephasing.

For a train of pi pulses at centres t_1 < ... < t_N inside [0, T], dephasing
accumulates the random phase phi = integral of s(t) beta(t) dt, with s(t) the
+-1 sign function that flips at every pulse centre.  For Gaussian noise the
ensemble-averaged signal is exp(-chi) with

    chi = 2 * integral_0^inf S(omega) F(omega T) / omega^2 d omega,
    F(omega T) = | sum_k (-1)^k (e^{i omega t_{k+1}} - e^{i omega t_k}) |^2 / 2,

where t_0 = 0, t_{N+1} = T and S is the one-sided spectral density of
:mod:`spindd.noise` (normalised so its integral is b^2/2).  The prefactor is
fixed by the quasi-static limit, where chi must reproduce the Gaussian
free-induction decay exp(-b^2 T^2 / 2); the Monte-Carlo cross-checks in the
test suite pin the convention end to end.

Finite-width pulses are mapped to sign switches at their centres; the error
of that approximation is measured against the Monte-Carlo propagation (which
integrates through the pulses) rather than corrected analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .noise import NoiseModel, spectral_density
from .sequence import PulseSequence

#: Reporting grid for F: logarithmic, 400 points over [1e-2/T, 1e3/T].
REPORT_GRID_POINTS = 400
REPORT_GRID_DECADES = (-2.0, 3.0)


@dataclass(frozen=True)
class FilterResult:
    """Attenuation exponent, predicted signal, and the sampled filter function."""

    chi: float
    predicted_signal: float
    total_duration: float
    omega: np.ndarray
    f: np.ndarray

    def write_csv(self, filter_path, summary_path) -> None:
        from .tables import write_csv
        write_csv(filter_path, ["omega_rad_s", "F"], zip(self.omega, self.f))
        write_csv(summary_path, ["T_s", "chi", "predicted_signal"],
                  [(self.total_duration, self.chi, self.predicted_signal)])


def _switch_times(seq: PulseSequence) -> tuple:
    """(t_0 .. t_{N+1}) boundaries of the sign-alternating intervals."""
    total = seq.total_duration
    if total <= 0.0:
        raise ValueError("sequence duration must be positive")
    centers = []
    t = 0.0
    for ev in seq.events:
        if ev.kind == "pulse":
            if not math.isclose(ev.flip, math.pi, rel_tol=1e-9, abs_tol=0.0):
                raise ValueError(
                    f"filter functions are defined for pi pulses only (flip = {ev.flip:.6g})")
            centers.append(t + ev.duration / 2.0)
        t += ev.duration
    return np.concatenate(([0.0], centers, [total])), total


def _f_from_bounds(bounds: np.ndarray, omega) -> np.ndarray:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    signs = (-1.0) ** np.arange(len(bounds) - 1)
    phases = np.exp(1j * w[:, None] * bounds[None, :])
    terms = (phases[:, 1:] - phases[:, :-1]) * signs[None, :]
    return np.abs(terms.sum(axis=1)) ** 2 / 2.0


def filter_function(seq: PulseSequence, omega) -> np.ndarray:
    """F(omega T) evaluated at the given angular frequencies."""
    bounds, _ = _switch_times(seq)
    out = _f_from_bounds(bounds, omega)
    return out if np.ndim(omega) else float(out[0])


def _signed_interval_sum(seq: PulseSequence) -> float:
    bounds, _ = _switch_times(seq)
    lengths = np.diff(bounds)
    return float(((-1.0) ** np.arange(len(lengths)) * lengths).sum())


def chi(seq: PulseSequence, model: NoiseModel, rtol: float = 1e-6) -> FilterResult:
    """Attenuation exponent for a sequence under a noise model.

    Static Gaussian noise is handled in closed form (it is the omega -> 0
    limit of the integral); spectral models use adaptive quadrature with the
    given relative tolerance.
    """
    bounds, total = _switch_times(seq)
    if model.kind == "none" or model.b == 0.0:
        chi_val = 0.0
    elif model.kind == "static_gaussian":
        chi_val = 0.5 * model.b**2 * _signed_interval_sum(seq) ** 2
    else:
        def integrand(w):
            return float(spectral_density(model, w) * _f_from_bounds(bounds, w)[0]) / w**2

        if model.kind == "hard_cutoff":
            val, _ = integrate.quad(integrand, 0.0, model.cutoff, epsrel=rtol, epsabs=0.0,
                                    limit=800)
            chi_val = 2.0 * val
        else:
            # One panel over the filter's structured region (with breakpoints
            # at the bath-correlation scale, which can sit far below the
            # filter scale), then geometric chunks for the oscillatory tail.
            edge = 4.0 * math.pi * len(bounds) / total
            knots = sorted(w for w in (1.0 / model.tau_c, 10.0 / model.tau_c, math.pi / total)
                           if 0.0 < w < edge)
            val, _ = integrate.quad(integrand, 0.0, edge, epsrel=rtol, epsabs=0.0,
                                    limit=800, points=knots or None)
            lo = edge
            for _ in range(40):
                hi = 2.0 * lo
                piece, _ = integrate.quad(integrand, lo, hi, epsrel=rtol, epsabs=0.0,
                                          limit=800)
                val += piece
                lo = hi
                if abs(piece) < 0.25 * rtol * abs(val):
                    break
            chi_val = 2.0 * val

    grid = np.logspace(REPORT_GRID_DECADES[0], REPORT_GRID_DECADES[1],
                       REPORT_GRID_POINTS) / total
    return FilterResult(chi=float(chi_val), predicted_signal=float(math.exp(-chi_val)),
                        total_duration=total, omega=grid, f=filter_function(seq, grid))
