"""Experiment configuration documents.

Flat ``key = value`` text, ``#`` comments.  Units are carried in the key
names and converted to SI here, in one place:

* ``*_us`` / ``*_ms`` / ``*_s``  -- durations in microseconds / milliseconds / seconds;
* ``*_khz``                      -- frequencies in kHz (cyclic), converted to rad/s.

Example::

    # system
    spins = 4
    offsets_khz = 0
    couplings = random
    coupling_scale_khz = 1.0
    coupling_seed = 7

    # decoupling block
    scheme = rudd
    n = 7
    t_us = 58.1
    tau_pi_us = 4.3
    cycles = 1

    # noise
    noise = ornstein_uhlenbeck
    noise_b_khz = 9.0
    noise_tau_c_us = 200
    seed = 1234
    n_traj = 200

    # spin counting
    m_cycles = 5
    delta_us = 2
    tau_90_us = 2.15
    n_max = 64
    delta_omega_khz = 200

Explicit couplings are given as the upper triangle, rows separated by
semicolons: ``couplings_khz = 1.0 0.5 0.2; 0.3 0.1; 0.7`` for four spins.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiment import MQCConfig
from .noise import NoiseModel
from .propagate import PropagationConfig
from .sequence import DDScheme, SCHEME_NAMES


class ConfigError(ValueError):
    """Carries every offending key, not just the first."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


_DURATION_SUFFIX = {"_s": 1.0, "_ms": 1e-3, "_us": 1e-6, "_ns": 1e-9}

_UNIT_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*(ns|us|ms|s)\s*$")


def parse_duration(text: str) -> float:
    """Parse a CLI duration literal like '4.3us' or '58.1us' into seconds."""
    m = _UNIT_RE.match(text)
    if not m:
        try:
            return float(text)  # bare number = seconds
        except ValueError:
            raise ValueError(f"cannot parse duration {text!r}") from None
    return float(m.group(1)) * {"ns": 1e-9, "us": 1e-6, "ms": 1e-3, "s": 1.0}[m.group(2)]


def read_document(path) -> dict:
    """Key-value lines into a {key: raw string} dict."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"line {lineno}: expected 'key = value', got {raw!r}"])
        key, value = line.split("=", 1)
        out[key.strip().lower()] = value.strip()
    return out


def _si_value(key: str, raw: str) -> float:
    """Convert one scalar according to the unit suffix in its key name."""
    v = float(raw)
    for suffix, factor in _DURATION_SUFFIX.items():
        if key.endswith(suffix):
            return v * factor
    if key.endswith("_khz"):
        return v * 2.0 * math.pi * 1e3
    return v


@dataclass(frozen=True)
class ResolvedConfig:
    """SI-converted configuration plus the constructed domain objects."""

    system: "object"
    noise: NoiseModel
    scheme: DDScheme | None
    mqc: MQCConfig | None
    prop: PropagationConfig
    readout_times: list
    resolved: dict  # flat manifest of everything, SI units


def _get(doc, problems, key, kind=float, default=None, required=False):
    if key not in doc:
        if required:
            problems.append(f"missing required key: {key}")
        return default
    raw = doc[key]
    try:
        if kind is bool:
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is str:
            return raw.lower()
        return _si_value(key, raw)
    except ValueError:
        problems.append(f"cannot parse {key} = {raw!r}")
        return default


def _parse_offsets(doc, problems, spins):
    raw = doc.get("offsets_khz", "0")
    try:
        vals = [float(x) for x in raw.replace(",", " ").split()]
    except ValueError:
        problems.append(f"cannot parse offsets_khz = {raw!r}")
        return np.zeros(spins)
    if len(vals) == 1:
        vals = vals * spins
    if len(vals) != spins:
        problems.append(f"offsets_khz needs 1 or {spins} values, got {len(vals)}")
        return np.zeros(spins)
    return 2.0 * math.pi * 1e3 * np.asarray(vals)


def _parse_couplings(doc, problems, spins):
    mode = doc.get("couplings", "explicit" if "couplings_khz" in doc else "zero").lower()
    if mode == "random":
        scale = _get(doc, problems, "coupling_scale_khz", float, default=2.0 * math.pi * 1e3)
        seed = _get(doc, problems, "coupling_seed", int, default=0)
        rng = np.random.default_rng(seed)
        d = np.triu(rng.uniform(-scale, scale, size=(spins, spins)), k=1)
        return d + d.T
    if mode == "zero":
        return np.zeros((spins, spins))
    raw = doc.get("couplings_khz")
    if raw is None:
        problems.append("couplings = explicit requires couplings_khz")
        return np.zeros((spins, spins))
    d = np.zeros((spins, spins))
    rows = [r for r in raw.split(";")]
    if len(rows) != spins - 1:
        problems.append(f"couplings_khz needs {spins - 1} semicolon-separated rows")
        return d
    try:
        for i, row in enumerate(rows):
            vals = [float(x) for x in row.replace(",", " ").split()]
            if len(vals) != spins - 1 - i:
                raise ValueError(row)
            for k, v in enumerate(vals):
                d[i, i + 1 + k] = d[i + 1 + k, i] = 2.0 * math.pi * 1e3 * v
    except ValueError:
        problems.append(f"cannot parse couplings_khz = {raw!r}")
    return d


def resolve(doc: dict, seed_override: int | None = None,
            require: tuple = ()) -> ResolvedConfig:
    """Validate a parsed document and build the domain objects.

    ``require`` lists the sections ("scheme", "mqc") that must be present for
    the subcommand at hand; every problem found is reported together.
    """
    from .system import SpinSystem

    problems: list = []
    spins = _get(doc, problems, "spins", int, required=True)
    system = None
    if spins is not None:
        offsets = _parse_offsets(doc, problems, spins)
        couplings = _parse_couplings(doc, problems, spins)
        if not problems:
            system = SpinSystem(spins, offsets, couplings)

    noise_kind = _get(doc, problems, "noise", str, default="none")
    alias = {"ou": "ornstein_uhlenbeck", "static": "static_gaussian"}
    noise_kind = alias.get(noise_kind, noise_kind)
    seed = _get(doc, problems, "seed", int, default=0)
    if seed_override is not None:
        seed = seed_override
    noise = None
    try:
        noise = NoiseModel(
            kind=noise_kind,
            b=_get(doc, problems, "noise_b_khz", float, default=0.0),
            tau_c=_get(doc, problems, "noise_tau_c_us", float),
            cutoff=_get(doc, problems, "noise_cutoff_khz", float),
            seed=seed,
            correlated_across_spins=_get(doc, problems, "noise_correlated", bool, default=False),
        )
    except ValueError as exc:
        problems.append(f"noise: {exc}")

    scheme = None
    name = _get(doc, problems, "scheme", str, default=None,
                required="scheme" in require)
    if name is not None:
        if name not in SCHEME_NAMES:
            problems.append(f"scheme = {name!r} not one of {SCHEME_NAMES}")
        else:
            try:
                scheme = DDScheme(
                    name=name,
                    n=_get(doc, problems, "n", int, default=1),
                    tau=_get(doc, problems, "tau_us", float),
                    total_duration=_get(doc, problems, "t_us", float),
                    tau_pi=_get(doc, problems, "tau_pi_us", float, default=0.0),
                    cycles=_get(doc, problems, "cycles", int, default=1),
                )
            except ValueError as exc:
                problems.append(f"scheme: {exc}")

    n_traj = _get(doc, problems, "n_traj", int, default=1)
    prop = None
    try:
        prop = PropagationConfig(
            n_traj=n_traj,
            dt=_get(doc, problems, "dt_us", float),
            ideal_pulses=_get(doc, problems, "ideal_pulses", bool, default=False),
            include_dipolar_during_dd=_get(doc, problems, "include_dipolar_during_dd",
                                           bool, default=True),
        )
    except ValueError as exc:
        problems.append(f"propagation: {exc}")

    mqc = None
    if "mqc" in require:
        try:
            mqc = MQCConfig(
                m=_get(doc, problems, "m_cycles", int, default=5, required=True),
                delta=_get(doc, problems, "delta_us", float, default=2e-6, required=True),
                tau_90=_get(doc, problems, "tau_90_us", float, default=0.0),
                n_max=_get(doc, problems, "n_max", int, default=64, required=True),
                delta_omega=_get(doc, problems, "delta_omega_khz", float,
                                 default=2.0 * math.pi * 200e3),
                scheme=scheme,
                t_r_mode=_get(doc, problems, "t_r_mode", str, default="projection"),
                t_r=_get(doc, problems, "t_r_ms", float, default=5e-3),
                seed=seed,
                n_traj=n_traj,
                dt=_get(doc, problems, "dt_us", float),
                ideal_pulses=_get(doc, problems, "ideal_pulses", bool, default=False),
                include_dipolar_during_dd=_get(doc, problems, "include_dipolar_during_dd",
                                               bool, default=True),
                encode_t1=_get(doc, problems, "encode_t1", bool, default=True),
                dd_after_t1=_get(doc, problems, "dd_after_t1", bool, default=False),
            )
        except ValueError as exc:
            problems.append(f"mqc: {exc}")

    raw_times = doc.get("readout_times_us", "")
    readout_times = []
    if raw_times:
        try:
            readout_times = [1e-6 * float(x) for x in raw_times.replace(",", " ").split()]
        except ValueError:
            problems.append(f"cannot parse readout_times_us = {raw_times!r}")

    if problems:
        raise ConfigError(problems)

    resolved = {"spins": spins, "seed": seed, "noise_kind": noise.kind,
                "noise_b_rad_s": noise.b, "noise_tau_c_s": noise.tau_c,
                "noise_cutoff_rad_s": noise.cutoff,
                "noise_correlated": noise.correlated_across_spins,
                "n_traj": n_traj}
    if system is not None:
        resolved["offsets_rad_s"] = list(np.round(system.offsets, 12))
        resolved["couplings_rad_s"] = [list(np.round(r, 12)) for r in system.couplings]
    if scheme is not None:
        resolved.update({"scheme": scheme.name, "n": scheme.n, "tau_s": scheme.tau,
                         "t_s": scheme.total_duration, "tau_pi_s": scheme.tau_pi,
                         "cycles": scheme.cycles})
    if mqc is not None:
        resolved.update({"m_cycles": mqc.m, "delta_s": mqc.delta, "tau_90_s": mqc.tau_90,
                         "n_max": mqc.n_max, "delta_omega_rad_s": mqc.delta_omega,
                         "t_r_mode": mqc.t_r_mode, "t_r_s": mqc.t_r,
                         "encode_t1": mqc.encode_t1, "dd_after_t1": mqc.dd_after_t1})
    resolved.update({"ideal_pulses": prop.ideal_pulses,
                     "include_dipolar_during_dd": prop.include_dipolar_during_dd,
                     "dt_s": prop.dt})
    return ResolvedConfig(system=system, noise=noise, scheme=scheme, mqc=mqc, prop=prop,
                          readout_times=readout_times, resolved=resolved)


def write_manifest(path, resolved: dict) -> None:
    """Record every resolved parameter, one per line, sorted by key."""
    lines = [f"{k} = {resolved[k]}" for k in sorted(resolved)]
    Path(path).write_text("\n".join(lines) + "\n")
