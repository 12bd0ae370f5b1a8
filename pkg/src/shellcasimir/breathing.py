"""Harmonic breathing of the shells: closed-form particle numbers and resonance tooling.

Both shells follow ``r_alpha(t) = r_alpha (1 + eps_alpha sin(varpi t))``.
Resonance with the mode pair ``(s, s')`` occurs at
``varpi = omega_ls(0) + omega_ls'(0)`` and the particle number then grows as
``(sum_alpha c^alpha_(ss') r_alpha eps_alpha varpi t)^2`` in the printed law.
"""
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .coupling import c_alpha, harmonic_motion, sensitivities
from .spectrum import ShellGeometry, find_eigenfrequencies

SCENARIOS = ("a", "b", "c", "d")
_SCENARIO_NAMES = {
    "a": "inner shell only",
    "b": "outer shell only",
    "c": "both shells in phase",
    "d": "both shells out of phase",
}
EPS_LIMIT = 0.1
EPS_WARN = 0.01


@dataclass(frozen=True)
class Scenario:
    """One of the four breathing scenarios with amplitude ``eps``."""

    tag: str
    eps: float

    def __post_init__(self):
        if self.tag not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.tag!r}")

    @property
    def amplitudes(self):
        """``(eps_inner, eps_outer)``."""
        e = self.eps
        return {"a": (e, 0.0), "b": (0.0, e), "c": (e, e), "d": (e, -e)}[self.tag]

    @property
    def description(self):
        return _SCENARIO_NAMES[self.tag]


def _scenario(scenario, eps):
    return scenario if isinstance(scenario, Scenario) else Scenario(scenario, eps)


@dataclass(frozen=True)
class BreathingMotion:
    geometry: ShellGeometry
    eps_inner: float
    eps_outer: float
    varpi: float

    def __post_init__(self):
        for e in (self.eps_inner, self.eps_outer):
            if not np.isfinite(e) or abs(e) > EPS_LIMIT:
                raise ValueError(f"oscillation amplitude {e!r} outside |eps| <= {EPS_LIMIT}")
            if abs(e) > EPS_WARN:
                warnings.warn(f"amplitude {e} is not small; perturbative results degrade", stacklevel=3)
        if not self.varpi > 0:
            raise ValueError("varpi must be positive")
        g = self.geometry
        if g.r_outer * (1 - abs(self.eps_outer)) <= g.r_inner * (1 + abs(self.eps_inner)):
            raise ValueError("shells would touch during the oscillation")

    @classmethod
    def from_scenario(cls, geometry, scenario, eps, varpi):
        ei, eo = _scenario(scenario, eps).amplitudes
        return cls(geometry, ei, eo, varpi)

    @cached_property
    def motion(self):
        return harmonic_motion(self.geometry, self.eps_inner, self.eps_outer, self.varpi)

    def amplitude(self, c_inner, c_outer):
        """``sum_alpha c^alpha r_alpha eps_alpha``."""
        g = self.geometry
        return c_inner * g.r_inner * self.eps_inner + c_outer * g.r_outer * self.eps_outer


@dataclass(frozen=True)
class ResonancePrediction:
    """Resonance of the pair ``(s, s')`` and its quadratic growth law."""

    l: int
    s: int
    s_prime: int
    frequency: float
    amplitude: float

    def N(self, t, prefactor=1.0):
        """Particle number ``prefactor * (amplitude * frequency * t)^2`` at resonance."""
        return prefactor * (self.amplitude * self.frequency * np.asarray(t)) ** 2


def resonance(l, s, s_prime, motion):
    """Predict the resonance ``varpi = omega_ls(0) + omega_ls'(0)`` for ``motion``'s amplitudes."""
    co = c_alpha(l, s, s_prime, motion.geometry)
    omega = find_eigenfrequencies(motion.geometry, l, max(s, s_prime))
    return ResonancePrediction(l, s, s_prime, omega[s - 1] + omega[s_prime - 1],
                               motion.amplitude(co.c_inner, co.c_outer))


def _growth_factor(delta, t):
    # (exp(i delta t) - 1) / delta, written so that delta -> 0 is regular
    return 1j * t * np.exp(0.5j * delta * t) * np.sinc(delta * t / (2 * np.pi))


def closed_form_N(l, s, motion, t, s_prime_max=8, prefactor=1.0):
    """Second-order particle number of mode ``(l, s)`` for breathing ``motion``.

    Frequencies are frozen at ``t = 0``; terms ``s' <= s_prime_max`` are summed.
    ``prefactor = 1`` reproduces the printed two-denominator law; direct
    evaluation of the first-order Bogoliubov integral equals
    ``PRINTED_PREFACTOR_RATIO`` times it.
    """
    n = max(s, s_prime_max)
    sens = sensitivities(motion.geometry, l, n)
    sym = 0.5 * (sens.coefficients + np.swapaxes(sens.coefficients, 1, 2))
    amp = motion.amplitude(sym[0, s - 1, :s_prime_max], sym[1, s - 1, :s_prime_max]) * motion.varpi
    pair = sens.omega[s - 1] + sens.omega[:s_prime_max]
    t = np.asarray(t, dtype=float)
    w = motion.varpi
    bracket = _growth_factor(pair[:, None] + w, t.ravel()[None, :]) + _growth_factor(pair[:, None] - w, t.ravel()[None, :])
    total = prefactor * np.sum(np.abs(bracket) ** 2 * (amp**2)[:, None], axis=0)
    return float(total[0]) if t.ndim == 0 else total.reshape(t.shape)


def l0_resonance_frequency(s, s_prime, geometry):
    return (s + s_prime) * np.pi * geometry.c / geometry.gap


def second_factor(geometry, eps_inner, eps_outer, s, s_prime):
    """``[(eps_o r_o - (-1)^{s+s'} eps_i r_i) / (r_o - r_i)]^2``."""
    sign = (-1) ** (s + s_prime)
    return ((eps_outer * geometry.r_outer - sign * eps_inner * geometry.r_inner) / geometry.gap) ** 2


def l0_coefficient(s, s_prime, geometry, eps_inner, eps_outer):
    """``N / (varpi t)^2`` of the l = 0 resonant law."""
    return s * s_prime / (s + s_prime) ** 2 * second_factor(geometry, eps_inner, eps_outer, s, s_prime)


def resonant_N_l0(s, s_prime, scenario, geometry, eps, t, varpi):
    """Closed-form l = 0 resonant particle number for one scenario (printed law).

    ``varpi`` must equal ``(s + s') pi c / (r_o - r_i)``.
    """
    target = l0_resonance_frequency(s, s_prime, geometry)
    if not np.isclose(varpi, target, rtol=1e-9, atol=0):
        raise ValueError(f"varpi = {varpi} is not the l = 0 resonance {target} of the pair ({s}, {s_prime})")
    ei, eo = _scenario(scenario, eps).amplitudes
    return l0_coefficient(s, s_prime, geometry, ei, eo) * (varpi * np.asarray(t)) ** 2


def second_factor_bound_check(geometry, eps_inner, eps_outer, s, s_prime):
    """True iff the second factor of the l = 0 law is at most one.

    Requires ``r_o - r_i >= |r_o eps_o| + |r_i eps_i|`` (shells never closer than touching).
    """
    reach = abs(geometry.r_outer * eps_outer) + abs(geometry.r_inner * eps_inner)
    if geometry.gap < reach * (1 - 1e-12):
        raise ValueError("amplitudes exceed the gap: the shells would cross")
    return bool(second_factor(geometry, eps_inner, eps_outer, s, s_prime) <= 1 + 1e-12)


def shift_threshold(s):
    return np.sqrt(1 + 1 / (4 * s * (s + 1)))


def principal_resonance_shift(s, geometry, eps, eps_inner=None, eps_outer=None):
    """Whether the out-of-phase principal resonance moves from ``s' = s`` to ``s' = s + 1`` (l = 0).

    By default the shells have amplitudes ``(eps, -eps)``; pass
    ``eps_inner``/``eps_outer`` for other amplitudes. With opposite signs
    ``|v_o + v_i| < |v_o - v_i|``, so the shift needs same-sign velocities.
    The velocity-ratio test is cross-checked against the closed-form coefficients.
    """
    ei = eps if eps_inner is None else eps_inner
    eo = -eps if eps_outer is None else eps_outer
    v_i = ei * geometry.r_inner
    v_o = eo * geometry.r_outer
    if v_o == v_i:
        warnings.warn("condition vacuously extreme: v_o == v_i", RuntimeWarning, stacklevel=2)
        return True
    ratio = abs((v_o + v_i) / (v_o - v_i))
    shifted = bool(ratio > shift_threshold(s))
    here = l0_coefficient(s, s, geometry, ei, eo)
    there = l0_coefficient(s, s + 1, geometry, ei, eo)
    if not np.isclose(here, there, rtol=1e-9) and shifted != (there > here):
        raise RuntimeError("velocity-ratio criterion disagrees with the closed-form comparison")
    return shifted


def no_creation_condition(l, s, s_prime, geometry, eps_inner, eps_outer, rtol=1e-6):
    """True when the resonant amplitude cancels: ``r_o / r_i = -eps_i c^i / (eps_o c^o) > 1``."""
    if eps_outer == 0:
        return False
    co = c_alpha(l, s, s_prime, geometry)
    if co.c_outer == 0:
        return False
    target = -eps_inner * co.c_inner / (eps_outer * co.c_outer)
    return bool(target > 1 and np.isclose(geometry.ratio, target, rtol=rtol, atol=0))


class ScanRow(NamedTuple):
    scenario: str
    l: int
    s: int
    s_prime: int
    abscissa: float
    coefficient: float


def resonance_scan(l_max, s_max, scenario=None, geometry=None, eps=1e-3, prefactor=1.0):
    """Resonant abscissae ``varpi / omega_01(0)`` and growth coefficients ``N / (eps varpi t)^2``.

    ``scenario`` may be a tag, a :class:`Scenario` or None for all four. Rows
    come out in ``(scenario, l, s, s')`` lexicographic order.
    """
    geometry = geometry or ShellGeometry(1.0, 2.0)
    if scenario is None:
        tags = [Scenario(tag, eps) for tag in SCENARIOS]
    else:
        tags = [_scenario(scenario, eps)]
    if s_max < 1 or l_max < 0:
        return []
    omega01 = find_eigenfrequencies(geometry, 0, 1)[0]
    per_l = {}
    for l in range(l_max + 1):
        sens = sensitivities(geometry, l, s_max)
        per_l[l] = (sens.omega, 0.5 * (sens.coefficients + np.swapaxes(sens.coefficients, 1, 2)))
    rows = []
    for sc in tags:
        ei, eo = sc.amplitudes
        for l in range(l_max + 1):
            omega, sym = per_l[l]
            for s in range(1, s_max + 1):
                for sp in range(1, s_max + 1):
                    amp = sym[0, s - 1, sp - 1] * geometry.r_inner * ei + sym[1, s - 1, sp - 1] * geometry.r_outer * eo
                    coef = prefactor * (amp / sc.eps) ** 2 if sc.eps else 0.0
                    rows.append(ScanRow(sc.tag, l, s, sp, float((omega[s - 1] + omega[sp - 1]) / omega01), float(coef)))
    return rows
