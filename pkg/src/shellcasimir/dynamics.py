"""Particle creation: accumulated phases, first-order Bogoliubov coefficients,
the perturbative particle number and the full truncated Bogoliubov evolution.
"""
import threading
import weakref
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .coupling import DEFAULT_TRUNCATION, ModeTrack, mu_split
from .errors import IntegrationError
from .spectrum import Mode

UNITARITY_BUDGET = 1e-6
SIMPSON_POINTS_PER_PERIOD = 20
RK4_STEPS_PER_PERIOD = 40
# Ratio between |beta^(1)|^2 summed over s' and the printed breathing-mode
# closed forms; cos(wt) = (e^{iwt} + e^{-iwt}) / 2 contributes (1/2)^2.
PRINTED_PREFACTOR_RATIO = 0.25

_tracks = weakref.WeakKeyDictionary()
_tracks_lock = threading.Lock()


def mode_track(motion, l, n_modes, t_max=None):
    """Shared :class:`ModeTrack` for ``(motion, l)`` covering at least ``n_modes`` modes."""
    bounded = motion.descriptor in ("harmonic", "static") or motion.time_span is not None
    with _tracks_lock:
        per_motion = _tracks.setdefault(motion, {})
        for (ll, n, span), track in per_motion.items():
            if ll == l and n >= n_modes and (bounded or (span is not None and t_max is not None and span >= t_max)):
                return track
    span = None if bounded else t_max
    if not bounded and t_max is None:
        raise ValueError("custom motion laws need t_max to build the mode track")
    track = ModeTrack(motion, l, n_modes, t_max=span)
    with _tracks_lock:
        _tracks.setdefault(motion, {})[(l, n_modes, span)] = track
    return track


def _drive_frequency(motion):
    return motion.params.get("varpi", 0.0) if motion.descriptor == "harmonic" else 0.0


def _phases(track, times):
    """Accumulated phases ``Omega_s(t)`` (shape ``(T, S)``) at sorted ``times >= 0``."""
    times = np.asarray(times, dtype=float)
    edges = np.concatenate([[0.0], times])
    omega0 = track.omega(0.0)[0]
    if track.motion.is_static:
        return np.outer(times, omega0)
    x, w = quadrature.gauss_legendre(16)
    width = np.diff(edges)
    # split long gaps so each sub-panel sees at most a quarter drive period
    rate = max(_drive_frequency(track.motion), float(np.max(omega0)) * 1e-3, 1e-300)
    pieces = np.maximum(1, np.ceil(width * rate / (0.5 * np.pi)).astype(int))
    sub_edges = np.concatenate([[0.0]] + [
        np.linspace(a, b, n + 1)[1:] for a, b, n in zip(edges[:-1], edges[1:], pieces)
    ])
    half = 0.5 * np.diff(sub_edges)
    mid = 0.5 * (sub_edges[1:] + sub_edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    om = track.omega(nodes).reshape(mid.size, x.size, -1)
    panel = np.einsum("pns,n->ps", om, w) * half[:, None]
    cumulative = np.vstack([np.zeros((1, panel.shape[1])), np.cumsum(panel, axis=0)])
    ends = np.cumsum(pieces)
    return cumulative[ends]


def phase(mode, motion, t):
    """Accumulated phase ``Omega_ls(t) = int_0^t omega_ls(t1) dt1``."""
    if not isinstance(mode, Mode):
        mode = Mode(*mode)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    track = mode_track(motion, mode.l, mode.s, t_max=t)
    return float(_phases(track, [t])[0, mode.s - 1])


@dataclass(frozen=True)
class CreationNumber:
    mode: Mode
    t: float
    value: float
    method: str


def _simpson_grid(times, h_max):
    """Fine grid with an even number of uniform sub-steps inside every output interval."""
    edges = np.concatenate([[0.0], times])
    pieces = []
    ends = [0]
    for a, b in zip(edges[:-1], edges[1:]):
        n = 2 * max(1, int(np.ceil((b - a) / (2 * h_max))))
        pieces.append(np.linspace(a, b, n + 1)[1:])
        ends.append(ends[-1] + n)
    return np.concatenate([[0.0]] + pieces), np.array(ends)


def first_order_betas(l, s, motion, times, s_prime_max=DEFAULT_TRUNCATION,
                      points_per_period=SIMPSON_POINTS_PER_PERIOD):
    """``beta^(1)_{l s s'}(t)`` for ``s' = 1..s_prime_max`` at each of ``times``.

    Composite Simpson on a uniform sub-grid whose step is at most
    ``2 pi / (points_per_period * (omega_s(0) + omega_s'(0) + varpi))``.
    Returns a complex array of shape ``(len(times), s_prime_max)``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    order = np.argsort(times, kind="stable")
    sorted_times = times[order]
    n_modes = max(s, s_prime_max)
    out = np.zeros((times.size, s_prime_max), dtype=complex)
    if motion.is_static or sorted_times[-1] == 0:
        return out
    track = mode_track(motion, l, n_modes, t_max=float(sorted_times[-1]))
    omega0 = track.omega(0.0)[0]
    fastest = omega0[s - 1] + float(np.max(omega0[:s_prime_max])) + _drive_frequency(motion)
    h_max = 2 * np.pi / (points_per_period * fastest)
    grid, ends = _simpson_grid(sorted_times, h_max)
    big_omega = np.vstack([np.zeros((1, n_modes)), _phases(track, grid[1:])])
    _, mu_t = track.evaluate(grid)
    sym = mu_split(mu_t)[0][:, s - 1, :s_prime_max]
    integrand = np.exp(1j * (big_omega[:, s - 1, None] + big_omega[:, :s_prime_max])) * sym
    # Simpson over consecutive pairs of sub-steps
    h = np.diff(grid)[::2]
    pair = (h / 3)[:, None] * (integrand[:-2:2] + 4 * integrand[1:-1:2] + integrand[2::2])
    cumulative = np.vstack([np.zeros((1, s_prime_max)), np.cumsum(pair, axis=0)])
    out[order] = cumulative[ends[1:] // 2]
    return out


def beta_first_order(l, s, s_prime, motion, t):
    """First-order Bogoliubov coefficient ``int_0^t exp{i[Omega_s + Omega_s']} mu_(ss') dt1``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return complex(first_order_betas(l, s, motion, [t], s_prime_max=max(s, s_prime))[0, s_prime - 1])


def perturbative_curve(l, s, motion, times, s_prime_max=DEFAULT_TRUNCATION):
    """Perturbative particle number of mode ``(l, s)`` at each of ``times``."""
    return np.sum(np.abs(first_order_betas(l, s, motion, times, s_prime_max)) ** 2, axis=1)


def particle_number_perturbative(l, s, motion, t, s_prime_max=DEFAULT_TRUNCATION):
    """``N_ls(t) = sum_{s' <= s_prime_max} |beta^(1)_{ss'}(t)|^2``."""
    if s_prime_max < 1:
        raise ValueError("s_prime_max must be >= 1")
    value = float(perturbative_curve(l, s, motion, [t], s_prime_max)[0])
    return CreationNumber(Mode(l, s), float(t), value, "perturbative")


# --------------------------------------------------------------------------
# full Bogoliubov evolution


@dataclass(frozen=True)
class BogoliubovState:
    """Truncated Bogoliubov matrices at time ``t`` (lab frame)."""

    l: int
    t: float
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    max_unitarity_deviation: float = 0.0

    @classmethod
    def initial(cls, l, n_modes):
        return cls(l, 0.0, np.eye(n_modes, dtype=complex), np.zeros((n_modes, n_modes), dtype=complex))

    def unitarity(self):
        """Row sums ``sum_q |alpha_sq|^2 - |beta_sq|^2`` (ideally all one)."""
        return np.sum(np.abs(self.alpha) ** 2 - np.abs(self.beta) ** 2, axis=1)


def _rhs(a, b, anti, sym, phase):
    rot = phase[:, None] * np.conj(phase)[None, :]
    pair = phase[:, None] * phase[None, :]
    m1 = anti * rot
    m2 = sym * pair
    return m1 @ a + m2 @ np.conj(b), m1 @ b + m2 @ np.conj(a)


def evolve_history(l, motion, times, n_modes=DEFAULT_TRUNCATION, steps_per_period=RK4_STEPS_PER_PERIOD,
                   unitarity_budget=UNITARITY_BUDGET):
    """States of the truncated Bogoliubov system at each of the sorted ``times``.

    Classical RK4 with a fixed step no larger than
    ``2 pi / (steps_per_period * max(omega_q(0), varpi))``, applied to the
    rotating-frame amplitudes ``alpha_sq e^{i Omega_s}`` and
    ``beta_sq e^{i Omega_s}`` so the free rotation is carried exactly.
    """
    if n_modes < 2:
        raise ValueError("truncation must keep at least 2 modes")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and sorted")
    if motion.is_static:
        track = mode_track(motion, l, n_modes)
        omega0 = track.omega(0.0)[0]
        return [BogoliubovState(l, float(t), np.diag(np.exp(-1j * omega0 * t)),
                                np.zeros((n_modes, n_modes), dtype=complex)) for t in times]
    t_end = float(times[-1]) if times.size else 0.0
    track = mode_track(motion, l, n_modes, t_max=max(t_end, 1e-300))
    omega0 = track.omega(0.0)[0]
    fastest = max(float(np.max(omega0)), _drive_frequency(motion))
    h_max = 2 * np.pi / (steps_per_period * fastest)
    # step grid hitting every requested time, plus midpoints for the RK stages
    edges = np.concatenate([[0.0], times])
    counts = [max(1, int(np.ceil((b - a) / h_max))) if b > a else 0 for a, b in zip(edges[:-1], edges[1:])]
    nodes = [np.array([0.0])]
    for a, b, n in zip(edges[:-1], edges[1:], counts):
        if n:
            nodes.append(np.linspace(a, b, 2 * n + 1)[1:])
    stage_t = np.concatenate(nodes)
    big_omega = np.vstack([np.zeros((1, n_modes)), _phases(track, stage_t[1:])])
    rot = np.exp(1j * big_omega)
    _, mu_t = track.evaluate(stage_t)
    sym_t, anti_t = mu_split(mu_t)

    a = np.eye(n_modes, dtype=complex)
    b = np.zeros((n_modes, n_modes), dtype=complex)
    worst = 0.0
    states = []
    idx = 0
    for t_out, n in zip(times, counts):
        for _ in range(n):
            h = stage_t[idx + 2] - stage_t[idx]
            k1a, k1b = _rhs(a, b, anti_t[idx], sym_t[idx], rot[idx])
            k2a, k2b = _rhs(a + 0.5 * h * k1a, b + 0.5 * h * k1b, anti_t[idx + 1], sym_t[idx + 1], rot[idx + 1])
            k3a, k3b = _rhs(a + 0.5 * h * k2a, b + 0.5 * h * k2b, anti_t[idx + 1], sym_t[idx + 1], rot[idx + 1])
            k4a, k4b = _rhs(a + h * k3a, b + h * k3b, anti_t[idx + 2], sym_t[idx + 2], rot[idx + 2])
            a = a + (h / 6) * (k1a + 2 * k2a + 2 * k3a + k4a)
            b = b + (h / 6) * (k1b + 2 * k2b + 2 * k3b + k4b)
            idx += 2
            dev = float(np.max(np.abs(np.sum(np.abs(a) ** 2 - np.abs(b) ** 2, axis=1) - 1.0)))
            worst = max(worst, dev)
            if dev > unitarity_budget:
                report = {"t": float(stage_t[idx]), "deviation": dev, "budget": unitarity_budget,
                          "step": float(h)}
                raise IntegrationError(
                    f"unitarity drift {dev:.3e} exceeds budget {unitarity_budget:.1e} at t = {stage_t[idx]:.6g}; "
                    "increase steps_per_period",
                    report,
                )
        back = np.exp(-1j * big_omega[idx])[:, None]
        states.append(BogoliubovState(l, float(t_out), back * a, back * b, worst))
    return states


def evolve_bogoliubov_full(l, motion, t_final, S_trunc=DEFAULT_TRUNCATION, **kwargs):
    """Integrate the truncated Bogoliubov system from the vacuum up to ``t_final``."""
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if t_final == 0:
        if S_trunc < 2:
            raise ValueError("truncation must keep at least 2 modes")
        return BogoliubovState.initial(l, S_trunc)
    return evolve_history(l, motion, [t_final], S_trunc, **kwargs)[0]


def particle_number_full(state, s):
    """``N_ls = sum_q |beta_sq|^2`` from an evolved state."""
    value = float(np.sum(np.abs(state.beta[s - 1]) ** 2))
    return CreationNumber(Mode(state.l, s), state.t, value, "full")
