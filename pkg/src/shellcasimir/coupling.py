"""Shell motion laws and the intermode coupling they induce.

For moving shells the instantaneous modes depend on time only through the
radii, so the coupling is linear in the shell velocities:

    mu_{ss'}(t) = sum_alpha c^alpha_{ss'}(r_i(t), r_o(t)) * dr_alpha/dt

with the sensitivity coefficients

    c^alpha_{ss}  = (d omega_s / d r_alpha) / (2 omega_s)
    c^alpha_{ss'} = sqrt(omega_s / omega_s') * int r^2 F_s' (dF_s / d r_alpha) dr

where ``dF_s/dr_alpha`` is the total derivative: the explicit dependence at
fixed omega plus ``(d omega / d r_alpha) dF/d omega``.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from . import quadrature
from .specfun import bessel_pair
from .spectrum import (
    RadialMode,
    ShellGeometry,
    normalisation,
    wavenumber_gradient,
    wavenumbers,
)

DEFAULT_TRUNCATION = 8
_ALPHAS = ("inner", "outer")


# --------------------------------------------------------------------------
# motion laws


class MotionLaw:
    """Time-dependent shell radii with their velocities.

    Parameters
    ----------
    r_inner, r_outer, v_inner, v_outer : callable
        Functions of time (accepting numpy arrays).
    c : float
        Wave speed.
    descriptor : str
        ``"static"``, ``"harmonic"``, ``"tabulated"`` or ``"custom"``.
    params : dict, optional
        Parameters of the descriptor (``eps_inner``, ``eps_outer``, ``varpi``
        for harmonic motion).
    check_times : array, optional
        Where to verify the velocities against central differences.
    velocity_rtol : float
        Relative tolerance for that check.
    """

    def __init__(self, r_inner, r_outer, v_inner, v_outer, c=1.0, descriptor="custom",
                 params=None, check_times=None, velocity_rtol=1e-6, time_span=None):
        self._r = (r_inner, r_outer)
        self._v = (v_inner, v_outer)
        self.c = float(c)
        self.descriptor = descriptor
        self.params = dict(params or {})
        self.time_span = time_span
        self.geometry = ShellGeometry(float(r_inner(0.0)), float(r_outer(0.0)), self.c)
        if check_times is not None:
            self._check(np.asarray(check_times, dtype=float), velocity_rtol)

    def _check(self, times, rtol):
        ri, ro = self.radii(times)
        if np.any(ri >= ro) or np.any(ri <= 0):
            raise ValueError("shells must satisfy 0 < r_inner(t) < r_outer(t)")
        span = max(float(np.ptp(times)), 1.0)
        h = 1e-5 * span
        if self.descriptor == "harmonic":
            h = 1e-4 / self.params["varpi"]
        for name, pos, vel in zip(_ALPHAS, self._r, self._v):
            fd = (np.asarray(pos(times + h)) - np.asarray(pos(times - h))) / (2 * h)
            given = np.asarray(vel(times), dtype=float)
            scale = max(float(np.max(np.abs(given))), float(np.max(np.abs(fd))), 1e-300)
            # central differences of the radii lose ~1e3 ulp / h to rounding
            noise = 1e3 * np.finfo(float).eps * float(np.max(np.abs(pos(times)))) / h
            bad = np.abs(fd - given) > rtol * scale + noise
            if np.any(bad) and scale > 1e-12:
                t_bad = float(times[np.argmax(bad)])
                raise ValueError(f"{name} velocity inconsistent with radius at t = {t_bad:g}")

    def radii(self, t):
        return np.asarray(self._r[0](t), dtype=float), np.asarray(self._r[1](t), dtype=float)

    def velocities(self, t):
        return np.asarray(self._v[0](t), dtype=float), np.asarray(self._v[1](t), dtype=float)

    def geometry_at(self, t):
        ri, ro = self.radii(float(t))
        return ShellGeometry(float(ri), float(ro), self.c)

    @property
    def is_static(self):
        return self.descriptor == "static"

    def __repr__(self):
        return f"MotionLaw({self.descriptor}, {self.geometry}, {self.params})"


def static_motion(geometry):
    """Shells at rest."""
    ri, ro = geometry.r_inner, geometry.r_outer
    return MotionLaw(
        lambda t: np.full(np.shape(t), ri), lambda t: np.full(np.shape(t), ro),
        lambda t: np.zeros(np.shape(t)), lambda t: np.zeros(np.shape(t)),
        c=geometry.c, descriptor="static",
    )


def harmonic_motion(geometry, eps_inner, eps_outer, varpi):
    """Breathing motion ``r_alpha(t) = r_alpha (1 + eps_alpha sin(varpi t))``."""
    if not varpi > 0:
        raise ValueError("drive frequency varpi must be positive")
    ri, ro = geometry.r_inner, geometry.r_outer
    if ro * (1 - abs(eps_outer)) <= ri * (1 + abs(eps_inner)):
        raise ValueError("oscillation amplitudes let the shells touch")
    params = {"eps_inner": float(eps_inner), "eps_outer": float(eps_outer), "varpi": float(varpi)}
    period = 2 * np.pi / varpi
    return MotionLaw(
        lambda t: ri * (1 + eps_inner * np.sin(varpi * np.asarray(t))),
        lambda t: ro * (1 + eps_outer * np.sin(varpi * np.asarray(t))),
        lambda t: ri * eps_inner * varpi * np.cos(varpi * np.asarray(t)),
        lambda t: ro * eps_outer * varpi * np.cos(varpi * np.asarray(t)),
        c=geometry.c, descriptor="harmonic", params=params,
        check_times=np.linspace(0, period, 17),
    )


def tabulated_motion(t, r_inner, r_outer, v_inner, v_outer, c=1.0, velocity_rtol=1e-2):
    """Motion from table rows ``(t, r_i, r_o, v_i, v_o)``, cubic Hermite in between.

    The velocity columns are compared with the derivative of a cubic spline
    through the radius columns; a row that disagrees by more than
    ``velocity_rtol`` (relative to the column's velocity scale) is rejected.
    """
    t = np.asarray(t, dtype=float)
    cols = [np.asarray(a, dtype=float) for a in (r_inner, r_outer, v_inner, v_outer)]
    if t.ndim != 1 or t.size < 4 or any(col.shape != t.shape for col in cols):
        raise ValueError("trajectory needs at least 4 rows of 5 columns")
    if not np.all(np.isfinite(np.vstack([t] + cols))):
        raise ValueError("trajectory contains non-finite entries")
    if not np.all(np.diff(t) > 0):
        row = int(np.argmin(np.diff(t) > 0)) + 2
        raise ValueError(f"trajectory times must increase strictly (row {row})")
    if t[0] != 0:
        raise ValueError("trajectory must start at t = 0")
    ri, ro, vi, vo = cols
    bad = np.nonzero((ri <= 0) | (ri >= ro))[0]
    if bad.size:
        raise ValueError(f"row {bad[0] + 1}: need 0 < r_inner < r_outer")
    for name, pos, vel in (("inner", ri, vi), ("outer", ro, vo)):
        fd = CubicSpline(t, pos)(t, 1)
        scale = max(float(np.max(np.abs(vel))), float(np.max(np.abs(fd))),
                    float(np.ptp(pos)) / float(t[-1]), 1e-12 * float(np.max(pos)) / float(t[-1]))
        bad = np.nonzero(np.abs(fd - vel) > velocity_rtol * scale)[0]
        if bad.size:
            raise ValueError(
                f"row {bad[0] + 1}: {name} velocity {vel[bad[0]]:.6g} inconsistent with "
                f"radius derivative {fd[bad[0]]:.6g}"
            )
    spl_i = CubicHermiteSpline(t, ri, vi, extrapolate=False)
    spl_o = CubicHermiteSpline(t, ro, vo, extrapolate=False)

    def guard(fn):
        def wrapped(tt):
            tt = np.asarray(tt, dtype=float)
            if np.any(tt < t[0]) or np.any(tt > t[-1]):
                raise ValueError(f"time outside the tabulated range [0, {t[-1]:g}]")
            return fn(tt)
        return wrapped

    return MotionLaw(
        guard(spl_i), guard(spl_o), guard(spl_i.derivative()), guard(spl_o.derivative()),
        c=c, descriptor="tabulated", params={"rows": int(t.size)}, time_span=float(t[-1]),
    )


def load_trajectory(path, c=1.0, velocity_rtol=1e-2):
    """Read a whitespace/comma separated table ``t r_i r_o v_i v_o`` (``#`` comments)."""
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    for number, row in enumerate(rows, start=1):
        if len(row) != 5:
            raise ValueError(f"row {number}: expected 5 columns, found {len(row)}")
    data = np.array(rows, dtype=float)
    return tabulated_motion(*data.T, c=c, velocity_rtol=velocity_rtol)


# --------------------------------------------------------------------------
# sensitivities of the instantaneous modes


@dataclass(frozen=True)
class Sensitivities:
    """Everything the dynamics needs about one geometry and one order ``l``.

    ``domega[a, s]`` is ``d omega_s / d r_alpha`` and ``coefficients[a]`` the
    (unsymmetrised) matrix ``c^alpha_{ss'}``, with ``a = 0`` inner, ``1`` outer.
    """

    geometry: ShellGeometry
    l: int
    omega: np.ndarray
    domega: np.ndarray
    coefficients: np.ndarray


def _fields(l, k, r_inner, r):
    # G, dG/dr_inner (fixed k), dG/dk for every mode (rows) at nodes r (columns)
    x = np.outer(k, r)
    j, n, dj, dn = bessel_pair(l, x.ravel(), derivatives=True)
    j, n, dj, dn = (a.reshape(x.shape) for a in (j, n, dj, dn))
    ji, ni, dji, dni = (a[:, None] for a in bessel_pair(l, k * r_inner, derivatives=True))
    g = j * ni - ji * n
    g_inner = k[:, None] * (j * dni - dji * n)
    g_k = r * (dj * ni - ji * dn) + r_inner * (j * dni - dji * n)
    return g, g_inner, g_k


def _norm_derivatives(l, k, r_inner, r_outer, tol):
    n_modes = k.size

    def estimate(r, w):
        g, gi, gk = _fields(l, k, r_inner, r)
        wr = w * r**2
        return np.concatenate([(g * g) @ wr, (g * gi) @ wr, (g * gk) @ wr])

    panels = max(2, int(np.ceil(k[-1] * (r_outer - r_inner) / np.pi)))
    est = quadrature.integrate_with(estimate, r_inner, r_outer, panels=panels, tol=tol)
    integral, j_inner, j_k = est.reshape(3, n_modes)
    norm = -1.0 / np.sqrt(integral)
    g_end = _fields(l, k, r_inner, np.array([r_outer]))[0][:, 0]
    return norm, -norm**3 * j_inner, -0.5 * norm**3 * g_end**2 * r_outer**2, -norm**3 * j_k


def sensitivities(geometry, l, n_modes=DEFAULT_TRUNCATION, tol=1e-12):
    """Frequencies, their radius derivatives and the ``c^alpha`` matrices for ``s <= n_modes``."""
    ri, ro, c = geometry.r_inner, geometry.r_outer, geometry.c
    k = np.array(wavenumbers(geometry, l, n_modes))
    dk_i, dk_o = wavenumber_gradient(l, k, ri, ro)
    norm, dn_i, dn_o, dn_k = _norm_derivatives(l, k, ri, ro, tol)

    def estimate(r, w):
        g, gi, gk = _fields(l, k, ri, r)
        f = norm[:, None] * g
        f_k = dn_k[:, None] * g + norm[:, None] * gk
        t_inner = dn_i[:, None] * g + norm[:, None] * gi + dk_i[:, None] * f_k
        t_outer = dn_o[:, None] * g + dk_o[:, None] * f_k
        fw = f * (w * r**2)
        return np.stack([t_inner @ fw.T, t_outer @ fw.T])

    panels = max(2, int(np.ceil(k[-1] * (ro - ri) / np.pi)))
    overlap = quadrature.integrate_with(estimate, ri, ro, panels=panels, tol=tol)
    omega = c * k
    domega = c * np.vstack([dk_i, dk_o])
    weight = np.sqrt(np.outer(omega, 1.0 / omega))
    coeffs = overlap * weight[None]
    for a in range(2):
        np.fill_diagonal(coeffs[a], domega[a] / (2 * omega))
    for arr in (omega, domega, coeffs):
        arr.setflags(write=False)
    return Sensitivities(geometry, int(l), omega, domega, coeffs)


def dF_dparam(radial_mode, which, r):
    """Partial derivative of the normalised profile ``F(r)``.

    ``which`` is ``"r_inner"`` or ``"r_outer"`` (at fixed omega, so only the
    normalisation and the explicit inner-radius arguments move) or
    ``"omega"`` (at fixed radii).
    """
    g = radial_mode.geometry
    l = radial_mode.mode.l
    k = np.array([radial_mode.k])
    ra = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(ra < g.r_inner - 1e-12 * g.r_outer) or np.any(ra > g.r_outer * (1 + 1e-12)):
        raise ValueError("r must lie inside the gap")
    norm, dn_i, dn_o, dn_k = _norm_derivatives(l, k, g.r_inner, g.r_outer, 1e-13)
    gv, gi, gk = (a[0] for a in _fields(l, k, g.r_inner, ra))
    if which == "r_inner":
        out = dn_i[0] * gv + norm[0] * gi
    elif which == "r_outer":
        out = dn_o[0] * gv
    elif which == "omega":
        out = (dn_k[0] * gv + norm[0] * gk) / g.c
    else:
        raise ValueError("which must be 'r_inner', 'r_outer' or 'omega'")
    return float(out[0]) if np.ndim(r) == 0 else out.reshape(np.shape(r))


def dF_total(radial_mode, which, r):
    """Derivative of the eigenmode profile when a radius moves and omega follows."""
    from .spectrum import domega_dr

    alpha = {"r_inner": "inner", "r_outer": "outer"}[which]
    return dF_dparam(radial_mode, which, r) + domega_dr(radial_mode, alpha) * dF_dparam(radial_mode, "omega", r)


def fixed_omega_profile(l, omega, geometry, r):
    """Normalised profile at an arbitrary (not necessarily eigen) frequency."""
    k = omega / geometry.c
    norm = normalisation(l, k, geometry.r_inner, geometry.r_outer)
    return norm * _fields(l, np.array([k]), geometry.r_inner, np.atleast_1d(np.asarray(r, float)))[0][0]


# --------------------------------------------------------------------------
# coefficients and couplings


@dataclass(frozen=True)
class ResonanceCoefficients:
    l: int
    s: int
    s_prime: int
    c_inner: float
    c_outer: float


def c_alpha(l, s, s_prime, geometry, symmetric=True):
    """First-order coefficients ``c^i``, ``c^o`` for the mode pair ``(s, s')``.

    With ``symmetric=True`` (default) the symmetrised pair
    ``(c_{ss'} + c_{s's}) / 2`` is returned, which is what enters the
    particle number; otherwise the raw ``c_{ss'}``.
    """
    sens = sensitivities(geometry, l, max(s, s_prime))
    mat = sens.coefficients
    if symmetric:
        mat = 0.5 * (mat + np.swapaxes(mat, 1, 2))
    return ResonanceCoefficients(l, s, s_prime, float(mat[0, s - 1, s_prime - 1]),
                                 float(mat[1, s - 1, s_prime - 1]))


@dataclass(frozen=True)
class CouplingMatrix:
    """Snapshot of ``mu_{l s s'}(t)`` for ``s, s' <= n``."""

    l: int
    t: float
    entries: np.ndarray = field(repr=False)

    @property
    def symmetric(self):
        return mu_split(self)[0]

    @property
    def antisymmetric(self):
        return mu_split(self)[1]


def mu_split(matrix):
    """Symmetric and antisymmetric parts ``((mu + mu^T)/2, (mu - mu^T)/2)``."""
    m = np.asarray(matrix.entries if isinstance(matrix, CouplingMatrix) else matrix, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError("coupling matrix must be square")
    mt = np.swapaxes(m, -1, -2)
    return 0.5 * (m + mt), 0.5 * (m - mt)


def coupling_matrix(l, motion, t, n_modes=DEFAULT_TRUNCATION):
    """``mu_{l s s'}(t)`` for ``s, s' <= n_modes``, solved at the instantaneous geometry."""
    vi, vo = motion.velocities(float(t))
    if motion.is_static or (vi == 0 and vo == 0):
        return CouplingMatrix(l, float(t), np.zeros((n_modes, n_modes)))
    sens = sensitivities(motion.geometry_at(t), l, n_modes)
    return CouplingMatrix(l, float(t), sens.coefficients[0] * vi + sens.coefficients[1] * vo)


def mu(l, s, s_prime, motion, t):
    """Single coupling entry ``mu_{l s s'}(t)``."""
    return float(coupling_matrix(l, motion, t, max(s, s_prime)).entries[s - 1, s_prime - 1])


# --------------------------------------------------------------------------
# interpolated track along a motion


class ModeTrack:
    """Frequencies and couplings along a motion law, interpolated in ``r_o / r_i``.

    The cavity spectrum is scale invariant: at radii ``(r_i, r_o)``,
    ``omega = c * khat(rho) / r_i`` and ``c^alpha = chat(rho) / r_i`` with
    ``rho = r_o / r_i``. The unit-inner-radius quantities are tabulated on
    Chebyshev nodes over the range of ``rho`` the motion visits, so each time
    evaluation is a polynomial evaluation instead of a fresh eigen solve.
    """

    def __init__(self, motion, l, n_modes=DEFAULT_TRUNCATION, t_max=None, tol=1e-12, max_degree=128):
        self.motion = motion
        self.l = int(l)
        self.n_modes = int(n_modes)
        self.c = motion.c
        if motion.descriptor == "harmonic":
            samples = np.linspace(0.0, 2 * np.pi / motion.params["varpi"], 2049)
        else:
            span = t_max if t_max is not None else (motion.time_span or 0.0)
            samples = np.linspace(0.0, span, 4097)
        ri, ro = motion.radii(samples)
        rho = ro / ri
        lo, hi = float(np.min(rho)), float(np.max(rho))
        pad = 1e-9 * hi
        self.rho_range = (lo - pad, hi + pad)
        if hi - lo <= 1e-13 * hi:
            sens = self._unit(0.5 * (lo + hi))
            self._coef = self._pack(sens)[None, :]
            self.degree = 0
        else:
            self._coef = self._fit(tol, max_degree)
        self._rest = self.motion.is_static

    def _unit(self, rho):
        return sensitivities(ShellGeometry(1.0, float(rho), 1.0), self.l, self.n_modes)

    @staticmethod
    def _pack(sens):
        return np.concatenate([sens.omega, sens.coefficients.ravel()])

    def _fit(self, tol, max_degree):
        a, b = self.rho_range
        n = 9
        while True:
            x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
            values = np.array([self._pack(self._unit(0.5 * (a + b) + 0.5 * (b - a) * xi)) for xi in x])
            coef = chebyshev.chebfit(x, values, n - 1)
            scale = np.max(np.abs(coef), axis=0)
            tail = np.max(np.abs(coef[-2:]), axis=0)
            if np.all(tail <= tol * np.maximum(scale, 1e-300)) or n >= max_degree:
                self.degree = n - 1
                return coef
            n = 2 * n + 1

    def _unit_values(self, rho):
        if self.degree == 0:
            return np.broadcast_to(self._coef[0], rho.shape + self._coef.shape[1:])
        a, b = self.rho_range
        x = (2 * rho - (a + b)) / (b - a)
        return np.moveaxis(chebyshev.chebval(x, self._coef), -1, 0)

    def evaluate(self, t):
        """Return ``(omega, mu)`` with shapes ``(T, S)`` and ``(T, S, S)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ri, ro = self.motion.radii(t)
        ri = np.broadcast_to(ri, t.shape)
        ro = np.broadcast_to(ro, t.shape)
        vals = self._unit_values(ro / ri)
        s = self.n_modes
        omega = self.c * vals[:, :s] / ri[:, None]
        if self._rest:
            return omega, np.zeros((t.size, s, s))
        chat = vals[:, s:].reshape(t.size, 2, s, s)
        vi, vo = self.motion.velocities(t)
        vi = np.broadcast_to(vi, t.shape)
        vo = np.broadcast_to(vo, t.shape)
        mu_t = (chat[:, 0] * vi[:, None, None] + chat[:, 1] * vo[:, None, None]) / ri[:, None, None]
        return omega, mu_t

    def omega(self, t):
        return self.evaluate(t)[0]
