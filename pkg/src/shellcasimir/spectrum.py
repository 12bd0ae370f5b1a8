"""Eigenfrequencies and normalised radial modes of the spherical-shell cavity.

The field vanishes on both shells, so the radial profile of mode ``(l, s)`` is

    F(r) = N [ j_l(k r) n_l(k r_i) - j_l(k r_i) n_l(k r) ],   k = omega / c,

and ``k`` is the ``s``-th positive zero of the cross product
``j_l(k r_o) n_l(k r_i) - j_l(k r_i) n_l(k r_o)``.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quadrature
from .errors import DegenerateRootError, DomainError, SpectralError
from .specfun import _check_order, bessel_pair, cross_product

MAX_RATIO = 1e6
MAX_ORDER = 200
STEP_FRACTION = 8


@dataclass(frozen=True)
class ShellGeometry:
    """Static shell radii and wave speed."""

    r_inner: float
    r_outer: float
    c: float = 1.0

    def __post_init__(self):
        for name in ("r_inner", "r_outer", "c"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.r_inner >= self.r_outer:
            raise ValueError("need r_inner < r_outer")
        if self.r_outer / self.r_inner > MAX_RATIO:
            raise ValueError(f"r_outer / r_inner exceeds the supported ratio {MAX_RATIO:g}")

    @property
    def gap(self):
        return self.r_outer - self.r_inner

    @property
    def ratio(self):
        return self.r_outer / self.r_inner

    def scaled(self, factor):
        return ShellGeometry(self.r_inner * factor, self.r_outer * factor, self.c)


@dataclass(frozen=True)
class Mode:
    l: int
    s: int

    def __post_init__(self):
        _check_order(self.l)
        if isinstance(self.s, bool) or int(self.s) != self.s or self.s < 1:
            raise ValueError(f"root index s must be a positive integer, got {self.s!r}")


@dataclass(frozen=True)
class RadialMode:
    """A solved mode: frequency, signed normalisation and its geometry.

    ``norm`` is negative with the cross-product form above, because the
    profile is oriented so that ``F'(r_inner) > 0``.
    """

    mode: Mode
    omega: float
    norm: float
    geometry: ShellGeometry

    @property
    def k(self):
        return self.omega / self.geometry.c

    def __call__(self, r):
        return eval_F(self, r)


def _validate_order(l):
    l = _check_order(l)
    if l > MAX_ORDER:
        raise ValueError(f"order l = {l} exceeds the supported maximum {MAX_ORDER}")
    return l


def cross_parts(l, k, r_inner, r_outer):
    """Cross product and its partials in the two arguments at wavenumber(s) ``k``.

    Returns ``(D, dD/dx_inner, dD/dx_outer)`` with ``x = k r``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    ji, ni, dji, dni = bessel_pair(l, k * r_inner, derivatives=True)
    jo, no, djo, dno = bessel_pair(l, k * r_outer, derivatives=True)
    with np.errstate(invalid="ignore", over="ignore"):
        d = jo * ni - ji * no
        d_inner = jo * dni - dji * no
        d_outer = djo * ni - ji * dno
    return d, d_inner, d_outer


def _refine(l, r_inner, r_outer, lo, hi, d_lo):
    # vectorised bisection down to ~1e-14 relative width, then Newton polish
    for _ in range(200):
        if np.all(hi - lo <= 1e-14 * hi):
            break
        mid = 0.5 * (lo + hi)
        d_mid = cross_product(l, mid * r_inner, mid * r_outer)
        left = np.sign(d_mid) == np.sign(d_lo)
        lo = np.where(left, mid, lo)
        d_lo = np.where(left, d_mid, d_lo)
        hi = np.where(left, hi, mid)
    k = 0.5 * (lo + hi)
    for _ in range(3):
        d, d_in, d_out = cross_parts(l, k, r_inner, r_outer)
        slope = r_inner * d_in + r_outer * d_out
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope != 0, d / slope, 0.0)
        trial = k - step
        inside = (trial >= lo) & (trial <= hi) & np.isfinite(trial)
        k = np.where(inside, trial, k)
    return k


@lru_cache(maxsize=4096)
def _wavenumbers(l, r_inner, r_outer, s_max, step_fraction):
    gap = r_outer - r_inner
    step = np.pi / gap / step_fraction
    k_start = 1e-6 / gap
    chunk = step_fraction * (s_max + 2) + 16
    limit = step_fraction * (s_max + 4) * 4 + int(4 * step_fraction * l * gap / (np.pi * r_outer)) + 64
    roots = []
    prev_k = prev_d = None
    scanned = 0
    while len(roots) < s_max:
        if scanned >= limit:
            raise SpectralError(
                f"scan exhausted after {scanned} points with {len(roots)} of {s_max} roots (l={l})",
                interval=(float(prev_k - step), float(prev_k)),
            )
        ks = k_start + step * np.arange(scanned, scanned + chunk)
        ds = cross_product(l, ks * r_inner, ks * r_outer)
        if prev_k is not None:
            ks = np.concatenate([[prev_k], ks])
            ds = np.concatenate([[prev_d], ds])
        a, b = ds[:-1], ds[1:]
        finite = np.isfinite(a) & np.isfinite(b)
        change = finite & ((a * b < 0) | (b == 0))
        idx = np.nonzero(change)[0]
        exact = idx[ds[idx + 1] == 0]
        bracket = idx[ds[idx + 1] != 0]
        found = list(ks[exact + 1])
        if bracket.size:
            found += list(_refine(l, r_inner, r_outer, ks[bracket], ks[bracket + 1], ds[bracket]))
        roots.extend(sorted(found))
        prev_k, prev_d = ks[-1], ds[-1]
        scanned += chunk
    roots = np.array(roots[:s_max])
    if np.any(np.diff(roots) <= 1e-10 * roots[1:]):
        raise SpectralError("duplicate roots detected; reduce the scan step", interval=None)
    roots.setflags(write=False)
    return roots


def wavenumbers(geometry, l, s_max, step_fraction=STEP_FRACTION):
    """First ``s_max`` roots ``k = omega / c`` of the cross product (cached)."""
    l = _validate_order(l)
    if int(s_max) != s_max or s_max < 1:
        raise ValueError("s_max must be a positive integer")
    return _wavenumbers(l, float(geometry.r_inner), float(geometry.r_outer), int(s_max), int(step_fraction))


def find_eigenfrequencies(geometry, l, s_max, step_fraction=STEP_FRACTION):
    """First ``s_max`` eigenfrequencies ``omega_l1 < omega_l2 < ...``.

    The wavenumber axis is scanned in steps of ``pi / (step_fraction * gap)``
    for sign changes; each bracket is bisected and polished with Newton steps.
    """
    return [geometry.c * k for k in wavenumbers(geometry, l, s_max, step_fraction)]


def profile(l, k, r_inner, r):
    """Unnormalised radial profile ``j_l(k r) n_l(k r_i) - j_l(k r_i) n_l(k r)``."""
    r = np.asarray(r, dtype=float)
    j, n = bessel_pair(l, np.ravel(k * r))
    ji, ni = bessel_pair(l, np.array([k * r_inner]))
    return (j * ni - ji * n).reshape(r.shape)


def normalisation(l, k, r_inner, r_outer, tol=1e-13):
    """Signed normalisation of :func:`profile` over ``[r_inner, r_outer]`` at any ``k``.

    The sign is negative so that the normalised profile rises from ``r_inner``.
    """
    panels = max(2, int(np.ceil(k * (r_outer - r_inner) / np.pi)))
    integral = quadrature.integrate(
        lambda r: profile(l, k, r_inner, r) ** 2 * r**2, r_inner, r_outer, panels=panels, tol=tol
    )
    return -1.0 / np.sqrt(integral)


def radial_mode(geometry, mode):
    """Solve mode ``(l, s)`` and fix its normalisation so that ``int F^2 r^2 dr = 1``."""
    if not isinstance(mode, Mode):
        mode = Mode(*mode)
    k = wavenumbers(geometry, mode.l, mode.s)[mode.s - 1]
    norm = normalisation(mode.l, k, geometry.r_inner, geometry.r_outer)
    return RadialMode(mode, geometry.c * k, float(norm), geometry)


def eval_F(radial_mode, r):
    """Evaluate the normalised profile at radius/radii ``r`` inside the gap."""
    g = radial_mode.geometry
    ra = np.asarray(r, dtype=float)
    slack = 1e-12 * g.r_outer
    if np.any(ra < g.r_inner - slack) or np.any(ra > g.r_outer + slack):
        raise DomainError(f"r must lie in [{g.r_inner}, {g.r_outer}]")
    ra = np.clip(ra, g.r_inner, g.r_outer)
    values = radial_mode.norm * profile(radial_mode.mode.l, radial_mode.k, g.r_inner, ra)
    values = np.where(ra == g.r_outer, 0.0, values)
    return float(values) if values.ndim == 0 else values


def wavenumber_gradient(l, k, r_inner, r_outer):
    """``(dk/dr_inner, dk/dr_outer)`` at root(s) ``k`` by implicit differentiation."""
    _, d_in, d_out = cross_parts(l, k, r_inner, r_outer)
    slope = r_inner * d_in + r_outer * d_out
    if np.any(np.abs(slope) < 1e-14):
        raise DegenerateRootError("cross product is flat at the root", interval=None)
    return -k * d_in / slope, -k * d_out / slope


def domega_dr(radial_mode, which):
    """Sensitivity of the eigenfrequency to one shell radius.

    ``which`` is ``"inner"`` or ``"outer"``. Degenerate roots (``|dD/domega|``
    below 1e-14) raise :class:`DegenerateRootError`.
    """
    g = radial_mode.geometry
    if which not in ("inner", "outer"):
        raise ValueError("which must be 'inner' or 'outer'")
    _, d_in, d_out = cross_parts(radial_mode.mode.l, radial_mode.k, g.r_inner, g.r_outer)
    slope = (g.r_inner * d_in + g.r_outer * d_out) / g.c
    if abs(slope[0]) < 1e-14:
        raise DegenerateRootError("cross product is flat at the root", interval=None)
    partial = radial_mode.k * (d_in if which == "inner" else d_out)
    return float(-partial[0] / slope[0])
