r"""Spherical Bessel functions :math:`j_l`, :math:`n_l` and the shell cross product.

All routines work on numpy arrays. The table builders return every order
``0..lmax`` at once, which is what the recurrences produce anyway and what the
mode and coupling code consumes.

* :math:`j_l` uses the power series for ``x < 1``, upward recurrence for
  ``x > lmax`` and Miller's downward recurrence (normalised against
  :math:`j_0` or :math:`j_1`) in between.
* :math:`n_l` uses upward recurrence, which is stable for every ``x > 0``.
"""
import numpy as np

from .errors import DomainError

_RESCALE = 1e200


def _check_order(l):
    if isinstance(l, (bool, np.bool_)) or int(l) != l or l < 0:
        raise ValueError(f"order l must be a non-negative integer, got {l!r}")
    return int(l)


def _as_array(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("argument x must be finite")
    return x


def _j_series(lmax, x):
    out = np.empty((lmax + 1, x.size))
    half_sq = -0.5 * x * x
    lead = np.ones_like(x)
    for l in range(lmax + 1):
        if l:
            lead = lead * x / (2 * l + 1)
        term = np.ones_like(x)
        total = np.ones_like(x)
        for k in range(1, 60):
            term = term * half_sq / (k * (2 * l + 2 * k + 1))
            total += term
            if np.all(np.abs(term) <= 1e-18 * np.abs(total)):
                break
        out[l] = lead * total
    return out


def _j_upward(lmax, x):
    out = np.empty((lmax + 1, x.size))
    s, c = np.sin(x), np.cos(x)
    out[0] = s / x
    if lmax >= 1:
        out[1] = s / x**2 - c / x
    for l in range(1, lmax):
        out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1]
    return out


def _j_miller(lmax, x):
    top = max(lmax, 1)
    start = top + 40 + int(20 * np.max(x) ** (1.0 / 3.0))
    out = np.zeros((top + 1, x.size))
    f_up = np.zeros_like(x)
    f = np.full_like(x, 1e-30)
    for k in range(start, 0, -1):
        f_down = (2 * k + 1) / x * f - f_up
        f_up, f = f, f_down
        if k - 1 <= top:
            out[k - 1] = f
        big = np.abs(f) > _RESCALE
        if np.any(big):
            f[big] /= _RESCALE
            f_up[big] /= _RESCALE
            out[:, big] /= _RESCALE
    s, c = np.sin(x), np.cos(x)
    j0 = s / x
    j1 = s / x**2 - c / x
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / out[0], j1 / out[1])
    return (out * scale)[: lmax + 1]


def sph_j_table(lmax, x):
    """Return ``j_0(x) .. j_lmax(x)`` as an array of shape ``(lmax + 1, x.size)``."""
    x = np.ravel(np.asarray(x, dtype=float))
    out = np.empty((lmax + 1, x.size))
    zero = x == 0.0
    small = (x > 0.0) & (x < 1.0)
    up = (x >= 1.0) & (x > lmax)
    mid = (x >= 1.0) & ~up
    if np.any(zero):
        out[:, zero] = 0.0
        out[0, zero] = 1.0
    if np.any(small):
        out[:, small] = _j_series(lmax, x[small])
    if np.any(up):
        out[:, up] = _j_upward(lmax, x[up])
    if np.any(mid):
        out[:, mid] = _j_miller(lmax, x[mid])
    return out


def sph_y_table(lmax, x):
    """Return ``n_0(x) .. n_lmax(x)`` (second kind) for ``x > 0``; shape ``(lmax + 1, x.size)``."""
    x = np.ravel(np.asarray(x, dtype=float))
    out = np.empty((lmax + 1, x.size))
    s, c = np.sin(x), np.cos(x)
    out[0] = -c / x
    if lmax >= 1:
        out[1] = -c / x**2 - s / x
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, lmax):
            out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1]
    return out


def _derivative(table, l, x):
    # f_l' = f_{l-1} - (l+1) f_l / x, and f_0' = -f_1
    if l == 0:
        return -table[1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return table[l - 1] - (l + 1) / x * table[l]


def bessel_pair(l, x, derivatives=False):
    """Evaluate ``j_l``, ``n_l`` (and optionally their derivatives) on flat ``x > 0``.

    Internal fast path used by the spectrum and coupling code; no validation.
    """
    top = max(l, 1)
    jt = sph_j_table(top, x)
    with np.errstate(over="ignore"):
        yt = sph_y_table(top, x)
    if not derivatives:
        return jt[l], yt[l]
    return jt[l], yt[l], _derivative(jt, l, x), _derivative(yt, l, x)


def _wrap(values, x):
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def sph_bessel_j(l, x):
    """Spherical Bessel function of the first kind, ``j_l(x)`` for ``x >= 0``.

    >>> round(sph_bessel_j(0, np.pi / 2), 15) == round(2 / np.pi, 15)
    True
    """
    l = _check_order(l)
    xa = _as_array(x)
    if np.any(xa < 0):
        raise DomainError("j_l is only provided for x >= 0")
    return _wrap(sph_j_table(l, xa)[l], x)


def sph_bessel_y(l, x):
    """Spherical Bessel function of the second kind, ``n_l(x)`` for ``x > 0``."""
    l = _check_order(l)
    xa = _as_array(x)
    if np.any(xa <= 0):
        raise DomainError("n_l has a pole at x = 0; need x > 0")
    with np.errstate(over="ignore"):
        return _wrap(sph_y_table(l, xa)[l], x)


def sph_bessel_j_prime(l, x):
    """Derivative ``j_l'(x)``; exact limits at ``x = 0``."""
    l = _check_order(l)
    xa = _as_array(x)
    if np.any(xa < 0):
        raise DomainError("j_l' is only provided for x >= 0")
    flat = np.ravel(xa)
    values = _derivative(sph_j_table(max(l, 1), flat), l, flat)
    zero = flat == 0.0
    if np.any(zero):
        values[zero] = 1.0 / 3.0 if l == 1 else 0.0
    return _wrap(values, x)


def sph_bessel_y_prime(l, x):
    """Derivative ``n_l'(x)`` for ``x > 0``."""
    l = _check_order(l)
    xa = _as_array(x)
    if np.any(xa <= 0):
        raise DomainError("n_l' has a pole at x = 0; need x > 0")
    flat = np.ravel(xa)
    with np.errstate(over="ignore"):
        values = _derivative(sph_y_table(max(l, 1), flat), l, flat)
    return _wrap(values, x)


def cross_product(l, x_inner, x_outer):
    """Unchecked, broadcasting ``j_l(x_o) n_l(x_i) - j_l(x_i) n_l(x_o)``."""
    xi, xo = np.broadcast_arrays(np.asarray(x_inner, float), np.asarray(x_outer, float))
    shape = xi.shape
    ji, ni = bessel_pair(l, np.ravel(xi))
    jo, no = bessel_pair(l, np.ravel(xo))
    with np.errstate(invalid="ignore", over="ignore"):
        return (jo * ni - ji * no).reshape(shape)


def cross_product_D(l, x_inner, x_outer, check=True):
    """Boundary cross product whose zeros in ``omega`` are the cavity eigenfrequencies.

    Parameters
    ----------
    l : int
        Angular order.
    x_inner, x_outer : float or array
        Dimensionless arguments ``omega r_i / c`` and ``omega r_o / c``.
    check : bool
        Enforce ``0 < x_inner <= x_outer``. Pass False to evaluate with the
        arguments in either order (the function is antisymmetric).
    """
    l = _check_order(l)
    xi = _as_array(x_inner)
    xo = _as_array(x_outer)
    if np.any(xi <= 0) or np.any(xo <= 0):
        raise DomainError("cross product needs positive arguments")
    if check and np.any(xi > xo):
        raise ValueError("x_inner must not exceed x_outer")
    out = cross_product(l, xi, xo)
    return float(out) if out.ndim == 0 else out
