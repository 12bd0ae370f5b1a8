import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from shellcasimir.coupling import (
    ModeTrack,
    c_alpha,
    coupling_matrix,
    dF_dparam,
    dF_total,
    harmonic_motion,
    load_trajectory,
    mu,
    mu_split,
    static_motion,
    tabulated_motion,
)
from shellcasimir.spectrum import Mode, ShellGeometry, radial_mode


def l0_profile_derivatives(s, ri, ro, r):
    d = ro - ri
    u = s * np.pi * (r - ri) / d
    base = np.sqrt(2) / r
    d_outer = base * (-0.5 * d**-1.5 * np.sin(u) - d**-0.5 * np.cos(u) * u / d)
    d_inner = base * (0.5 * d**-1.5 * np.sin(u) + d**-0.5 * np.cos(u) * (u - s * np.pi) / d)
    return d_inner, d_outer


def test_profile_derivative_matches_l0_closed_form():
    g = ShellGeometry(1.0, 2.5)
    r = np.linspace(1.0, 2.5, 31)
    for s in (1, 2, 4):
        m = radial_mode(g, Mode(0, s))
        d_inner, d_outer = l0_profile_derivatives(s, g.r_inner, g.r_outer, r)
        np.testing.assert_allclose(dF_total(m, "r_outer", r), d_outer, atol=1e-9)
        np.testing.assert_allclose(dF_total(m, "r_inner", r), d_inner, atol=1e-9)


@pytest.mark.parametrize("l", [1, 3])
def test_profile_derivative_finite_difference(l):
    g = ShellGeometry(1.0, 2.0)
    r = np.linspace(1.1, 1.9, 9)
    m = radial_mode(g, Mode(l, 2))
    for which in ("r_inner", "r_outer"):
        h = 1e-6 * getattr(g, which)
        shift = (h, 0) if which == "r_inner" else (0, h)
        up = radial_mode(ShellGeometry(g.r_inner + shift[0], g.r_outer + shift[1]), Mode(l, 2))(r)
        dn = radial_mode(ShellGeometry(g.r_inner - shift[0], g.r_outer - shift[1]), Mode(l, 2))(r)
        fd = (up - dn) / (2 * h)
        np.testing.assert_allclose(dF_total(m, which, r), fd, rtol=1e-5, atol=1e-5 * np.max(np.abs(fd)))


def test_fixed_omega_outer_derivative_vanishes_at_inner_shell():
    m = radial_mode(ShellGeometry(1.0, 3.0), Mode(2, 1))
    assert dF_dparam(m, "r_outer", 1.0) == pytest.approx(0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-1e6, 1e6)))
def test_mu_split_reconstruction(m):
    sym, anti = mu_split(m)
    # exact up to the rounding of the half sums
    scale = np.max(np.abs(m), initial=0.0)
    assert np.max(np.abs(sym + anti - m), initial=0.0) <= 4 * np.finfo(float).eps * scale
    np.testing.assert_array_equal(sym, sym.T)
    np.testing.assert_array_equal(anti, -anti.T)


@pytest.mark.parametrize("ratio", [1.3, 2.0, 7.0])
def test_l0_sign_law(ratio):
    g = ShellGeometry(1.0, ratio)
    for s in range(1, 4):
        for sp in range(1, 4):
            co = c_alpha(0, s, sp, g)
            assert co.c_inner == pytest.approx(-(-1) ** (s + sp) * co.c_outer, rel=1e-6)


def test_gap_scaling():
    for l in (0, 1, 2):
        base = ShellGeometry(1.0, 1.8)
        ref = [base.gap * abs(c_alpha(l, 1, sp, base).c_inner) for sp in (1, 2)]
        for lam in (0.3, 4.0):
            g = base.scaled(lam)
            got = [g.gap * abs(c_alpha(l, 1, sp, g).c_inner) for sp in (1, 2)]
            np.testing.assert_allclose(got, ref, rtol=1e-6)


def test_magnitude_grows_as_gap_closes():
    # for l = 0 the scaled coefficient is constant; the trend concerns l = 1
    for l in (1,):
        for sp in (1, 2):
            for alpha in ("c_inner", "c_outer"):
                vals = [ShellGeometry(1, q).gap * abs(getattr(c_alpha(l, 1, sp, ShellGeometry(1, q)), alpha))
                        for q in (5, 3, 2, 1.5, 1.2)]
                assert all(a < b for a, b in zip(vals, vals[1:])), (l, sp, alpha, vals)


def test_static_motion_has_no_coupling():
    motion = static_motion(ShellGeometry(1, 2))
    assert np.all(coupling_matrix(0, motion, 0.7, 4).entries == 0)


def test_coupling_matrix_diagonal_and_velocity():
    g = ShellGeometry(1, 2)
    motion = harmonic_motion(g, 0.0, 1e-3, 2 * np.pi)
    t = 0.1
    vi, vo = motion.velocities(t)
    m = radial_mode(motion.geometry_at(t), Mode(1, 2))
    from shellcasimir.spectrum import domega_dr

    expected = (domega_dr(m, "inner") * vi + domega_dr(m, "outer") * vo) / (2 * m.omega)
    assert mu(1, 2, 2, motion, t) == pytest.approx(expected, rel=1e-10)


def test_coupling_is_periodic():
    g = ShellGeometry(1, 2)
    varpi = 3.0
    for eps in (1e-3, 1e-4):
        motion = harmonic_motion(g, eps, -eps, varpi)
        period = 2 * np.pi / varpi
        for t in (0.2, 1.1):
            a = coupling_matrix(1, motion, t, 3).entries
            b = coupling_matrix(1, motion, t + period, 3).entries
            assert np.max(np.abs(a - b)) <= 10 * eps**2


def test_mode_track_matches_direct_solves():
    g = ShellGeometry(1, 2)
    motion = harmonic_motion(g, 5e-3, -3e-3, 2 * np.pi)
    track = ModeTrack(motion, 1, 4)
    ts = np.array([0.0, 0.13, 0.4, 0.77])
    omega, mus = track.evaluate(ts)
    for i, t in enumerate(ts):
        np.testing.assert_allclose(mus[i], coupling_matrix(1, motion, t, 4).entries, rtol=1e-8, atol=1e-10)
        from shellcasimir.spectrum import find_eigenfrequencies

        np.testing.assert_allclose(omega[i], find_eigenfrequencies(motion.geometry_at(t), 1, 4), rtol=1e-10)


def _harmonic_table(n=200, t_end=3.0):
    t = np.linspace(0, t_end, n)
    w = 2.0
    return t, 1 + 0.01 * np.sin(w * t), 2 - 0.02 * np.sin(w * t), 0.01 * w * np.cos(w * t), -0.02 * w * np.cos(w * t)


def test_tabulated_motion_interpolates():
    t, ri, ro, vi, vo = _harmonic_table()
    motion = tabulated_motion(t, ri, ro, vi, vo)
    tt = np.array([0.123, 1.7, 2.9])
    np.testing.assert_allclose(motion.radii(tt)[0], 1 + 0.01 * np.sin(2 * tt), atol=1e-9)
    np.testing.assert_allclose(motion.velocities(tt)[1], -0.04 * np.cos(2 * tt), atol=1e-6)
    with pytest.raises(ValueError):
        motion.radii(3.5)


def test_tabulated_motion_rejects_inconsistent_velocity():
    t, ri, ro, vi, vo = _harmonic_table()
    vo = vo.copy()
    vo[37] += 0.01
    with pytest.raises(ValueError, match="row 38"):
        tabulated_motion(t, ri, ro, vi, vo)


def test_tabulated_motion_rejects_crossing_shells():
    t, ri, ro, vi, vo = _harmonic_table()
    ri = ri.copy()
    ri[5] = 3.0
    with pytest.raises(ValueError, match="row 6"):
        tabulated_motion(t, ri, ro, vi, vo)


def test_load_trajectory(tmp_path):
    path = tmp_path / "traj.txt"
    rows = np.column_stack(_harmonic_table(50))
    path.write_text("# t r_i r_o v_i v_o\n" + "\n".join(" ".join(f"{v:.17g}" for v in row) for row in rows))
    motion = load_trajectory(path)
    assert motion.time_span == pytest.approx(3.0)
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 2 0\n")
    with pytest.raises(ValueError, match="row 1"):
        load_trajectory(bad)
