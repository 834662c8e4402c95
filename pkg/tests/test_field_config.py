import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abflux.errors import ConfigError
from abflux.field_config import (
    GaugePrimitive,
    PhysicalConstants,
    eps_contract,
    gauge_shift_to_center,
    loop_integral,
    magnetic_field_at,
    total_potential_at,
    vector_potential_at,
)

from conftest import make_config


def test_potential_outside_unit_disk():
    # -B a^2 eps x / (2 rho^2) at (2, 0): eps x = (0, -2), so A = (0, 0.25)
    A = vector_potential_at(GaugePrimitive((0, 0), 1, 1), (2, 0))
    np.testing.assert_allclose(A, [0.0, 0.25], atol=1e-15)


def test_zero_field_potential_vanishes():
    prim = GaugePrimitive((0, 0), 1, 0)
    pts = np.random.default_rng(0).normal(size=(50, 2)) * 3
    assert np.all(vector_potential_at(prim, pts) == 0)


def test_branches_agree_on_boundary():
    prim = GaugePrimitive((0.3, -1.2), 1.7, 2.5)
    theta = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    pts = np.asarray(prim.center) + prim.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    np.testing.assert_allclose(prim.inside_potential(pts), prim.outside_potential(pts), atol=1e-12)


@pytest.mark.parametrize("B, radius, p, expected", [(1, 1, (0.5, 0), 1), (1, 1, (2, 0), 0), (-3, 2, (0, 0), -3)])
def test_magnetic_field(B, radius, p, expected):
    assert magnetic_field_at(GaugePrimitive((0, 0), radius, B), p) == expected


def test_total_potential_superposes():
    cfg = make_config(B0=1.0, Bc=2.0)
    p = np.array([2.5, 3.0])
    expected = cfg.source.outside_potential(p) + cfg.spectator.outside_potential(p)
    np.testing.assert_allclose(total_potential_at(cfg, p), expected, rtol=1e-15)
    zero = make_config(B0=0.0, Bc=0.0)
    assert np.all(total_potential_at(zero, [[2.5, 3.0], [5, 0], [0, 0]]) == 0)


def test_total_potential_source_only():
    cfg = make_config(B0=1.0, Bc=0.0)
    np.testing.assert_allclose(total_potential_at(cfg, (2, 0)), [0, 0.25], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(
    B=st.floats(-5, 5).filter(lambda b: abs(b) > 1e-3),
    r=st.floats(0.2, 3),
    dist=st.floats(1.05, 4),
    angle=st.floats(0, 2 * math.pi),
)
def test_curl_free_outside(B, r, dist, angle):
    prim = GaugePrimitive((0.7, -0.4), r, B)
    p = np.asarray(prim.center) + r * dist * np.array([math.cos(angle), math.sin(angle)])
    h = 1e-4 * r
    d2A1 = (prim.potential(p + [0, h])[0] - prim.potential(p - [0, h])[0]) / (2 * h)
    d1A2 = (prim.potential(p + [h, 0])[1] - prim.potential(p - [h, 0])[1]) / (2 * h)
    assert abs(d1A2 - d2A1) < 1e-8 * abs(B)


def test_inside_curl_is_B():
    prim = GaugePrimitive((1, 1), 2, 3.0)
    p = np.array([1.4, 0.7])
    h = 1e-5
    d2A1 = (prim.potential(p + [0, h])[0] - prim.potential(p - [0, h])[0]) / (2 * h)
    d1A2 = (prim.potential(p + [h, 0])[1] - prim.potential(p - [h, 0])[1]) / (2 * h)
    assert d1A2 - d2A1 == pytest.approx(3.0, rel=1e-8)


def test_eps_convention():
    np.testing.assert_array_equal(eps_contract([1.0, 2.0]), [2.0, -1.0])


def test_loop_around_source():
    cfg = make_config(B0=1.0, Bc=1.0, ac=1.0, xC=5.0)
    assert loop_integral(cfg, (0, 0), 3.0) == pytest.approx(math.pi, rel=1e-9)


def test_loop_in_field_free_region():
    cfg = make_config()
    assert abs(loop_integral(cfg, (2.5, 2.0), 0.5)) < 1e-12


def test_loop_around_both_disks():
    cfg = make_config(B0=1.0, a0=1.0, Bc=2.0, ac=1.5, xC=5.0)
    expected = math.pi * (1.0 + 1.5**2 * 2.0)
    assert loop_integral(cfg, (2.5, 0), 10.0) == pytest.approx(expected, rel=1e-6)


def test_loop_crossing_boundary_rejected():
    with pytest.raises(ConfigError):
        loop_integral(make_config(), (0, 0), 1.0)


def test_loop_inside_disk_stokes():
    cfg = make_config(Bc=2.0)
    # loop wholly inside the spectator disk encloses pi r^2 B
    assert loop_integral(cfg, (5.2, 0.1), 0.5) == pytest.approx(math.pi * 0.25 * 2.0, rel=1e-6)


def test_gauge_shift_reconstructs_original():
    prim = GaugePrimitive((5, 0), 1.5, 1.0)
    shift = gauge_shift_to_center(prim)
    # constant term is -B eps c / 2 = (0, 2.5)
    np.testing.assert_allclose(shift.chi_gradient, [0.0, 2.5], atol=0)
    p = (5, 1)
    np.testing.assert_allclose(shift.reconstruct(p), prim.inside_potential(p), rtol=0, atol=1e-15)
    # the gradient of chi is the constant difference
    h = 1e-6
    grad = [
        (shift.chi(np.array([5 + h, 1])) - shift.chi(np.array([5 - h, 1]))) / (2 * h),
        (shift.chi(np.array([5, 1 + h])) - shift.chi(np.array([5, 1 - h]))) / (2 * h),
    ]
    np.testing.assert_allclose(grad, shift.chi_gradient, atol=1e-8)


@pytest.mark.parametrize("prim", [GaugePrimitive((0, 0), 1, 2.0), GaugePrimitive((5, 0), 1, 0.0)])
def test_gauge_shift_trivial(prim):
    shift = gauge_shift_to_center(prim)
    assert shift.chi_gradient == (0.0, 0.0)


def test_line_integral_matches_quadrature():
    prim = GaugePrimitive((0.2, 0.1), 1.0, 1.7)
    rng = np.random.default_rng(3)
    x = rng.uniform(-2, 2, size=(40, 2))
    y = x + rng.uniform(-0.6, 0.6, size=(40, 2))
    s = (np.arange(20000) + 0.5) / 20000
    pts = x[:, None, :] + s[None, :, None] * (y - x)[:, None, :]
    quad = np.einsum("nsi,ni->n", prim.potential(pts), y - x) / len(s)
    np.testing.assert_allclose(prim.line_integral(x, y), quad, atol=1e-6)


def test_config_invariants():
    with pytest.raises(ConfigError):
        make_config(a0=2.0, ac=3.5, xC=5.0)  # overlapping disks
    cfg = make_config()
    with pytest.raises(ConfigError):
        cfg.with_strays([GaugePrimitive(cfg.source.center, cfg.source.radius, 0.3)])
    with pytest.raises(ConfigError):
        vector_potential_at(cfg.source, (np.nan, 0))
    with pytest.raises(ConfigError):
        PhysicalConstants(mu=0)


def test_with_source_flux_sets_flux():
    cfg = make_config().with_source_flux(2.0)
    assert cfg.source.flux == pytest.approx(2.0, rel=1e-15)
    assert cfg.x_C == 5.0
