import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abflux import constraints, reduced
from abflux.errors import ConfigError, DegenerateSystemError
from abflux.field_config import PhysicalConstants

from conftest import make_config


def _system(**kw):
    cfg = make_config(**kw)
    return reduced.reduce(cfg, constraints.analyze(cfg))


def test_flux_two_gives_one_over_pi():
    system = _system(B0=2 / math.pi, a0=1.0, Bc=1.0)
    assert system.J_AB == pytest.approx(1 / math.pi, rel=1e-15)
    assert system.zero_point_J == pytest.approx(0.5 + 1 / math.pi, rel=1e-15)


def test_zero_flux():
    system = _system(B0=0.0)
    assert system.J_AB == 0.0
    assert system.zero_point_J == 0.5


def test_ground_energy_unit_frequency():
    system = _system(Bc=1.0)
    assert system.energy(0) == 0.5
    assert system.ground_energy == 0.5
    np.testing.assert_array_equal(system.energies(4), [0.5, 1.5, 2.5, 3.5])
    np.testing.assert_array_equal(system.angular_momentum([0, 1]) - system.J_AB, [0.5, 1.5])


def test_negative_index_rejected():
    with pytest.raises(ConfigError):
        _system().energy(-1)


def test_source_angular_momentum_constant():
    cfg = make_config(B0=0.9, a0=1.3, Bc=2.0, xC=6.0, mu=1.7, q=0.8, c=1.4)
    report = constraints.analyze(cfg)
    values = reduced.source_angular_momentum(cfg, report.samples)
    expected = 0.5 * cfg.constants.mu * cfg.constants.omega(0.9) * 1.3**2
    np.testing.assert_allclose(values, expected, rtol=1e-13)


@pytest.mark.parametrize("B, expected", [(1.0, 1.0), (4.0, 0.5)])
def test_min_trap_radius(B, expected):
    assert reduced.min_trap_radius(PhysicalConstants(), B) == expected


def test_min_trap_radius_scaling():
    cst = PhysicalConstants(hbar=0.3, c=2.0, q=1.1)
    assert reduced.min_trap_radius(cst, 8.0) == pytest.approx(reduced.min_trap_radius(cst, 2.0) / 2, rel=1e-15)
    with pytest.raises(ConfigError):
        reduced.min_trap_radius(cst, 0.0)


def test_trap_size_warning():
    with pytest.warns(reduced.TrapSizeWarning):
        assert not reduced.check_trap_size(make_config(Bc=1.0, ac=0.5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert reduced.check_trap_size(make_config(Bc=1.0, ac=1.5))


def test_noise_response():
    system = _system(Bc=1.0, B0=0.5)
    assert reduced.noise_response(system, 0.0) is system
    shifted = reduced.noise_response(system, 0.1)
    assert shifted.ground_energy == pytest.approx(0.55, rel=1e-15)
    assert shifted.J_AB == system.J_AB
    rng = np.random.default_rng(8)
    J = [reduced.noise_response(system, d).J_AB for d in rng.uniform(-0.5, 0.5, 100)]
    assert np.var(J) == 0.0
    with pytest.raises(DegenerateSystemError):
        reduced.noise_response(system, -1.0)


def test_reduce_refuses_blind_area():
    cfg = make_config(region="InterveningRegion")
    with pytest.raises(DegenerateSystemError):
        reduced.reduce(cfg, constraints.analyze(cfg))


def test_reduce_refuses_foreign_report():
    cfg = make_config()
    other = make_config(Bc=3.0)
    with pytest.raises(ConfigError):
        reduced.reduce(cfg, constraints.analyze(other))


def test_linear_in_flux():
    cst = PhysicalConstants(q=1.3, c=0.7)
    fluxes = np.linspace(-4, 4, 9)
    J = np.array([_system(B0=f / math.pi, q=1.3, c=0.7).J_AB for f in fluxes])
    slope = np.diff(J) / np.diff(fluxes)
    np.testing.assert_allclose(slope, cst.q / (2 * math.pi * cst.c), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(J=st.floats(-50, 50), n=st.integers(0, 20))
def test_flux_for_angular_momentum_round_trip(J, n):
    cst = PhysicalConstants(q=2.0, c=3.0, hbar=0.5)
    flux = reduced.flux_for_angular_momentum(cst, J, n)
    target = reduced.flux_angular_momentum(cst, flux) + cst.hbar * (n + 0.5)
    assert target == pytest.approx(J, abs=1e-12 * max(1.0, abs(J)))


def test_gauge_shift_does_not_change_spectrum():
    cfg = make_config(Bc=3.0, B0=0.4)
    shifted = constraints.reduced_circle_ii(cfg, shifted=True)
    manual = constraints.reduced_circle_ii(cfg, shifted=False)
    pts = constraints.sample_region(shifted, 32)
    np.testing.assert_allclose(
        constraints.constraint_matrix(shifted, pts), constraints.constraint_matrix(manual, pts), rtol=1e-12
    )
    diff = constraints.canonical_momenta(manual, pts) - constraints.canonical_momenta(shifted, pts)
    # the two differ by the constant gradient of chi
    np.testing.assert_allclose(diff, np.broadcast_to(diff[0], diff.shape), atol=1e-12)
