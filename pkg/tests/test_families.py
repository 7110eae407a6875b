import math

import numpy as np
import pytest

import szegocap as sc
from szegocap.errors import ConfigurationError, DomainError
from szegocap.families import SymbolSpec, envelope_l1_norm

ALL_FAMILIES = ("band_constant", "cosine_gauss", "square_smooth", "two_tone")


def test_eval_band_constant_on_band():
    spec = sc.make_symbol("band_constant", c=1.0, W=0.5)
    assert sc.eval_symbol(spec, 0.3, 0.0) == 1.0


def test_eval_band_constant_midpoint_at_jump():
    spec = sc.make_symbol("band_constant", c=2.0, W=0.5)
    assert sc.eval_symbol(spec, 0.0, 0.5) == 1.0
    assert sc.eval_symbol(spec, 0.0, -0.5) == 1.0
    assert sc.eval_symbol(spec, 0.0, 0.5001) == 0.0


def test_eval_cosine_gauss_half_period_zero():
    spec = sc.make_symbol("cosine_gauss", w=1.0)
    assert abs(sc.eval_symbol(spec, 0.5, 0.0)) < 1e-15


def test_eval_cosine_gauss_quarter_period():
    spec = sc.make_symbol("cosine_gauss", w=1.0)
    expected = 0.5 * math.exp(-0.5)
    assert sc.eval_symbol(spec, 0.25, 1.0) == pytest.approx(expected, rel=1e-12)


def test_unknown_family_raises_configuration_error():
    with pytest.raises(ConfigurationError):
        sc.make_symbol("no_such_family")
    bogus = SymbolSpec(family_name="no_such_family", params=(), period_x=None,
                       omega_decay="?", smoothness_order=0)
    with pytest.raises(ConfigurationError):
        sc.eval_symbol(bogus, 0.0, 0.0)


def test_bad_parameters_raise_domain_error():
    with pytest.raises(DomainError):
        sc.make_symbol("band_constant", W=0.0)
    with pytest.raises(DomainError):
        sc.make_symbol("cosine_gauss", w=-1.0)
    with pytest.raises(DomainError):
        sc.make_symbol("square_smooth", beta=2.0)
    with pytest.raises(DomainError):
        sc.make_symbol("band_constant", bogus=1.0)


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_values_finite_and_real(name):
    spec = sc.make_symbol(name)
    x = np.linspace(-3.0, 3.0, 41)[:, None]
    omega = np.linspace(-9.0, 9.0, 57)[None, :]
    vals = sc.eval_symbol(spec, x, omega)
    assert np.all(np.isfinite(vals))
    assert vals.dtype == np.float64


@pytest.mark.parametrize("name", ("cosine_gauss", "square_smooth", "two_tone"))
def test_periodicity(name):
    spec = sc.make_symbol(name)
    p = spec.period_x
    assert p == 1.0
    x = np.linspace(-2.0, 2.0, 101)[:, None]
    omega = np.linspace(-8.0, 8.0, 33)[None, :]
    a = sc.eval_symbol(spec, x, omega)
    b = sc.eval_symbol(spec, x + p, omega)
    assert np.abs(a - b).max() <= 1e-12


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_omega_square_integrability_under_doubling(name):
    # truncated int |sigma(x, .)|^2 converges as the truncation grows
    spec = sc.make_symbol(name)
    x = 0.1

    def tail_energy(om_max):
        # fixed spacing so the jump-quadrature residue cancels between ranges
        k = int(om_max * 4000)
        om = np.arange(-k, k + 1) / 4000.0
        vals = np.asarray(sc.eval_symbol(spec, x, om))
        return np.trapezoid(vals ** 2, om)

    e8, e16, e32 = tail_energy(8.0), tail_energy(16.0), tail_energy(32.0)
    assert abs(e16 - e8) <= 1e-6 * max(e8, 1e-12) + 1e-9
    assert abs(e32 - e16) <= abs(e16 - e8) + 1e-12


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_partial_derivatives_match_finite_differences(name):
    spec = sc.make_symbol(name)
    # generic points away from band edges and raised-cosine junctions
    xs = np.array([0.13, 0.31, 0.62, 0.87])
    oms = np.array([-2.31, -0.17, 0.41, 1.73]) * 0.1
    h = 1e-6
    for x in xs:
        for om in oms:
            dx = (sc.eval_symbol(spec, x + h, om) - sc.eval_symbol(spec, x - h, om)) / (2 * h)
            dom = (sc.eval_symbol(spec, x, om + h) - sc.eval_symbol(spec, x, om - h)) / (2 * h)
            assert sc.eval_symbol_dx(spec, x, om) == pytest.approx(dx, rel=1e-5, abs=1e-7)
            assert sc.eval_symbol_domega(spec, x, om) == pytest.approx(dom, rel=1e-5, abs=1e-7)


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_default_envelope_tail_constant(name):
    spec = sc.make_symbol(name)
    env = sc.default_envelope(spec)
    assert env.tail_constant > 0
    z = np.linspace(0.0, 50.0, 2001)
    assert np.all(env.psi(z) >= 0)
    assert envelope_l1_norm(env) > 0


def test_metadata_flags():
    band = sc.make_symbol("band_constant")
    assert band.time_invariant and band.period_x is None
    assert band.smoothness_order == 0
    cg = sc.make_symbol("cosine_gauss")
    assert not cg.time_invariant and cg.period_x == 1.0
    assert cg.smoothness_order >= 3
    assert sc.make_symbol("square_smooth").smoothness_order < 3
