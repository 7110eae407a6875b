import numpy as np
import pytest

import szegocap as sc
from szegocap.errors import ConfigurationError, DomainError
from szegocap.harness import (EpsSchedule, fit_loglog,
                              run_convergence_sweep, run_hs_boundary_check,
                              run_stability_check, run_symbol_calculus_check,
                              run_trace_norm_scaling)
from szegocap.reports import report_csv
from szegocap.spectral import eigh_matrix


COSINE = sc.make_symbol("cosine_gauss")
BAND = sc.make_symbol("band_constant", c=1.0, W=0.25)


def test_split_identity_is_exact():
    rep = run_convergence_sweep(COSINE, 1.0, [2, 4])
    for rec in rep.records:
        assert "error" not in rec.extra
        gap = abs(rec.error_total - (rec.error_stability + rec.error_calculus))
        assert gap <= 1e-12


def test_degenerate_flat_band_matches_symbol_formula():
    # symbol constant across the whole truncated frequency axis: the residual
    # gap is quadrature-only
    wide = sc.make_symbol("band_constant", c=1.0, W=9.0)   # flat beyond omega_max
    edge = sc.make_symbol("band_constant", c=1.0, W=8.0)   # jump at omega_max
    for spec in (wide, edge):
        rep = run_convergence_sweep(spec, 1.0, [4, 8])
        for rec in rep.records:
            assert rec.extra["capacity_abs_diff"] <= 1e-3


def test_convergence_records_and_fits():
    rep = run_convergence_sweep(BAND, 1.0, [4, 8, 16])
    diffs = [r.extra["capacity_abs_diff"] for r in rep.records]
    assert diffs[2] < diffs[0]
    assert "capacity_abs_diff" in rep.fits
    assert rep.summary["capacity_symbol"] > 0


def test_eps_schedule_coupling_errors_decrease():
    # the eps-bias and the restriction bias carry opposite signs and cancel
    # near alpha ~ 8, so the decrease is asserted endpoint-to-endpoint
    sched = EpsSchedule(mode="alpha_power", delta=0.125)
    rep = run_convergence_sweep(COSINE, 1.0, [4, 8, 16], eps_schedule=sched)
    errs = [abs(r.error_total) for r in rep.records]
    assert errs[-1] < errs[0]
    eps = [r.eps for r in rep.records]
    assert eps[0] == pytest.approx(4.0 ** -0.125)
    assert eps[0] > eps[1] > eps[2]


def test_stability_quadratic_identity():
    # f = x^2: trace difference equals -||P L (1-P)||_I2^2 / alpha exactly
    alpha = 4
    grid = sc.make_grid(alpha)
    herm = sc.hermitize(sc.quantize(COSINE, grid))
    mask = grid.window_mask()
    lam_in, _ = eigh_matrix(sc.window_block(herm), want_basis=False)
    lam_full, basis = eigh_matrix(herm.matrix)
    wts = (np.abs(basis[mask, :]) ** 2).sum(axis=0)
    diff = (np.sum(lam_in ** 2) - np.sum(lam_full ** 2 * wts)) / alpha
    hs_cross = float(np.sum(np.abs(herm.matrix[mask][:, ~mask]) ** 2))
    assert diff == pytest.approx(-hs_cross / alpha, rel=1e-9)


def test_stability_linear_function_vanishes():
    rep = run_stability_check(COSINE, lambda x: 2.0 * np.asarray(x), [2, 4],
                              f_second_sup=1.0)
    for rec in rep.records:
        assert abs(rec.error_stability) <= 1e-9


def test_stability_padding_guard():
    f = sc.build_f_eps("log", 0.1)
    with pytest.raises(ConfigurationError):
        run_stability_check(BAND, f, [4])          # 1/z^2 envelope tail >> 1e-8
    rep = run_stability_check(BAND, f, [4, 8], padding_tol=1.0)
    assert all("error" not in r.extra for r in rep.records)
    assert all(r.extra["ratio"] >= 0 for r in rep.records)


def test_hs_boundary_check_band():
    rep = run_hs_boundary_check(BAND, [4, 8, 16])
    assert rep.summary["hs_bound_ok_all"]
    crosses = [r.hs_cross_norm for r in rep.records]
    assert crosses[0] < crosses[1] < crosses[2]   # grows with alpha
    assert "hs_cross_vs_log_alpha" in rep.fits


def test_symbol_calculus_zero_s_is_exact_zero():
    rep = run_symbol_calculus_check(COSINE, [0.0, 0.5], [2, 4])
    for rec in rep.records:
        assert rec.q_alpha[0.0] == 0.0
        assert rec.q_alpha[0.5] > 0.0


def test_symbol_calculus_rejects_rough_families():
    with pytest.raises(DomainError):
        run_symbol_calculus_check(BAND, [0.5], [4])
    with pytest.raises(DomainError):
        run_symbol_calculus_check(sc.make_symbol("square_smooth"), [0.5], [4])


def test_trace_norm_time_invariant_is_exact_zero():
    rep = run_trace_norm_scaling(BAND, 0.5, [2, 4])
    for rec in rep.records:
        assert rec.tp_i1 == 0.0 and rec.tp_i2 == 0.0


def test_trace_norm_requires_integer_alpha():
    with pytest.raises(DomainError):
        run_trace_norm_scaling(COSINE, 0.5, [2.5])


def test_trace_norm_adjoint_consistency():
    # kernel-level T agrees with adjoint(quantize(conj tau)) - quantize(tau)
    from szegocap.operators import SymbolFunctionSpec
    from szegocap.families import sample_symbol
    from szegocap.transforms import two_symbol_kernel
    s, alpha = 0.5, 2
    grid = sc.make_grid(alpha)
    sigma = sample_symbol(COSINE, grid)
    tau = np.exp(2j * np.pi * s * sigma)
    ones = np.ones_like(sigma)
    t_kernel = grid.h_x * (two_symbol_kernel(ones, tau, grid)
                           - two_symbol_kernel(tau, ones, grid))
    a_tau = sc.quantize(SymbolFunctionSpec(COSINE, "exp_i2pi_s", s=s), grid)
    a_tau_conj = sc.quantize(SymbolFunctionSpec(COSINE, "exp_i2pi_s", s=-s), grid)
    t_matrix = sc.adjoint(a_tau_conj).matrix - a_tau.matrix
    assert np.abs(t_kernel - t_matrix).max() <= 1e-8


def test_sweep_determinism_bit_identical():
    a = run_hs_boundary_check(BAND, [2, 4])
    b = run_hs_boundary_check(BAND, [2, 4])
    assert report_csv(a) == report_csv(b)


def test_per_alpha_failures_are_recorded(monkeypatch):
    import szegocap.harness as hz

    real_quantize = hz.quantize

    def flaky(spec, grid):
        if grid.alpha == 4.0:
            raise sc.NumericalError("synthetic failure")
        return real_quantize(spec, grid)

    monkeypatch.setattr(hz, "quantize", flaky)
    rep = run_hs_boundary_check(BAND, [2, 4, 8])
    assert "error" in rep.records[1].extra
    assert rep.records[0].hs_cross_norm is not None
    assert rep.records[2].hs_cross_norm is not None


def test_fit_loglog_recovers_slope():
    xs = np.array([4.0, 8.0, 16.0, 32.0])
    ys = 3.0 * xs ** 0.5
    fit = fit_loglog(xs, ys)
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.ci95_lo <= 0.5 + 1e-12 and 0.5 - 1e-12 <= fit.ci95_hi
