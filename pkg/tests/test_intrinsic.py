from __future__ import annotations

import math

import numpy as np
import pytest

from gkplitho.exceptions import DomainError, GridError
from gkplitho.ideal_code import ErrorRegionSet, position_error_regions
from gkplitho.intrinsic import (
    codeword_autocorrelation, evaluate_report, find_minimum, minimum_of_rows, overlap_exact,
    p_minus_bound, p_p_direct, p_p_exact, p_plus_bound, p_x_closed_form, p_x_region_sum, sweep_g0,
    weight_coefficients,
)
from gkplitho.lithography import codeword_pair, conditional_wavefunction, overlap
from gkplitho.physical import CESIUM, d_from_g0
from gkplitho.spectral import MomentumSpectrum, momentum_wavefunction

PI = math.pi

# 30-digit mpmath quadratures of the closed form.
PX_24_20 = 9.26272589942710951446396800166e-05
PX_1_4 = 0.19357153939220090101989184134
# Envelope partial sums (n_max = 50) from composite Simpson, 4e5 panels per region.
PPLUS_PARTIAL_24_20 = 0.031008504669961138
PMINUS_PARTIAL_24_20 = 0.11431358105062206
OVERLAP_24_20 = 0.002316020114505671


@pytest.mark.parametrize("d", [2, 4, 20, 1000])
def test_p_x_alpha_zero_exact(d):
    assert p_x_closed_form(0.0, d) == (4 * d - 1) / (8 * d)


def test_p_x_oracles():
    assert p_x_closed_form(0.0, 20) == 0.49375
    assert p_x_closed_form(2.4, 20) == pytest.approx(PX_24_20, rel=1e-9)
    assert p_x_closed_form(1.0, 4) == pytest.approx(PX_1_4, rel=1e-9)


def test_p_x_decreasing_in_alpha():
    vals = [p_x_closed_form(a, 20) for a in (0.5, 1.0, 2.0, 3.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.4])
@pytest.mark.parametrize("d", [4, 20])
def test_region_sum_identity(alpha, d):
    wf, _ = conditional_wavefunction(alpha, d)
    closed = p_x_closed_form(alpha, d)
    summed = p_x_region_sum(wf, position_error_regions(d))
    assert abs(summed - closed) <= 1e-8 * closed


def test_region_sum_trapezoid_is_first_order_limited():
    wf, _ = conditional_wavefunction(2.4, 20)
    closed = p_x_closed_form(2.4, 20)
    trap = p_x_region_sum(wf, position_error_regions(20), rule="trapezoid")
    assert abs(trap - closed) / closed < 1e-3
    with pytest.raises(DomainError):
        p_x_region_sum(wf, position_error_regions(20), rule="midpoint")


def test_region_sum_phi1_complementary(fig2_pair):
    phi0, phi1, _ = fig2_pair
    r0 = position_error_regions(20)
    r1 = ErrorRegionSet("position", r0.index, tuple(v + PI / 4 for v in r0.lo),
                        tuple(v + PI / 4 for v in r0.hi))
    assert p_x_region_sum(phi1, r1) == pytest.approx(p_x_region_sum(phi0, r0), rel=1e-12)


def test_region_outside_support_refused(fig2_pair):
    phi0, _, _ = fig2_pair
    with pytest.raises(GridError):
        p_x_region_sum(phi0, position_error_regions(21))


def test_weight_coefficients_reconstruct_weight():
    m = np.arange(-4000, 4001)
    h = weight_coefficients(m)
    u = np.linspace(-PI, PI, 41)[1:-1]
    u = u[np.abs(np.abs(u) - PI / 2) > 0.2]
    series = (h[None, :] * np.exp(1j * np.outer(u, m))).sum(axis=1).real
    target = (1 - np.cos(u)) * (np.abs(u) <= PI / 2)
    assert np.max(np.abs(series - target)) < 2e-3


def test_autocorrelation_zero_lag_and_overlap():
    acf = codeword_autocorrelation(2.4, 20)
    assert acf[0] == pytest.approx(1.0, abs=1e-10)
    assert overlap_exact(2.4, 20) == pytest.approx(OVERLAP_24_20, abs=1e-12)


def test_overlap_routes_agree(fig2_pair):
    phi0, phi1, _ = fig2_pair
    assert overlap_exact(2.4, 20) == pytest.approx(overlap(phi0, phi1), abs=1e-12)


def test_overlap_exact_uniform():
    d = 8
    assert overlap_exact(0.0, d).real == pytest.approx(1 - 1 / (8 * (d / 2)), abs=1e-12)


@pytest.fixture(scope="module")
def fig2_direct(fig2_spectra, fig2_pair):
    s0, _ = fig2_spectra
    s01 = overlap(fig2_pair[0], fig2_pair[1]).real
    npl, nmi = 2 * (1 + s01), 2 * (1 - s01)
    return (p_p_direct(s0, "+", 50, npl), p_p_direct(s0, "-", 50, nmi), npl, nmi)


def test_momentum_error_routes_agree(fig2_direct):
    pp, pm, _, _ = fig2_direct
    ep, em, _ = p_p_exact(2.4, 20)
    assert pp == pytest.approx(ep, rel=1e-3)
    assert pm == pytest.approx(em, rel=1e-3)


@pytest.mark.parametrize("alpha,d", [(1.0, 4), (1.7, 6), (2.4, 4)])
def test_momentum_error_routes_agree_small(alpha, d):
    phi0, phi1, _ = codeword_pair(alpha, d)
    spec = momentum_wavefunction(phi0, 8)
    n_max = int((spec.p_max - 4 * PI) // (16 * PI)) - 1
    s01 = overlap(phi0, phi1).real
    ep, em, _ = p_p_exact(alpha, d)
    assert p_p_direct(spec, "+", n_max, 2 * (1 + s01)) == pytest.approx(ep, rel=2e-3, abs=1e-6)
    assert p_p_direct(spec, "-", n_max, 2 * (1 - s01)) == pytest.approx(em, rel=2e-3, abs=1e-6)


def test_weighted_masses_partition(fig2_spectra, fig2_direct):
    # over the whole axis (1 +- cos(p/8)) |psi_0|^2 integrates to N+-^2 / 2
    s0, _ = fig2_spectra
    _, _, npl, nmi = fig2_direct
    c = np.cos(s0.p / 8)
    plus = float(np.sum((1 + c) * s0.abs2) * s0.dp)
    minus = float(np.sum((1 - c) * s0.abs2) * s0.dp)
    assert 2 * plus == pytest.approx(npl, rel=1e-6)
    assert 2 * minus == pytest.approx(nmi, rel=1e-6)
    assert 2 * (plus + minus) == pytest.approx(4.0, rel=1e-6)


def test_p_p_direct_ideal_comb_has_no_plus_error():
    dp = PI / 64
    p = np.arange(-16384, 16384) * dp
    centres = 16 * PI * np.arange(-5, 6)
    psi = np.exp(-((p[:, None] - centres[None, :]) ** 2) / (2 * 0.5**2)).sum(axis=1)
    psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * dp)
    spec = MomentumSpectrum(p=p, psi=psi.astype(complex), dp=dp, padding=1)
    assert p_p_direct(spec, "+", 2, 2.0) < 1e-12


def test_p_p_direct_refuses_short_spectrum(fig2_spectra):
    s0, _ = fig2_spectra
    with pytest.raises(GridError):
        p_p_direct(s0, "+", 10_000, 2.0)


def test_bound_values_match_independent_quadrature():
    bp, bm = p_plus_bound(2.4, 20, 50), p_minus_bound(2.4, 20, 50)
    assert bp.partial == pytest.approx(PPLUS_PARTIAL_24_20, rel=1e-8)
    assert bm.partial == pytest.approx(PMINUS_PARTIAL_24_20, rel=1e-8)
    assert bp.value == bp.partial + bp.tail_cap


@pytest.mark.parametrize("bound", [p_plus_bound, p_minus_bound])
def test_bound_terms_decay(bound):
    res = bound(2.4, 20, 16)
    terms = res.terms
    assert all(t > 0 for t in terms)
    for n in (4, 8):
        assert terms[2 * n] < terms[n] / 2


@pytest.mark.parametrize("bound", [p_plus_bound, p_minus_bound])
@pytest.mark.parametrize("alpha,d", [(2.4, 20), (1.0, 4), (2.3, 12406)])
def test_bound_converges_within_tail_cap(bound, alpha, d):
    a, b = bound(alpha, d, 50), bound(alpha, d, 100)
    assert abs(b.value - a.value) < a.tail_cap
    assert b.partial >= a.partial


@pytest.mark.parametrize("bound", [p_plus_bound, p_minus_bound])
def test_bound_partial_sum_stable_on_doubling(bound):
    a, b = bound(2.4, 20, 50), bound(2.4, 20, 100)
    assert abs(b.partial - a.partial) / a.partial < 1e-3


def test_bound_prefactors_with_orthogonal_limit():
    # with norm^2 = 2 the two prefactors are 16/pi and 8/pi times N0^2 / 2
    bp = p_plus_bound(3.0, 6, 5, norm_sq=2.0)
    bp4 = p_plus_bound(3.0, 6, 5, norm_sq=4.0)
    assert bp.value == pytest.approx(2 * bp4.value, rel=1e-14)


def test_central_term_finite():
    res = p_minus_bound(0.5, 2, 1)
    assert math.isfinite(res.terms[0]) and res.terms[0] > 0


@pytest.mark.parametrize("alpha,d", [(2.4, 20), (1.0, 4), (2.3, 12406)])
def test_dominance(alpha, d):
    rep = evaluate_report(alpha, d)
    assert rep.Pp_plus <= rep.P_plus * (1 + 1e-6)
    assert rep.Pp_minus <= rep.P_minus * (1 + 1e-6)


def test_report_assembly():
    rep = evaluate_report(2.4, 20)
    assert rep.P_max == max(rep.P_x, rep.P_plus, rep.P_minus)
    assert rep.norm_sq_plus + rep.norm_sq_minus == pytest.approx(4.0, abs=1e-14)
    assert rep.P_x == pytest.approx(PX_24_20, rel=1e-9)
    assert set(rep.to_dict()) >= {"P_x", "Pp_plus", "Pp_minus", "P_plus", "P_minus", "P_max", "n_max"}


def test_report_spectrum_method_matches_exact():
    a = evaluate_report(1.0, 4, method="exact")
    b = evaluate_report(1.0, 4, n_max=30, method="spectrum")
    assert b.Pp_plus == pytest.approx(a.Pp_plus, rel=2e-3)
    with pytest.raises(DomainError):
        evaluate_report(1.0, 4, method="nope")


def test_report_alpha_zero_maximum_is_position_error():
    rep = evaluate_report(0.0, 20)
    assert rep.P_x == 0.49375
    assert rep.P_max == rep.P_x


def test_report_at_operating_point():
    rep = evaluate_report(2.3093652261348718, 12406)
    assert 2e-4 / 3 <= rep.P_max <= 2e-4 * 3


def test_find_minimum_parabola_vertex():
    g = np.logspace(6, 9, 31)
    lx = np.log10(g)
    y = 10 ** (0.7 * (lx - 7.3) ** 2 - 3.5)
    res = find_minimum(g, y)
    assert res.bracketed
    assert math.log10(res.g0) == pytest.approx(7.3, abs=1e-10)
    assert math.log10(res.P_max) == pytest.approx(-3.5, abs=1e-10)


def test_find_minimum_monotone_edge():
    g = np.logspace(6, 9, 5)
    res = find_minimum(g, 1 / g)
    assert not res.bracketed and res.index == 4
    with pytest.raises(DomainError):
        find_minimum(g[:2], g[:2])


def test_sweep_refusals():
    with pytest.raises(DomainError):
        sweep_g0(1e6, 1e6, 10)
    with pytest.raises(DomainError):
        sweep_g0(1e6, 1e7, 2)


def test_sweep_rows_and_parallel_determinism():
    serial = sweep_g0(1e7, 4e7, 4)
    parallel = sweep_g0(1e7, 4e7, 4, workers=2)
    assert [r.index for r in parallel] == [0, 1, 2, 3]
    for a, b in zip(serial, parallel):
        assert a.report == b.report and a.g0 == b.g0
    for r in serial:
        assert r.d == d_from_g0(CESIUM, 20e-6, r.g0)
        assert r.alpha ** 3 == pytest.approx(r.g0 / 1299098.6054823969, rel=1e-12)


def test_sweep_flags_infeasible_rows():
    rows = sweep_g0(1e9, 1e13, 3)
    assert len(rows) == 3
    assert not rows[-1].feasible and rows[-1].report is None and math.isnan(rows[-1].P_max)


@pytest.fixture(scope="module")
def default_sweep():
    return sweep_g0()


@pytest.mark.slow
def test_sweep_trends(default_sweep):
    rows = default_sweep
    px = np.array([r.report.P_x for r in rows])
    pp = np.array([r.report.P_plus for r in rows])
    pm = np.array([r.report.P_minus for r in rows])
    alpha = np.array([r.alpha for r in rows])
    assert np.all(np.diff(px) < 0)
    assert np.all(np.diff(pp) > 0) and np.all(np.diff(pm) > 0)
    assert np.all(np.diff(alpha) > 0)
    g0 = np.array([r.g0 for r in rows])
    assert np.allclose(alpha / g0 ** (1 / 3), alpha[0] / g0[0] ** (1 / 3), rtol=1e-12)


@pytest.mark.slow
def test_sweep_minimum(default_sweep):
    best = minimum_of_rows(default_sweep)
    assert best.bracketed
    assert 16e6 / 2.5 <= best.g0 <= 16e6 * 2.5
    assert 2e-4 / 3 <= best.P_max <= 2e-4 * 3
    assert d_from_g0(CESIUM, 20e-6, best.g0) == pytest.approx(11240, rel=0.02)


@pytest.mark.slow
def test_sweep_dominance(default_sweep):
    bad = [r.index for r in default_sweep
           if not (r.report.Pp_plus <= r.report.P_plus * (1 + 1e-6)
                   and r.report.Pp_minus <= r.report.P_minus * (1 + 1e-6))]
    assert bad == []
