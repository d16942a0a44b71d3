"""Intrinsic error probabilities of the generated codewords and the g0 sweep.

Position errors ``P_x`` come from the tails of ``|phi_0|^2`` falling in the
regions centred on the other codeword's lattice. Momentum errors ``P_p,+-``
weight ``|psi_0(p)|^2`` by ``1 +- cos(p/8)`` over the regions around the wrong
comb. ``P_+-`` are the analytic sinc-envelope upper estimates of those.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special

from .exceptions import DomainError, GKPLithoError, GridError, NumericalError
from .ideal_code import ErrorRegionSet, momentum_error_regions, position_error_regions
from .lithography import (
    QUARTER, GridSpec, SampledWaveFunction, _quad, codeword_pair, j_integral, make_grid,
)
from .physical import CESIUM, AtomSpecies, PhysicalSetup, check_feasibility
from .spectral import MomentumSpectrum, momentum_wavefunction

DEFAULT_N_MAX = 50
QUAD_RTOL = 1e-10
_BETA = 1.0 / 8.0


def _validate(alpha: float, d: int) -> int:
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    if int(d) != d or d < 2:
        raise DomainError(f"d must be an integer >= 2, got {d!r}")
    return int(d)


def n0_squared(alpha: float, d: int, J: float | None = None) -> float:
    """``N_0^2 = 2 pi / (d J(alpha, 0))``."""
    if J is None:
        J = j_integral(alpha)
    return 2 * math.pi / (d * J)


# ---- position errors ------------------------------------------------------

def p_x_closed_form(alpha: float, d: int, rtol: float = QUAD_RTOL) -> float:
    """``(4d - 1) N_0^2 / (2 pi) int_0^{pi/8} exp(-2 alpha_1^2) dy``."""
    d = _validate(alpha, d)
    if alpha == 0:
        return (4 * d - 1) / (8 * d)
    J = j_integral(alpha, rtol=rtol)

    def f(y):
        a1 = alpha * math.cos(math.pi * math.cos(y) ** 2)
        return math.exp(-2 * a1 * a1)

    half_region = _quad(f, 0.0, math.pi / 8, rtol=rtol, what="P_x half-region integral")
    return (4 * d - 1) / (d * J) * half_region


def _region_integral(samples: np.ndarray, dy: float, rule: str) -> float:
    n = samples.size - 1
    if rule == "romberg" and n >= 2 and n & (n - 1) == 0:
        return float(integrate.romb(samples, dx=dy))
    if rule == "trapezoid" or n < 2:
        return float(dy * (samples.sum() - 0.5 * (samples[0] + samples[-1])))
    return float(integrate.simpson(samples, dx=dy))


def p_x_region_sum(wf: SampledWaveFunction, regions: ErrorRegionSet, rule: str = "romberg") -> float:
    """Sum of ``int_R |phi|^2 dy / (2 pi)`` over the regions, from the samples.

    ``rule="romberg"`` needs ``2^k + 1`` samples per region (the default grids
    provide that) and falls back to Simpson otherwise; ``"trapezoid"`` is the
    plain rule.
    """
    if rule not in ("romberg", "trapezoid"):
        raise DomainError(f"unknown rule {rule!r}")
    lo_s, hi_s = wf.support
    a2 = wf.abs2
    total = 0.0
    for _, lo, hi in regions:
        i, j = wf.grid.steps(lo), wf.grid.steps(hi)
        if i < lo_s or j > hi_s:
            raise GridError(f"region [{lo:.6g}, {hi:.6g}] extends past the wavefunction support")
        total += _region_integral(a2[i:j + 1], wf.dy, rule)
    return total / (2 * math.pi)


# ---- momentum errors from a grid spectrum ---------------------------------

def _piecewise_linear_primitive(p: np.ndarray, g: np.ndarray, dp: float):
    cum = np.concatenate(([0.0], np.cumsum(0.5 * dp * (g[1:] + g[:-1]))))

    def primitive(q):
        t = (np.asarray(q, dtype=float) - p[0]) / dp
        k = np.clip(np.floor(t).astype(int), 0, p.size - 2)
        s = t - k
        return cum[k] + dp * s * (g[k] + 0.5 * s * (g[k + 1] - g[k]))

    return primitive


def p_p_direct(spectrum: MomentumSpectrum, sign: str, n_max: int, norm_sq: float) -> float:
    """``(2 / norm_sq) sum_n int_{R_n} (1 +- cos(p/8)) |psi_0(p)|^2 dp`` on the grid.

    Trapezoid rule on the piecewise-linear interpolant, so region edges that
    fall inside a cell contribute the exact fractional cell.
    """
    regions = momentum_error_regions(sign, n_max)
    if regions.lo[0] < spectrum.p[0] or regions.hi[-1] > spectrum.p[-1]:
        raise GridError(f"spectrum extent |p| <= {spectrum.p_max:.6g} is too small for n_max={n_max} "
                        f"(needs {regions.hi[-1]:.6g})")
    s = 1.0 if sign == "+" else -1.0
    g = (1.0 + s * np.cos(spectrum.p * _BETA)) * spectrum.abs2
    prim = _piecewise_linear_primitive(spectrum.p, g, spectrum.dp)
    total = float(np.sum(prim(np.asarray(regions.hi)) - prim(np.asarray(regions.lo))))
    return 2.0 / norm_sq * total


# ---- momentum errors from the exact autocorrelation series ----------------

def _i_coeff(k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    safe = np.where(k == 0, 1.0, k)
    return np.where(k == 0, math.pi, 2.0 * np.sin(k * math.pi / 2) / safe)


def weight_coefficients(m: np.ndarray) -> np.ndarray:
    """Fourier coefficients of ``(1 - cos u) [|u| <= pi/2]`` on the 2 pi circle, ``u = p/8``."""
    m = np.asarray(m)
    return (_i_coeff(m) - 0.5 * (_i_coeff(m - 1) + _i_coeff(m + 1))) / (2 * math.pi)


def _period_overlaps(alpha: float, rtol: float) -> np.ndarray:
    """``B[r, 0] = B_r(1/2)`` and ``B[r, 1] = B_r(1/2 - r/8)`` for unnormalized phi_0.

    ``B_r(u) = int_0^u conj(phi(x)) phi(x + r/8) dx`` with
    ``phi = exp(-a1^2 - i a1 a2)``, integrated in ``y`` over one pi-period.
    """
    def amp(y):
        a1 = alpha * math.cos(math.pi * math.cos(y) ** 2)
        a2 = alpha * math.sin(math.pi * math.cos(y) ** 2)
        return complex(math.exp(-a1 * a1) * math.cos(a1 * a2), -math.exp(-a1 * a1) * math.sin(a1 * a2))

    out = np.zeros((4, 2), dtype=complex)
    # Lags that misalign the peaks give near-zero integrals; tolerances are
    # taken relative to the period norm.
    atol = rtol * j_integral(alpha, rtol=rtol)
    peaks = [math.pi / 4, 3 * math.pi / 4]
    for r in range(4):
        shift = r * QUARTER
        pts = sorted({pk for pk in peaks} | {(pk - shift) % math.pi for pk in peaks})

        def re(y):
            return (amp(y).conjugate() * amp(y + shift)).real

        def im(y):
            return (amp(y).conjugate() * amp(y + shift)).imag

        for col, upper in enumerate((math.pi, math.pi - shift)):
            inner = [p for p in pts if 0 < p < upper]
            v_re = _quad(re, 0.0, upper, rtol=rtol, atol=atol, points=inner,
                         what=f"B_{r} real part")
            v_im = _quad(im, 0.0, upper, rtol=rtol, atol=atol, points=inner,
                         what=f"B_{r} imaginary part") if alpha > 0 else 0.0
            out[r, col] = complex(v_re, v_im) / (2 * math.pi)
    return out


def codeword_autocorrelation(alpha: float, d: int, rtol: float = QUAD_RTOL):
    """Exact ``A(m/8) = int conj(phi_0(x)) phi_0(x + m/8) dx`` for ``m = 0 .. 4d - 1``.

    Periodicity of phi_0 reduces every lag to two single-period integrals per
    residue ``r = m mod 4``.
    """
    d = _validate(alpha, d)
    J = j_integral(alpha, rtol=rtol)
    b = _period_overlaps(alpha, rtol) * n0_squared(alpha, d, J)
    m = np.arange(4 * d)
    q, r = np.divmod(m, 4)
    return (d - q - 1) * b[r, 0] + b[r, 1]


def overlap_exact(alpha: float, d: int, rtol: float = QUAD_RTOL) -> complex:
    """``<0~|1~>`` for |1~> = |0~> displaced by pi/4 in ``y``."""
    return complex(np.conj(codeword_autocorrelation(alpha, d, rtol)[1]))


def p_p_exact(alpha: float, d: int, rtol: float = QUAD_RTOL) -> tuple[float, float, complex]:
    """``(P_p,+, P_p,-, <0~|1~>)`` summed over every momentum region (n_max = infinity).

    The 16 pi-periodic weight ``[R^+-](p) (1 +- cos(p/8))`` has a finite
    Fourier pairing with ``|psi_0|^2``, turning each probability into a sum
    over the position-space autocorrelation at lags ``m/8``.
    """
    acf = codeword_autocorrelation(alpha, d, rtol)
    m = np.arange(acf.size)
    h = weight_coefficients(m)
    s01 = complex(np.conj(acf[1]))
    out = []
    for sgn in (-1.0, 1.0):  # "+" regions are the "-" pattern shifted by 8 pi
        sign_m = sgn ** m
        mass = h[0] * acf[0].real + 2.0 * np.sum((sign_m * h * acf.real)[1:])
        norm_sq = 2.0 * (1.0 - sgn * s01.real)
        out.append(2.0 / norm_sq * float(mass))
    return out[0], out[1], s01


# ---- analytic bounds -------------------------------------------------------

@dataclass(frozen=True)
class BoundResult:
    """Partial sum to ``n_max`` plus the analytic cap on the remaining terms."""

    partial: float
    tail_cap: float
    n_max: int
    terms: tuple[float, ...] = field(repr=False, default=())

    @property
    def value(self) -> float:
        return self.partial + self.tail_cap


def _si_part(a: float, b: float, sign: float) -> float:
    """``int_a^b (1 + sign cos(p/8)) / p^2 dp`` in closed form (a > 0)."""
    def prim(p):
        return -1.0 / p + sign * (-math.cos(_BETA * p) / p - _BETA * special.sici(_BETA * p)[0])
    return prim(b) - prim(a)


def _central_smooth(b: float) -> float:
    """``int_0^b (1 - cos(p/8)) / p^2 dp``; the primitive vanishes at 0."""
    return -(1 - math.cos(_BETA * b)) / b + _BETA * special.sici(_BETA * b)[0]


def _cos_weighted(a: float, b: float, sign: float, L: float, rtol: float) -> float:
    """``int_a^b (1 + sign cos(p/8)) cos(L p) / p^2 dp`` via QUADPACK QAWO."""
    if sign < 0:
        def f(p):
            return 2.0 * math.sin(p / 16) ** 2 / (p * p) if p > 1e-6 else 1.0 / 128
    else:
        def f(p):
            return (1.0 + math.cos(_BETA * p)) / (p * p)
    res = integrate.quad(f, a, b, weight="cos", wvar=L, epsabs=0.0, epsrel=rtol,
                         limit=400, full_output=1)
    scale = _si_part(a, b, sign) if a > 0 else _central_smooth(b)
    if len(res) > 3 and res[1] > 1e-8 * abs(scale):
        raise NumericalError("oscillatory bound integral did not converge",
                             {"interval": [a, b], "L": L, "abserr": res[1], "message": res[3].strip()})
    return res[0]


def _bound_term(a: float, b: float, sign: float, L: float, rtol: float) -> float:
    """``int_a^b (1 + sign cos(p/8)) sin^2(pL/2) / p^2 dp``."""
    smooth = _si_part(a, b, sign) if a > 0 else _central_smooth(b)
    return 0.5 * (smooth - _cos_weighted(a, b, sign, L, rtol))


def _check_n_max(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    return int(n_max)


def p_plus_bound(alpha: float, d: int, n_max: int = DEFAULT_N_MAX, *, norm_sq: float | None = None,
                 rtol: float = QUAD_RTOL) -> BoundResult:
    """Sinc-envelope bound on ``P_p,+`` summed over ``n = 0 .. n_max`` plus a 2/p^2 tail cap."""
    d, n_max = _validate(alpha, d), _check_n_max(n_max)
    if norm_sq is None:
        norm_sq = 2.0 * (1.0 + overlap_exact(alpha, d).real)
    pref = 16.0 / math.pi * n0_squared(alpha, d) / norm_sq
    L = d / 2.0
    four_pi = 4 * math.pi
    terms = tuple(pref * _bound_term((4 * n + 1) * four_pi, (4 * n + 3) * four_pi, 1.0, L, rtol)
                  for n in range(n_max + 1))
    tail = pref * 2.0 / ((4 * n_max + 5) * four_pi)
    return BoundResult(partial=math.fsum(terms), tail_cap=tail, n_max=n_max, terms=terms)


def p_minus_bound(alpha: float, d: int, n_max: int = DEFAULT_N_MAX, *, norm_sq: float | None = None,
                  rtol: float = QUAD_RTOL) -> BoundResult:
    """Sinc-envelope bound on ``P_p,-``: central region once, others twice by parity."""
    d, n_max = _validate(alpha, d), _check_n_max(n_max)
    if norm_sq is None:
        norm_sq = 2.0 * (1.0 - overlap_exact(alpha, d).real)
    pref = 8.0 / math.pi * n0_squared(alpha, d) / norm_sq
    L = d / 2.0
    four_pi = 4 * math.pi
    central = pref * 2.0 * _bound_term(0.0, four_pi, -1.0, L, rtol)
    terms = (central,) + tuple(
        pref * 2.0 * _bound_term((4 * n - 1) * four_pi, (4 * n + 1) * four_pi, -1.0, L, rtol)
        for n in range(1, n_max + 1))
    tail = pref * 4.0 / ((4 * n_max + 3) * four_pi)
    return BoundResult(partial=math.fsum(terms), tail_cap=tail, n_max=n_max, terms=terms)


# ---- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class IntrinsicErrorReport:
    """All intrinsic error quantities for one ``(alpha, d)``.

    ``P_plus`` and ``P_minus`` are the bound values (partial sum + tail cap);
    they are reported as computed even when they exceed 1.
    """

    alpha: float
    d: int
    P_x: float
    Pp_plus: float
    Pp_minus: float
    P_plus: float
    P_minus: float
    P_max: float
    n_max: int
    tail_plus: float
    tail_minus: float
    overlap: float
    norm_sq_plus: float
    norm_sq_minus: float
    method: str
    quad_rtol: float

    @property
    def dominance_ok(self) -> bool:
        return self.Pp_plus <= self.P_plus * (1 + 1e-6) and self.Pp_minus <= self.P_minus * (1 + 1e-6)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_report(alpha: float, d: int, n_max: int = DEFAULT_N_MAX, method: str = "exact",
                    padding: int = 8, grid: GridSpec | None = None,
                    rtol: float = QUAD_RTOL) -> IntrinsicErrorReport:
    """Assemble ``P_x``, ``P_p,+-``, ``P_+-`` and ``P_max = max(P_x, P_+, P_-)``.

    ``method="exact"`` sums ``P_p,+-`` over all regions through the
    autocorrelation series (any ``d``); ``"spectrum"`` integrates an FFT
    spectrum over the regions ``|n| <= n_max``.
    """
    d, n_max = _validate(alpha, d), _check_n_max(n_max)
    if method not in ("exact", "spectrum"):
        raise DomainError(f"method must be 'exact' or 'spectrum', got {method!r}")
    pp_plus, pp_minus, s01 = p_p_exact(alpha, d, rtol)
    norm_plus = 2.0 * (1.0 + s01.real)
    norm_minus = 2.0 * (1.0 - s01.real)
    if method == "spectrum":
        phi0, _, _ = codeword_pair(alpha, d, grid or make_grid(alpha, d))
        spec = momentum_wavefunction(phi0, padding)
        pp_plus = p_p_direct(spec, "+", n_max, norm_plus)
        pp_minus = p_p_direct(spec, "-", n_max, norm_minus)
    px = p_x_closed_form(alpha, d, rtol)
    bp = p_plus_bound(alpha, d, n_max, norm_sq=norm_plus, rtol=rtol)
    bm = p_minus_bound(alpha, d, n_max, norm_sq=norm_minus, rtol=rtol)
    return IntrinsicErrorReport(
        alpha=float(alpha), d=d, P_x=px, Pp_plus=pp_plus, Pp_minus=pp_minus,
        P_plus=bp.value, P_minus=bm.value, P_max=max(px, bp.value, bm.value), n_max=n_max,
        tail_plus=bp.tail_cap, tail_minus=bm.tail_cap, overlap=s01.real,
        norm_sq_plus=norm_plus, norm_sq_minus=norm_minus, method=method, quad_rtol=rtol)


# ---- g0 sweep --------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    index: int
    g0: float
    alpha: float
    d: int
    t: float
    delta: float
    v: float
    report: IntrinsicErrorReport | None
    feasible: bool
    note: str = ""

    @property
    def P_max(self) -> float:
        return self.report.P_max if self.report is not None else math.nan


def _sweep_row(args) -> SweepRow:
    index, species, w0, g0, n_max = args
    try:
        setup = PhysicalSetup.from_coupling(species, w0, g0)
    except GKPLithoError as exc:
        return SweepRow(index, g0, math.nan, 0, math.nan, math.nan, math.nan, None, False, str(exc))
    feas = check_feasibility(setup)
    report = evaluate_report(setup.alpha, setup.d, n_max)
    return SweepRow(index, g0, setup.alpha, setup.d, setup.t, setup.delta, setup.v, report,
                    feas.satisfied)


def sweep_g0(g0_min: float = 1e6, g0_max: float = 1e9, points: int = 60, *,
             species: AtomSpecies = CESIUM, w0: float = 20e-6, n_max: int = DEFAULT_N_MAX,
             workers: int = 1) -> list[SweepRow]:
    """Evaluate the intrinsic errors on ``points`` log-spaced couplings.

    Rows whose geometry is unrealizable are kept with ``feasible=False`` and
    no report. Parallel runs return rows in index order.
    """
    if not (g0_min > 0 and g0_max > g0_min):
        raise DomainError(f"need 0 < g0_min < g0_max, got [{g0_min!r}, {g0_max!r}]")
    if int(points) != points or points < 3:
        raise DomainError(f"points must be an integer >= 3, got {points!r}")
    if not w0 > 0:
        raise DomainError(f"waist must be positive, got {w0!r}")
    g0s = np.logspace(math.log10(g0_min), math.log10(g0_max), int(points))
    jobs = [(i, species, w0, float(g), n_max) for i, g in enumerate(g0s)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(job) for job in jobs]
    return sorted(rows, key=lambda r: r.index)


@dataclass(frozen=True)
class MinimumResult:
    g0: float
    P_max: float
    index: int
    bracketed: bool


def find_minimum(g0, pmax) -> MinimumResult:
    """Argmin of ``P_max`` refined by a parabola through three ``(log g0, log P_max)`` points.

    A minimum on the first or last valid sample is returned unrefined with
    ``bracketed=False``.
    """
    g0 = np.asarray(g0, dtype=float)
    pmax = np.asarray(pmax, dtype=float)
    valid = np.isfinite(pmax) & (pmax > 0) & np.isfinite(g0) & (g0 > 0)
    if valid.sum() < 3:
        raise DomainError("find_minimum needs at least three valid rows")
    idx = np.flatnonzero(valid)
    lx, ly = np.log10(g0[idx]), np.log10(pmax[idx])
    k = int(np.argmin(ly))
    if k == 0 or k == idx.size - 1:
        return MinimumResult(float(g0[idx[k]]), float(pmax[idx[k]]), int(idx[k]), False)
    x, y = lx[k - 1:k + 2], ly[k - 1:k + 2]
    a, b, c = np.polyfit(x, y, 2)
    if a <= 0:
        return MinimumResult(float(g0[idx[k]]), float(pmax[idx[k]]), int(idx[k]), True)
    xv = -b / (2 * a)
    return MinimumResult(float(10**xv), float(10 ** (c - b * b / (4 * a))), int(idx[k]), True)


def minimum_of_rows(rows: list[SweepRow]) -> MinimumResult:
    return find_minimum([r.g0 for r in rows], [r.P_max for r in rows])
