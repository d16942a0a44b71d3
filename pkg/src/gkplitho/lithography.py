"""Homodyne-conditioned atomic wavefunctions and codeword superpositions.

Conventions: cavity wavelength = 1, scaled position ``y = 2 pi x``, a cavity
of ``d`` half-wavelengths spans ``0 <= y <= pi d``. Wavefunctions are
normalized as ``int |phi(y)|^2 dy / (2 pi) = 1`` (equivalently ``dx``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .exceptions import DomainError, GridError, NumericalError

QUARTER = math.pi / 4
DEFAULT_PHASE_GAIN = math.pi
MIN_POINTS_PER_QUARTER = 16
# Peak half-width must span this many samples.
SAMPLES_PER_WIDTH = 16
J_RTOL = 1e-10


def field_amplitude(y, alpha: float, phase_gain: float = DEFAULT_PHASE_GAIN):
    """Cavity amplitude left by an atom at ``y``: ``alpha exp(i gain cos^2 y)``.

    Real and imaginary parts are the quadrature displacements alpha_1, alpha_2.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    return alpha * np.exp(1j * phase_gain * np.cos(y) ** 2)


def _quadratures(y, alpha: float, phase_gain: float = DEFAULT_PHASE_GAIN):
    theta = phase_gain * np.cos(y) ** 2
    return alpha * np.cos(theta), alpha * np.sin(theta)


def peak_breakpoints(alpha: float, x0: float = 0.0) -> list[float]:
    """Points in ``[0, pi]`` where alpha_1(y) = x0/2 (the peak centres)."""
    if alpha == 0 or abs(x0) > 2 * alpha:
        return []
    c = math.acos(max(-1.0, min(1.0, x0 / (2 * alpha)))) / math.pi
    y1 = math.acos(math.sqrt(c))
    pts = sorted({y1, math.pi - y1})
    return [p for p in pts if 0 < p < math.pi]


def _quad(func, a, b, *, rtol, atol=0.0, points=None, limit=400, what="integral") -> float:
    res = integrate.quad(func, a, b, epsabs=atol, epsrel=rtol, limit=limit,
                         points=points or None, full_output=1)
    value, abserr = res[0], res[1]
    if len(res) > 3 and abserr > 10 * (rtol * abs(value) + atol) + 1e-300:
        raise NumericalError(f"{what} did not converge: {res[3].strip()}",
                             {"what": what, "value": value, "abserr": abserr,
                              "interval": [a, b], "rtol": rtol, "atol": atol,
                              "neval": int(res[2].get("neval", -1))})
    return value


def j_integral(alpha: float, x0: float = 0.0, rtol: float = J_RTOL) -> float:
    """``J = int_0^pi exp(2 alpha_1(y) (x0 - alpha_1(y))) dy`` by adaptive quadrature."""
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    if alpha == 0:
        return math.pi

    def f(y):
        a1 = alpha * math.cos(math.pi * math.cos(y) ** 2)
        return math.exp(2.0 * a1 * (x0 - a1))

    return _quad(f, 0.0, math.pi, rtol=rtol, points=peak_breakpoints(alpha, x0),
                 what=f"J(alpha={alpha}, x0={x0})")


def outcome_pdf(alpha: float, x0: float, rtol: float = J_RTOL) -> float:
    """Probability density of the homodyne result: ``J exp(-x0^2/2) / sqrt(2 pi^3)``.

    Evaluated as ``int_0^pi exp(-(x0 - 2 alpha_1)^2 / 2) dy / sqrt(2 pi^3)``,
    the same quantity without the overflow-prone factorization.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    norm = math.sqrt(2.0 * math.pi**3)
    if alpha == 0:
        return math.pi * math.exp(-0.5 * x0 * x0) / norm

    def f(y):
        a1 = alpha * math.cos(math.pi * math.cos(y) ** 2)
        return math.exp(-0.5 * (x0 - 2.0 * a1) ** 2)

    value = _quad(f, 0.0, math.pi, rtol=rtol, points=peak_breakpoints(alpha, x0),
                  what=f"outcome pdf(alpha={alpha}, x0={x0})")
    return value / norm


def outcome_pdf_table(alpha: float, x0) -> np.ndarray:
    """Vectorized :func:`outcome_pdf` via the periodic trapezoid rule in ``y``.

    The integrand is smooth and pi-periodic, so the rule converges
    geometrically; nodes are doubled until the table stops changing.
    """
    x0 = np.asarray(x0, dtype=float)
    norm = math.sqrt(2.0 * math.pi**3)
    if alpha == 0:
        return math.pi * np.exp(-0.5 * x0**2) / norm

    def table(n):
        y = np.arange(n) * (math.pi / n)
        two_a1 = 2.0 * alpha * np.cos(math.pi * np.cos(y) ** 2)
        out = np.empty(x0.shape)
        flat = x0.ravel()
        res = out.reshape(-1)
        for s in range(0, flat.size, 512):
            chunk = flat[s:s + 512, None]
            res[s:s + 512] = np.exp(-0.5 * (chunk - two_a1) ** 2).mean(axis=1) * math.pi
        return out / norm

    n = 256
    prev = table(n)
    while n < 2**16:
        n *= 2
        cur = table(n)
        if np.max(np.abs(cur - prev)) <= 1e-14 * max(np.max(np.abs(cur)), 1e-300):
            return cur
        prev = cur
    return prev


class OutcomeSampler:
    """Inverse-CDF sampler for homodyne outcomes on a tabulated grid.

    The table spans ``|x0| <= 8 + 2 alpha`` so the neglected tails stay below
    1e-12 for every alpha; ``knots`` CDF nodes, linear interpolation.
    """

    def __init__(self, alpha: float, knots: int = 2**14, half_width: float | None = None):
        if alpha < 0:
            raise DomainError(f"alpha must be non-negative, got {alpha!r}")
        self.alpha = float(alpha)
        self.half_width = float(half_width) if half_width is not None else 8.0 + 2.0 * self.alpha
        self.x = np.linspace(-self.half_width, self.half_width, knots)
        self.pdf = outcome_pdf_table(self.alpha, self.x)
        cdf = integrate.cumulative_trapezoid(self.pdf, self.x, initial=0.0)
        self.mass = float(cdf[-1])
        self.cdf = cdf / cdf[-1]

    def ppf(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        i = np.searchsorted(self.cdf, u, side="right")
        i = np.clip(i, 1, self.cdf.size - 1)
        c0, c1 = self.cdf[i - 1], self.cdf[i]
        w = np.where(c1 > c0, (u - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.0)
        return self.x[i - 1] + w * (self.x[i] - self.x[i - 1])

    def sample(self, size=None, seed=None) -> np.ndarray | float:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        u = rng.random(size)
        out = self.ppf(u)
        return float(out) if size is None else out


def sample_outcome(alpha: float, seed=None, size=None):
    """Draw homodyne outcome(s); bit-identical for a fixed integer seed."""
    return OutcomeSampler(alpha).sample(size=size, seed=seed)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``y_k = k * dy``, ``k = 0 .. n_points-1``, with ``dy = (pi/4) / points_per_quarter``."""

    points_per_quarter: int
    n_points: int

    def __post_init__(self):
        if self.points_per_quarter < 1 or self.n_points < 2:
            raise GridError(f"degenerate grid {self!r}")

    @property
    def dy(self) -> float:
        return QUARTER / self.points_per_quarter

    @property
    def y_max(self) -> float:
        return (self.n_points - 1) * self.dy

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dy

    def steps(self, length: float) -> int:
        """Number of grid steps in ``length``; refuses non-commensurate lengths."""
        k = length / self.dy
        kr = round(k)
        if abs(k - kr) > 1e-9 * max(1.0, abs(k)):
            raise GridError(f"length {length!r} is not a multiple of dy={self.dy!r}")
        return int(kr)


def required_points_per_quarter(alpha: float) -> int:
    """Smallest samples-per-(pi/4) resolving a peak half-width ``1/(2 pi alpha)``."""
    if alpha <= 0:
        return 1
    # dy <= 1 / (2 pi alpha * SAMPLES_PER_WIDTH)
    return math.ceil(QUARTER * 2 * math.pi * alpha * SAMPLES_PER_WIDTH - 1e-9)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (int(n) - 1).bit_length())


def make_grid(alpha: float, d: int, *, refine: int = 1, margin: float = QUARTER) -> GridSpec:
    """Power-of-two grid covering ``[0, pi d + margin]`` that resolves the peaks.

    ``points_per_quarter`` is a power of two (so region edges at odd multiples
    of pi/8 fall on samples and region sample counts suit Romberg), multiplied
    by ``refine``.
    """
    ppq = _next_pow2(max(required_points_per_quarter(alpha), MIN_POINTS_PER_QUARTER)) * refine
    dy = QUARTER / ppq
    need = int(math.ceil((math.pi * d + margin) / dy - 1e-9)) + 1
    return GridSpec(ppq, _next_pow2(need))


def check_grid(grid: GridSpec, alpha: float, d: int) -> None:
    req = required_points_per_quarter(alpha)
    if grid.points_per_quarter < req:
        needed = _next_pow2(req * 4 * d + 1)
        raise GridError(
            f"grid under-resolves peaks of width ~1/(2 pi alpha): need dy <= {QUARTER / req:.3g} "
            f"(points_per_quarter >= {req}), i.e. at least {needed} points for d={d}",
            required_points=needed)
    if grid.steps(math.pi * d) > grid.n_points - 1:
        raise GridError(f"grid ends at y={grid.y_max:.6g} < pi d = {math.pi * d:.6g}",
                        required_points=grid.points_per_quarter * 4 * d + 1)


@dataclass(frozen=True, eq=False)
class SampledWaveFunction:
    """Complex samples on a :class:`GridSpec`, identically zero outside ``support``.

    ``support`` holds inclusive sample indices. ``profile`` optionally gives
    the exact continuous wavefunction (in ``y``) on the support; it lets
    oracles integrate without going through the samples.

    ``left`` and ``right`` hold the one-sided limits at every sample. They
    differ from ``values`` only where the function jumps: at the support ends
    and, for superpositions, at the component support ends. All quadratures
    use the jump-aware trapezoid ``dy * sum (g(left) + g(right)) / 2``.
    """

    grid: GridSpec
    values: np.ndarray
    support: tuple[int, int]
    profile: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    label: str = ""
    left: np.ndarray | None = field(default=None, repr=False)
    right: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = self.grid.n_points
        lo, hi = self.support
        if not 0 <= lo <= hi < n:
            raise GridError(f"support {self.support} outside grid")
        arrays = {}
        for name in ("values", "left", "right"):
            raw = getattr(self, name)
            if raw is None:
                continue
            v = np.array(raw, dtype=complex)
            if v.shape != (n,):
                raise GridError(f"{name} shape {v.shape} does not match grid of {n}")
            v[:lo] = 0
            v[hi + 1:] = 0
            arrays[name] = v
        if "left" not in arrays:
            arrays["left"] = arrays["values"].copy()
            arrays["left"][lo] = 0
        if "right" not in arrays:
            arrays["right"] = arrays["values"].copy()
            arrays["right"][hi] = 0
        for name, v in arrays.items():
            v.flags.writeable = False
            object.__setattr__(self, name, v)
        object.__setattr__(self, "support", (int(lo), int(hi)))

    @property
    def dy(self) -> float:
        return self.grid.dy

    @property
    def y(self) -> np.ndarray:
        return self.grid.y

    @property
    def support_y(self) -> tuple[float, float]:
        return self.support[0] * self.dy, self.support[1] * self.dy

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    @property
    def quadrature_samples(self) -> np.ndarray:
        """``(left + right) / 2``: samples whose plain sum times ``dy`` is the integral."""
        return 0.5 * (self.left + self.right)

    def norm(self) -> float:
        lo, hi = self.support
        s = slice(lo, hi + 1)
        total = np.sum(np.abs(self.left[s]) ** 2 + np.abs(self.right[s]) ** 2)
        return float(0.5 * self.dy * total) / (2 * math.pi)

    def evaluate(self, y) -> np.ndarray:
        """Continuous wavefunction at arbitrary ``y`` (zero off the support)."""
        y = np.asarray(y, dtype=float)
        lo, hi = self.support_y
        inside = (y >= lo - 1e-12) & (y <= hi + 1e-12)
        if self.profile is not None:
            out = np.zeros(y.shape, dtype=complex)
            if np.any(inside):
                out[inside] = self.profile(y[inside])
            return out
        re = np.interp(y, self.y, self.values.real)
        im = np.interp(y, self.y, self.values.imag)
        return np.where(inside, re + 1j * im, 0.0)


@dataclass(frozen=True)
class GenerationRecord:
    alpha: float
    d: int
    x0: float
    N: float
    J: float
    pdf_at_x0: float
    grid_points: int
    dy: float

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "d": self.d, "x0": self.x0, "N": self.N, "J": self.J,
                "pdf_at_x0": self.pdf_at_x0, "grid_points": self.grid_points, "dy": self.dy}


def normalization_constant(alpha: float, d: int, x0: float = 0.0, J: float | None = None) -> float:
    """``N_x0 = sqrt(2 pi / (d J)) exp(x0^2 / 4)``."""
    if J is None:
        J = j_integral(alpha, x0)
    try:
        return math.sqrt(2 * math.pi / (d * J)) * math.exp(x0 * x0 / 4)
    except OverflowError:
        return math.inf


def _conditional_profile(alpha: float, d: int, x0: float, J: float, phase_gain: float):
    scale = math.sqrt(2 * math.pi / (d * J))

    def profile(y):
        a1, a2 = _quadratures(np.asarray(y, dtype=float), alpha, phase_gain)
        # N_x0 exp(-(a1 - x0/2)^2) folded into one exponent
        return scale * np.exp(-a1 * a1 + a1 * x0 - 1j * a2 * (a1 - x0))

    return profile


def conditional_wavefunction(alpha: float, d: int, x0: float = 0.0, grid: GridSpec | None = None,
                             phase_gain: float = DEFAULT_PHASE_GAIN,
                             ) -> tuple[SampledWaveFunction, GenerationRecord]:
    """Atomic wavefunction after a homodyne result ``x0``; ``x0 = 0`` gives |0~>.

    Starts from the uniform state on ``[0, L]`` (``L = d / 2``) and samples on
    ``[0, pi d]``.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    if int(d) != d or d < 2 or d % 2:
        raise DomainError(f"d must be an even integer >= 2, got {d!r}")
    d = int(d)
    if grid is None:
        grid = make_grid(alpha, d)
    check_grid(grid, alpha, d)
    J = j_integral(alpha, x0)
    profile = _conditional_profile(alpha, d, x0, J, phase_gain)
    hi = grid.steps(math.pi * d)
    values = np.zeros(grid.n_points, dtype=complex)
    values[:hi + 1] = profile(grid.y[:hi + 1])
    wf = SampledWaveFunction(grid, values, (0, hi), profile, label=f"phi(x0={x0:g})")
    pdf = outcome_pdf(alpha, x0)
    record = GenerationRecord(alpha=float(alpha), d=d, x0=float(x0),
                              N=normalization_constant(alpha, d, x0, J), J=J,
                              pdf_at_x0=pdf, grid_points=grid.n_points, dy=grid.dy)
    return wf, record


def displace(wf: SampledWaveFunction, shift: float) -> SampledWaveFunction:
    """Translate by ``shift`` in ``y``: ``phi'(y) = phi(y - shift)``; grid-exact."""
    k = wf.grid.steps(shift)
    lo, hi = wf.support
    if lo + k < 0 or hi + k > wf.grid.n_points - 1:
        raise GridError(f"displacement by {shift:.6g} leaves the grid [0, {wf.grid.y_max:.6g}]")
    moved = []
    for arr in (wf.values, wf.left, wf.right):
        out = np.zeros_like(arr)
        out[lo + k:hi + k + 1] = arr[lo:hi + 1]
        moved.append(out)
    values, left, right = moved
    profile = None
    if wf.profile is not None:
        base, s = wf.profile, k * wf.dy

        def profile(y):
            return base(np.asarray(y) - s)

    return SampledWaveFunction(wf.grid, values, (lo + k, hi + k), profile,
                               label=f"{wf.label} shifted {shift:.6g}", left=left, right=right)


def _same_grid(a: SampledWaveFunction, b: SampledWaveFunction) -> None:
    if a.grid != b.grid:
        raise GridError(f"grid mismatch: {a.grid} vs {b.grid}")


def overlap(wf_a: SampledWaveFunction, wf_b: SampledWaveFunction) -> complex:
    """``<a|b> = int conj(phi_a) phi_b dy / (2 pi)`` by the jump-aware trapezoid."""
    _same_grid(wf_a, wf_b)
    lo = max(wf_a.support[0], wf_b.support[0])
    hi = min(wf_a.support[1], wf_b.support[1])
    if hi < lo:
        return 0j
    s = slice(lo, hi + 1)
    f = np.conj(wf_a.left[s]) * wf_b.left[s] + np.conj(wf_a.right[s]) * wf_b.right[s]
    return complex(0.5 * wf_a.dy * f.sum()) / (2 * math.pi)


@dataclass(frozen=True, eq=False)
class CodewordState:
    a: complex
    b: complex
    phi0: SampledWaveFunction
    phi1: SampledWaveFunction
    combined: SampledWaveFunction
    norm: float
    overlap: complex

    @property
    def norm_sq(self) -> float:
        return self.norm**2


def superpose(a: complex, b: complex, phi0: SampledWaveFunction,
              phi1: SampledWaveFunction) -> CodewordState:
    """Normalized ``a phi0 + b phi1`` with ``norm^2 = |a|^2 + |b|^2 + 2 Re(a* b <0|1>)``."""
    a, b = complex(a), complex(b)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-12:
        raise DomainError(f"|a|^2 + |b|^2 must be 1, got {abs(a) ** 2 + abs(b) ** 2!r}")
    _same_grid(phi0, phi1)
    s01 = overlap(phi0, phi1)
    norm_sq = abs(a) ** 2 + abs(b) ** 2 + 2.0 * (np.conj(a) * b * s01).real
    if norm_sq <= 0:
        raise NumericalError("superposition has zero norm", {"a": str(a), "b": str(b)})
    norm = math.sqrt(norm_sq)
    values = (a * phi0.values + b * phi1.values) / norm
    lo = min(phi0.support[0], phi1.support[0])
    hi = max(phi0.support[1], phi1.support[1])

    def profile(y):
        return (a * phi0.evaluate(y) + b * phi1.evaluate(y)) / norm

    combined = SampledWaveFunction(phi0.grid, values, (lo, hi), profile,
                                   label=f"({a:g}) phi0 + ({b:g}) phi1",
                                   left=(a * phi0.left + b * phi1.left) / norm,
                                   right=(a * phi0.right + b * phi1.right) / norm)
    return CodewordState(a, b, phi0, phi1, combined, norm, s01)


def codeword_pair(alpha: float, d: int, grid: GridSpec | None = None
                  ) -> tuple[SampledWaveFunction, SampledWaveFunction, GenerationRecord]:
    """|0~> (``x0 = 0``) and |1~> = |0~> displaced by pi/4 on one grid."""
    phi0, record = conditional_wavefunction(alpha, d, 0.0, grid)
    return phi0, displace(phi0, QUARTER), record
