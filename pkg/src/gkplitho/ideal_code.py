"""Ideal GKP codeword lattices, shift recovery and the error-region geometry.

Position lattices are expressed in the unscaled coordinate ``x`` (cavity
wavelength = 1). Recovery and error regions for the generated codewords work
in the scaled coordinate ``y = 2 pi x``, where the theta-lattice has spacing
``2 pi theta`` (pi/4 for theta = 1/8).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import DomainError

Label = Literal["0", "1", "+", "-"]
Space = Literal["position", "momentum"]

DEFAULT_THETA = 1.0 / 8.0
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class CodeLattice:
    """Spike comb ``offset + period * s`` with sign pattern ``1`` or ``(-1)^s``.

    Also carries the code's stabilizer and logical displacement lengths:
    stabilizers D_x(2 theta), D_p(2 pi / theta); logicals Z = D_p(pi / theta),
    X = D_x(theta).
    """

    theta: float
    label: str
    space: str
    period: float
    offset: float
    alternating: bool

    @property
    def stabilizers(self) -> tuple[float, float]:
        return 2.0 * self.theta, 2.0 * math.pi / self.theta

    @property
    def logical_z(self) -> float:
        return math.pi / self.theta

    @property
    def logical_x(self) -> float:
        return self.theta

    def points(self, s_min: int, s_max: int) -> tuple[np.ndarray, np.ndarray]:
        """Spike locations and signs for ``s = s_min .. s_max``."""
        s = np.arange(s_min, s_max + 1)
        signs = np.where(s % 2 == 0, 1, -1) if self.alternating else np.ones_like(s)
        return self.offset + self.period * s, signs

    def shifted(self, delta: float) -> "CodeLattice":
        return CodeLattice(self.theta, self.label, self.space, self.period,
                           self.offset + delta, self.alternating)


def ideal_spike_lattice(label: str, space: str, theta: float = DEFAULT_THETA) -> CodeLattice:
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    if space not in ("position", "momentum"):
        raise DomainError(f"space must be 'position' or 'momentum', got {space!r}")
    q = math.pi / theta
    table = {
        ("0", "position"): (2 * theta, 0.0, False),
        ("1", "position"): (2 * theta, theta, False),
        ("+", "position"): (theta, 0.0, False),
        ("-", "position"): (theta, 0.0, True),
        ("0", "momentum"): (q, 0.0, False),
        ("1", "momentum"): (q, 0.0, True),
        ("+", "momentum"): (2 * q, 0.0, False),
        ("-", "momentum"): (2 * q, q, False),
    }
    key = (str(label), space)
    if key not in table:
        raise DomainError(f"label must be one of 0, 1, +, -; got {label!r}")
    period, offset, alternating = table[key]
    return CodeLattice(theta, str(label), space, period, offset, alternating)


@dataclass(frozen=True)
class Recovery:
    """Outcome of snapping a measured value onto the nearest lattice point.

    ``index`` is the integer k of the chosen point ``k * spacing``. A value
    exactly midway between two points goes to the lower one and is flagged as
    ``boundary`` (and not ``correctable``).
    """

    measured: float
    corrected: float
    index: int
    shift: float
    correctable: bool
    boundary: bool


def _snap(value: float, spacing: float) -> Recovery:
    t = value / spacing
    lower = math.floor(t)
    frac = t - lower
    boundary = abs(frac - 0.5) <= _TIE_TOL * max(1.0, abs(t))
    if boundary:
        k = lower
    else:
        k = lower + 1 if frac > 0.5 else lower
    corrected = k * spacing
    shift = abs(value - corrected)
    return Recovery(measured=value, corrected=corrected, index=int(k), shift=shift,
                    correctable=not boundary and shift < spacing / 2, boundary=boundary)


def recover_position(y_measured: float, theta: float = DEFAULT_THETA) -> Recovery:
    """Snap a scaled position onto the nearest multiple of ``2 pi theta``."""
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    return _snap(float(y_measured), 2.0 * math.pi * theta)


def recover_momentum(p_measured: float, theta: float = DEFAULT_THETA) -> Recovery:
    """Snap a momentum onto the nearest multiple of ``pi / theta``."""
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    return _snap(float(p_measured), math.pi / theta)


@dataclass(frozen=True)
class ErrorRegionSet:
    """Disjoint intervals ``[lo, hi)`` tagged with their integer index n."""

    space: str
    index: tuple[int, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.index)

    def __iter__(self):
        return iter(zip(self.index, self.lo, self.hi))

    @property
    def total_measure(self) -> float:
        return float(sum(h - l for l, h in zip(self.lo, self.hi)))

    def contains(self, values) -> np.ndarray:
        """Membership with intervals closed on the left, open on the right."""
        v = np.atleast_1d(np.asarray(values, dtype=float))
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        idx = np.searchsorted(lo, v, side="right") - 1
        ok = idx >= 0
        out = np.zeros(v.shape, dtype=bool)
        out[ok] = v[ok] < hi[idx[ok]]
        return out


def position_error_regions(d: int, include_left_edge: bool = False) -> ErrorRegionSet:
    """Error regions in ``y`` for the codeword |0> on ``[0, pi d]``.

    Full-width regions ``[(4n-1) pi/8, (4n+1) pi/8]`` for n = 1 .. 2d-1, then
    the terminal half region ``[pi d - pi/8, pi d]``. ``include_left_edge``
    adds the mirror half region ``[0, pi/8]`` with index 0; this symmetric
    variant is an extension and not used by the closed-form error formula.
    """
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    d = int(d)
    e = math.pi / 8
    idx, lo, hi = [], [], []
    if include_left_edge:
        idx.append(0)
        lo.append(0.0)
        hi.append(e)
    for n in range(1, 2 * d):
        idx.append(n)
        lo.append((4 * n - 1) * e)
        hi.append((4 * n + 1) * e)
    idx.append(2 * d)
    lo.append(math.pi * d - e)
    hi.append(math.pi * d)
    return ErrorRegionSet("position", tuple(idx), tuple(lo), tuple(hi))


def momentum_error_regions(sign: str, n_max: int) -> ErrorRegionSet:
    """Regions of width 8 pi centred on odd (``+``) or even (``-``) multiples of 8 pi."""
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    if int(n_max) != n_max or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max!r}")
    n = np.arange(-int(n_max), int(n_max) + 1)
    centres = (2 * n + 1) * 8 * math.pi if sign == "+" else 2 * n * 8 * math.pi
    return ErrorRegionSet("momentum", tuple(int(k) for k in n),
                          tuple(float(c - 4 * math.pi) for c in centres),
                          tuple(float(c + 4 * math.pi) for c in centres))
