"""Momentum-space wavefunctions, comb structure and the sinc-squared envelope.

Momentum ``p`` is conjugate to ``x = y / (2 pi)``. The transform is unitary
with forward kernel ``exp(-i p x)``:
``psi(p) = (2 pi)^(-1/2) int phi(x) exp(-i p x) dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal

from .exceptions import DomainError, GridError, NumericalError
from .lithography import SampledWaveFunction

DEFAULT_PADDING = 8
DIRECT_RTOL = 1e-8


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class MomentumSpectrum:
    """Complex amplitudes on the uniform momentum grid ``p_k = k * dp``, k centred on 0."""

    p: np.ndarray
    psi: np.ndarray
    dp: float
    padding: int

    def __post_init__(self):
        for name in ("p", "psi"):
            arr = np.array(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def p_max(self) -> float:
        return float(self.p[-1])

    def norm(self) -> float:
        return float(self.abs2.sum() * self.dp)

    def at(self, p) -> np.ndarray:
        """Amplitudes at exact grid momenta (nearest index)."""
        k = np.rint((np.asarray(p, dtype=float) - self.p[0]) / self.dp).astype(int)
        if np.any((k < 0) | (k >= self.p.size)):
            raise DomainError("momentum outside the spectral grid")
        return self.psi[k]


def momentum_wavefunction(wf: SampledWaveFunction, padding: int = DEFAULT_PADDING) -> MomentumSpectrum:
    """FFT of the zero-padded samples with trapezoid weights at jumps and support ends.

    Phases refer to ``x = 0`` (the first grid sample).
    """
    n = wf.grid.n_points
    if not _is_pow2(n):
        raise GridError(f"grid size {n} is not a power of two",
                        required_points=1 << (n - 1).bit_length())
    if int(padding) != padding or padding < 1:
        raise DomainError(f"padding must be an integer >= 1, got {padding!r}")
    m = n * int(padding)
    dx = wf.dy / (2 * math.pi)
    f = np.zeros(m, dtype=complex)
    f[:n] = wf.quadrature_samples
    psi = np.fft.fftshift(np.fft.fft(f)) * (dx / math.sqrt(2 * math.pi))
    p = np.fft.fftshift(np.fft.fftfreq(m, d=dx)) * (2 * math.pi)
    return MomentumSpectrum(p=p, psi=psi, dp=2 * math.pi / (m * dx), padding=int(padding))


def momentum_amplitude_direct(wf: SampledWaveFunction, p: float, rtol: float = DIRECT_RTOL,
                              chunk: float = 0.125) -> complex:
    """Oracle for a single momentum: QUADPACK oscillatory quadrature over the support.

    Uses the continuous ``profile`` when the wavefunction carries one, else
    linear interpolation of the samples. The support is split into chunks of
    ``chunk`` in ``x`` so every subinterval holds at most one peak.
    """
    x_lo, x_hi = (v / (2 * math.pi) for v in wf.support_y)
    edges = np.arange(x_lo, x_hi, chunk)
    edges = np.append(edges, x_hi) if x_hi - edges[-1] > 1e-12 else np.append(edges[:-1], x_hi)
    two_pi = 2 * math.pi
    p = float(p)

    def re_f(x):
        return wf.evaluate(np.array([two_pi * x]))[0].real

    def im_f(x):
        return wf.evaluate(np.array([two_pi * x]))[0].imag

    acc = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        parts = {}
        for key, func in (("re", re_f), ("im", im_f)):
            for weight in ("cos", "sin"):
                if p == 0 and weight == "sin":
                    parts[key, weight] = 0.0
                    continue
                res = integrate.quad(func, a, b, weight=weight, wvar=p, epsabs=1e-15,
                                     epsrel=rtol, limit=200, full_output=1)
                if len(res) > 3 and res[1] > max(1e-13, 10 * rtol * abs(res[0])):
                    raise NumericalError("direct momentum quadrature failed",
                                         {"p": p, "interval": [a, b], "abserr": res[1],
                                          "message": res[3].strip()})
                parts[key, weight] = res[0]
        # (re + i im)(cos - i sin)
        acc += complex(parts["re", "cos"] + parts["im", "sin"],
                       parts["im", "cos"] - parts["re", "sin"])
    return acc / math.sqrt(2 * math.pi)


def check_phase_relation(psi0: MomentumSpectrum, psi1: MomentumSpectrum,
                         shift_x: float = 0.125) -> float:
    """``max |psi0(p) - exp(i p shift_x) psi1(p)|`` over the common grid."""
    if psi0.p.shape != psi1.p.shape or not np.array_equal(psi0.p, psi1.p):
        raise GridError("spectra are on different momentum grids")
    return float(np.max(np.abs(psi0.psi - np.exp(1j * psi0.p * shift_x) * psi1.psi)))


def envelope_bound(p, N0: float, L: float):
    """``(4 N0^2 / pi) sin^2(p L / 2) / p^2``; ``N0^2 L^2 / pi`` at ``p = 0``."""
    p_arr = np.asarray(p, dtype=float)
    safe = np.where(p_arr == 0, 1.0, p_arr)
    out = np.where(p_arr == 0, N0**2 * L**2 / math.pi,
                   4 * N0**2 / math.pi * np.sin(safe * L / 2) ** 2 / safe**2)
    return float(out) if np.ndim(p) == 0 else out


def envelope_fraction(spectrum: MomentumSpectrum, N0: float, L: float, rtol: float = 1e-6,
                      floor: float = 1e-12) -> float:
    """Fraction of grid momenta with ``|psi|^2 <= bound (1 + rtol)``.

    ``floor`` (relative to ``max |psi|^2``) absorbs round-off where both sides
    vanish together at the bound's zeros.
    """
    a2 = spectrum.abs2
    ok = a2 <= envelope_bound(spectrum.p, N0, L) * (1 + rtol) + floor * a2.max()
    return float(ok.mean())


def spike_centers(spectrum: MomentumSpectrum, min_separation: float = 3 * math.pi,
                  rel_height: float = 1e-3) -> np.ndarray:
    """Momenta of the dominant local maxima of ``|psi|^2``.

    Peaks closer than ``min_separation`` are merged (the highest wins), which
    discards sinc side lobes around each spike.
    """
    a2 = spectrum.abs2
    distance = max(1, int(math.ceil(min_separation / spectrum.dp)))
    idx, _ = signal.find_peaks(a2, height=rel_height * a2.max(), distance=distance)
    return spectrum.p[idx]


def comb_offsets(centers, spacing: float, offset: float = 0.0) -> np.ndarray:
    """Distance of each centre from the nearest point of ``offset + spacing * Z``."""
    c = np.asarray(centers, dtype=float) - offset
    return np.abs(c - spacing * np.rint(c / spacing))


def comb_coverage(centers, spacing: float, extent: float, tol: float, offset: float = 0.0) -> bool:
    """True when every comb point ``offset + spacing s`` with ``|.| <= extent`` has a centre within ``tol``."""
    centers = np.sort(np.asarray(centers, dtype=float))
    s_max = int(math.floor((extent - offset) / spacing))
    s_min = int(math.ceil((-extent - offset) / spacing))
    for s in range(s_min, s_max + 1):
        target = offset + spacing * s
        if centers.size == 0 or np.min(np.abs(centers - target)) > tol:
            return False
    return True
