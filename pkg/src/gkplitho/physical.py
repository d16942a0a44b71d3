"""Physical constants, atom presets and the constraint system linking the
coherent amplitude, cavity length, coupling constant and interaction time.

All couplings, detunings and the calibration constant ``D`` are angular
frequencies in rad/s. Lengths are in metres, masses in kilograms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Mapping

from .exceptions import DomainError, InfeasibleGeometryError

HBAR = 1.054571817e-34  # J s
EPS0 = 8.8541878128e-12  # F/m
C_LIGHT = 2.99792458e8  # m/s

# Fixed ratio between the lower (large detuning) and upper (Raman-Nath)
# interaction-time bounds used to slave alpha to g0.
CALIBRATION_RATIO = 1e-2

G0Convention = Literal["plain", "angular"]


@dataclass(frozen=True)
class AtomSpecies:
    """Two-level atom coupled to a cavity tuned near its transition.

    ``wavelength`` is used both as the atomic transition wavelength and as the
    cavity wavelength (the dispersive detuning is negligible on this scale).
    """

    label: str
    mass: float
    wavelength: float
    dipole_moment: float

    def __post_init__(self):
        for name in ("mass", "wavelength", "dipole_moment"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def omega_c(self) -> float:
        """Cavity angular frequency 2 pi c / lambda."""
        return 2.0 * math.pi * C_LIGHT / self.wavelength


CESIUM = AtomSpecies(label="Cs", mass=2.2069e-25, wavelength=852.1e-9, dipole_moment=3.79e-29)

PRESETS: dict[str, AtomSpecies] = {"cs": CESIUM}


def load_presets(path: str | Path) -> dict[str, AtomSpecies]:
    """Read atom presets from a JSON file.

    The file maps a preset name to an object with keys ``mass``, ``lambda0``
    and ``d12`` (SI units) and an optional ``label``. Names are
    case-insensitive.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise DomainError(f"{path}: expected a JSON object mapping names to species")
    out = {}
    for name, entry in raw.items():
        try:
            out[name.lower()] = AtomSpecies(
                label=str(entry.get("label", name)),
                mass=float(entry["mass"]),
                wavelength=float(entry["lambda0"]),
                dipole_moment=float(entry["d12"]),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise DomainError(f"{path}: malformed species entry {name!r}") from exc
    return out


def get_species(name: str, extra: Mapping[str, AtomSpecies] | None = None) -> AtomSpecies:
    table = dict(PRESETS)
    if extra:
        table.update({k.lower(): v for k, v in extra.items()})
    try:
        return table[name.lower()]
    except KeyError:
        raise DomainError(f"unknown atom {name!r}; known: {', '.join(sorted(table))}") from None


def coupling_from_input(value: float, convention: G0Convention = "plain") -> float:
    """Convert a user-supplied coupling to rad/s.

    ``plain`` takes the number as an angular frequency already (a "16 MHz"
    label then means 1.6e7 s^-1). ``angular`` treats it as a cyclic frequency
    in Hz and multiplies by 2 pi.
    """
    if convention == "plain":
        return float(value)
    if convention == "angular":
        return 2.0 * math.pi * float(value)
    raise DomainError(f"unknown g0 convention {convention!r}")


def compute_D(species: AtomSpecies) -> float:
    """Calibration frequency ``D = 100 * 2 pi^2 hbar / (M lambda^2)`` in rad/s."""
    return 2.0 * math.pi**2 * HBAR / (CALIBRATION_RATIO * species.mass * species.wavelength**2)


def alpha_from_g0(g0: float, D: float) -> float:
    """Coherent amplitude fixed by the calibration: the cube root of g0/D."""
    if not (g0 > 0 and D > 0):
        raise DomainError(f"g0 and D must be positive, got g0={g0!r}, D={D!r}")
    return (g0 / D) ** (1.0 / 3.0)


def mode_volume(species: AtomSpecies, w0: float, d: float) -> float:
    """``V = pi w0^2 d lambda / 2`` for a cavity of d half-wavelengths."""
    return math.pi * w0**2 * d * species.wavelength / 2.0


def g0_from_geometry(species: AtomSpecies, w0: float, d: int) -> float:
    """Single-photon coupling ``d12 sqrt(omega_c / (2 hbar eps0 V))`` in rad/s."""
    if int(d) != d or d < 2 or d % 2:
        raise DomainError(f"d must be an even integer >= 2, got {d!r}")
    if not w0 > 0:
        raise DomainError(f"waist must be positive, got {w0!r}")
    volume = mode_volume(species, w0, d)
    return species.dipole_moment * math.sqrt(species.omega_c / (2.0 * HBAR * EPS0 * volume))


def d_continuous(species: AtomSpecies, w0: float, g0: float) -> float:
    """Unrounded inverse of :func:`g0_from_geometry`."""
    if not (g0 > 0 and w0 > 0):
        raise DomainError(f"g0 and w0 must be positive, got g0={g0!r}, w0={w0!r}")
    return (species.dipole_moment**2 * species.omega_c
            / (HBAR * EPS0 * math.pi * w0**2 * species.wavelength * g0**2))


def d_from_g0(species: AtomSpecies, w0: float, g0: float) -> int:
    """Half-wavelength count implied by g0, rounded to the nearest even integer."""
    dc = d_continuous(species, w0, g0)
    d = 2 * int(math.floor(dc / 2.0 + 0.5))
    if d < 2:
        raise InfeasibleGeometryError(
            f"g0={g0:.6g} rad/s needs a cavity of {dc:.3g} half-wavelengths (< 2)")
    return d


def interaction_time_bounds(species: AtomSpecies, alpha: float, g0: float) -> tuple[float, float]:
    """Return ``(t_lower, t_upper)``: large-detuning and Raman-Nath limits.

    ``t_upper`` is ``math.inf`` when ``alpha == 0``.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    t_lower = 2.0 * math.pi * alpha / g0
    if alpha == 0:
        return 0.0, math.inf
    t_upper = species.mass * species.wavelength**2 / (math.pi * HBAR * alpha**2)
    return t_lower, t_upper


@dataclass(frozen=True)
class PhysicalSetup:
    """Apparatus fully derived from (species, waist, coupling).

    The half-wavelength count ``d`` is slaved to ``g0`` through the mode
    volume; ``alpha`` is fixed by the calibration and the interaction time sits
    on its lower bound.
    """

    species: AtomSpecies
    w0: float
    g0: float
    D: float
    alpha: float
    d: int
    t: float
    delta: float
    volume: float
    v: float

    @classmethod
    def from_coupling(cls, species: AtomSpecies, w0: float, g0: float) -> "PhysicalSetup":
        D = compute_D(species)
        alpha = alpha_from_g0(g0, D)
        d = d_from_g0(species, w0, g0)
        t = 2.0 * math.pi * alpha / g0
        # g0^2 t / delta = pi
        delta = g0**2 * t / math.pi
        return cls(species=species, w0=w0, g0=g0, D=D, alpha=alpha, d=d, t=t,
                   delta=delta, volume=mode_volume(species, w0, d), v=2.0 * w0 / t)

    @property
    def phase_gain(self) -> float:
        return self.g0**2 * self.t / self.delta


# Operating point quoted alongside the Cs numbers; kept to flag the mismatch
# between its interaction time and velocity.
REFERENCE_POINT = {"g0": 1.6e7, "w0": 20e-6, "t": 3e-6, "v": 40.0}


@dataclass(frozen=True)
class FeasibilityReport:
    t_lower: float
    t_upper: float
    chosen_t: float
    raman_nath_ok: bool
    large_detuning_ok: bool
    lower_margin: float
    upper_margin: float
    bound_ratio: float
    velocity: float | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def satisfied(self) -> bool:
        return self.raman_nath_ok and self.large_detuning_ok

    def to_dict(self) -> dict:
        return {
            "t_lower": self.t_lower,
            "t_upper": self.t_upper,
            "chosen_t": self.chosen_t,
            "raman_nath_ok": self.raman_nath_ok,
            "large_detuning_ok": self.large_detuning_ok,
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "bound_ratio": self.bound_ratio,
            "velocity": self.velocity,
            "notes": list(self.notes),
        }


def feasibility_from_bounds(t_lower: float, t_upper: float, chosen_t: float,
                            velocity: float | None = None,
                            notes: tuple[str, ...] = ()) -> FeasibilityReport:
    ratio = t_lower / t_upper if math.isfinite(t_upper) else 0.0
    return FeasibilityReport(
        t_lower=t_lower,
        t_upper=t_upper,
        chosen_t=chosen_t,
        raman_nath_ok=chosen_t < t_upper,
        large_detuning_ok=chosen_t >= t_lower,
        lower_margin=chosen_t / t_lower if t_lower > 0 else math.inf,
        upper_margin=t_upper / chosen_t if chosen_t > 0 else math.inf,
        bound_ratio=ratio,
        velocity=velocity,
        notes=notes,
    )


def _reference_note(setup: PhysicalSetup) -> tuple[str, ...]:
    ref = REFERENCE_POINT
    near = (abs(setup.g0 / ref["g0"] - 1.0) <= 0.2 and abs(setup.w0 / ref["w0"] - 1.0) <= 0.2
            and setup.species.label.lower() == "cs")
    if not near:
        return ()
    v_from_ref_t = 2.0 * ref["w0"] / ref["t"]
    return (
        f"reference operating point quotes t={ref['t'] * 1e6:.1f} us with v={ref['v']:.0f} m/s, "
        f"but 2*w0/t gives {v_from_ref_t:.1f} m/s for that t; the pair is inconsistent. "
        f"This model gives t={setup.t * 1e6:.3f} us and v={setup.v:.1f} m/s.",
    )


def check_feasibility(setup: PhysicalSetup) -> FeasibilityReport:
    """Evaluate both interaction-time constraints at ``t = t_lower``."""
    t_lower, t_upper = interaction_time_bounds(setup.species, setup.alpha, setup.g0)
    return feasibility_from_bounds(t_lower, t_upper, setup.t, velocity=setup.v,
                                   notes=_reference_note(setup))
