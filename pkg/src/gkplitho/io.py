"""Deterministic CSV/JSON writers: 17 significant digits, LF line endings."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .lithography import SampledWaveFunction
from .spectral import MomentumSpectrum


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return path


def write_columns(path: str | Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    """Column-oriented variant of :func:`write_csv` for long float arrays."""
    path = Path(path)
    cols = [np.char.mod("%.17g", np.asarray(c, dtype=float)) for c in columns]
    body = np.char.add(cols[0], "")
    for c in cols[1:]:
        body = np.char.add(np.char.add(body, ","), c)
    text = ",".join(header) + "\n" + "\n".join(body.tolist()) + "\n"
    path.write_bytes(text.encode("ascii"))
    return path


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return _json_string(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_string(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_string(s: str) -> str:
    import json
    return json.dumps(s, ensure_ascii=True)


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits and non-finite values as null."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.write_bytes(dumps(obj).encode("ascii"))
    return path


def write_wavefunction(path: str | Path, wf: SampledWaveFunction) -> Path:
    v = wf.values
    return write_columns(path, ("y", "re", "im", "abs2", "phase"),
                         (wf.y, v.real, v.imag, np.abs(v) ** 2, np.angle(v)))


def write_spectrum(path: str | Path, spectrum: MomentumSpectrum, p_max: float | None = None) -> Path:
    keep = slice(None)
    if p_max is not None:
        keep = np.abs(spectrum.p) <= p_max
    psi = spectrum.psi[keep]
    return write_columns(path, ("p", "re", "im", "abs2"),
                         (spectrum.p[keep], psi.real, psi.imag, np.abs(psi) ** 2))
