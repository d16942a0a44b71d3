"""Command-line front end.

Exit codes: 0 success, 1 numerical failure (diagnostics as JSON on stderr),
2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from . import io as gio
from .exceptions import DomainError, GKPLithoError, GridError, InfeasibleGeometryError, NumericalError
from .intrinsic import evaluate_report, minimum_of_rows, sweep_g0
from .lithography import GridSpec, OutcomeSampler, conditional_wavefunction, make_grid
from .physical import (
    AtomSpecies, PhysicalSetup, check_feasibility, coupling_from_input, get_species, load_presets,
)
from .spectral import momentum_wavefunction

OUTPUT_ENV = "GKPLITHO_OUTPUT_DIR"
# Largest padded FFT length the generate command will allocate.
MAX_FFT_POINTS = 1 << 26

DEFAULTS: dict[str, Any] = {
    "atom": "cs", "w0": 20e-6, "g0_convention": "plain", "x0": 0.0, "padding": 8,
    "n_max": 50, "method": "exact", "g0_min": 1e6, "g0_max": 1e9, "points": 60,
    "workers": 1, "n": 1000, "seed": 0, "p_max": None, "points_per_quarter": None,
    "grid_points": None,
}
PHYSICAL_KEYS = ("atom", "mass", "lambda0", "d12", "atoms_file", "g0", "w0", "g0_convention")
DIRECT_KEYS = ("alpha", "d")


class UsageError(GKPLithoError):
    pass


def _physical_options(p: argparse.ArgumentParser, need_g0: bool = True) -> None:
    g = p.add_argument_group("physical mode")
    g.add_argument("--atom", help="atom preset name (default: cs)")
    g.add_argument("--mass", type=float, help="custom species mass [kg]")
    g.add_argument("--lambda0", type=float, help="custom species transition wavelength [m]")
    g.add_argument("--d12", type=float, help="custom species dipole moment [C m]")
    g.add_argument("--atoms-file", help="JSON file with extra atom presets")
    if need_g0:
        g.add_argument("--g0", type=float, help="single-photon coupling")
    g.add_argument("--w0", type=float, help="cavity waist [m] (default: 20e-6)")
    g.add_argument("--g0-convention", choices=("plain", "angular"),
                   help="plain: value is already rad/s; angular: value is Hz, times 2 pi")


def _direct_options(p: argparse.ArgumentParser, with_d: bool = True) -> None:
    g = p.add_argument_group("direct mode")
    g.add_argument("--alpha", type=float, help="coherent amplitude")
    if with_d:
        g.add_argument("--d", type=int, help="number of half-wavelengths (even)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option values; flags override it")
    common.add_argument("--out-dir", help=f"output directory (default: ${OUTPUT_ENV} or cwd)")

    parser = argparse.ArgumentParser(prog="gkplitho", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[common], help="codeword wavefunction, spectrum, record")
    _direct_options(gen)
    _physical_options(gen)
    gen.add_argument("--x0", type=float, help="homodyne outcome (default: 0)")
    gen.add_argument("--padding", type=int, help="FFT zero-padding factor (default: 8)")
    gen.add_argument("--points-per-quarter", type=int, help="grid samples per pi/4 in y")
    gen.add_argument("--grid-points", type=int, help="total grid size (power of two)")
    gen.add_argument("--p-max", type=float, help="only export |p| <= P_MAX in the spectrum")

    err = sub.add_parser("errors", parents=[common], help="intrinsic error report")
    _direct_options(err)
    _physical_options(err)
    err.add_argument("--n-max", type=int, help="momentum regions per side (default: 50)")
    err.add_argument("--method", choices=("exact", "spectrum"),
                     help="P_p from the autocorrelation series or an FFT spectrum")
    err.add_argument("--padding", type=int, help="FFT zero-padding factor for --method spectrum")

    sw = sub.add_parser("sweep", parents=[common], help="intrinsic errors along log-spaced g0")
    _physical_options(sw, need_g0=False)
    sw.add_argument("--g0-min", type=float)
    sw.add_argument("--g0-max", type=float)
    sw.add_argument("--points", type=int)
    sw.add_argument("--n-max", type=int)
    sw.add_argument("--workers", type=int, help="worker processes (default: 1)")

    sm = sub.add_parser("sample", parents=[common], help="draw homodyne outcomes")
    _direct_options(sm, with_d=False)
    _physical_options(sm)
    sm.add_argument("--n", type=int, help="number of samples (default: 1000)")
    sm.add_argument("--seed", type=int, help="RNG seed (default: 0)")

    fe = sub.add_parser("feasibility", parents=[common], help="interaction-time constraints")
    _physical_options(fe)
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flags over the config file over built-in defaults."""
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "out_dir")}
    config: dict[str, Any] = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in raw.items()}
        unknown = sorted(set(config) - set(flags))
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    explicit = {k for k, v in flags.items() if v is not None} | {k for k, v in config.items() if v is not None}
    merged = {}
    for key, value in flags.items():
        if value is None:
            value = config.get(key, DEFAULTS.get(key))
        merged[key] = value
    merged["_explicit"] = explicit
    return merged


def _mode(cfg: dict) -> str:
    explicit = cfg["_explicit"]
    direct = any(k in explicit for k in DIRECT_KEYS)
    physical = any(k in explicit for k in PHYSICAL_KEYS if k in cfg)
    if direct and physical:
        raise UsageError("direct mode (--alpha/--d) and physical mode (--atom/--g0/--w0/...) "
                         "are mutually exclusive")
    return "direct" if direct else "physical"


def _species(cfg: dict) -> AtomSpecies:
    custom = [cfg.get(k) for k in ("mass", "lambda0", "d12")]
    if any(v is not None for v in custom):
        if not all(v is not None for v in custom):
            raise UsageError("a custom species needs all of --mass, --lambda0 and --d12")
        if "atom" in cfg["_explicit"]:
            raise UsageError("--atom and a custom species are mutually exclusive")
        return AtomSpecies("custom", *custom)
    extra = load_presets(cfg["atoms_file"]) if cfg.get("atoms_file") else None
    return get_species(cfg["atom"], extra)


def _setup(cfg: dict) -> PhysicalSetup:
    if cfg.get("g0") is None:
        raise UsageError("physical mode needs --g0")
    g0 = coupling_from_input(cfg["g0"], cfg["g0_convention"])
    return PhysicalSetup.from_coupling(_species(cfg), cfg["w0"], g0)


def _alpha_d(cfg: dict, need_d: bool = True) -> tuple[float, int | None, dict]:
    if _mode(cfg) == "direct":
        if cfg.get("alpha") is None or (need_d and cfg.get("d") is None):
            raise UsageError("direct mode needs --alpha" + (" and --d" if need_d else ""))
        return float(cfg["alpha"]), cfg.get("d"), {}
    setup = _setup(cfg)
    info = {"g0": setup.g0, "D": setup.D, "alpha": setup.alpha, "d": setup.d, "t": setup.t,
            "delta": setup.delta, "v": setup.v, "species": setup.species.label}
    return setup.alpha, setup.d, info


def _provenance(cfg: dict, command: str) -> dict:
    flags = {k: v for k, v in sorted(cfg.items()) if not k.startswith("_") and k != "command"}
    return {"tool": "gkplitho", "version": __version__, "command": command, "flags": flags}


def _out_dir(args) -> Path:
    out = Path(args.out_dir or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid(cfg: dict, alpha: float, d: int) -> GridSpec:
    ppq, n = cfg.get("points_per_quarter"), cfg.get("grid_points")
    if ppq is None and n is None:
        return make_grid(alpha, d)
    ppq = int(ppq or make_grid(alpha, d).points_per_quarter)
    if n is None:
        # samples up to pi d + pi/4, rounded up to a power of two
        n = 1 << (ppq * (4 * d + 1)).bit_length()
    return GridSpec(ppq, int(n))


def cmd_generate(args, cfg) -> int:
    alpha, d, phys = _alpha_d(cfg)
    grid = _grid(cfg, alpha, d)
    if grid.n_points * cfg["padding"] > MAX_FFT_POINTS:
        raise GridError(f"grid of {grid.n_points} points x padding {cfg['padding']} exceeds the "
                        f"{MAX_FFT_POINTS}-point FFT limit; use 'errors' for large d")
    wf, record = conditional_wavefunction(alpha, d, cfg["x0"], grid)
    spec = momentum_wavefunction(wf, cfg["padding"])
    out = _out_dir(args)
    gio.write_wavefunction(out / "wavefunction.csv", wf)
    gio.write_spectrum(out / "spectrum.csv", spec, cfg.get("p_max"))
    payload = record.to_dict()
    payload["norm"] = wf.norm()
    payload["spectrum_norm"] = spec.norm()
    payload["dp"] = spec.dp
    if phys:
        payload["physical"] = phys
    payload["provenance"] = _provenance(cfg, "generate")
    gio.write_json(out / "record.json", payload)
    print(f"alpha={alpha:.6g} d={d} x0={cfg['x0']:.6g} J={record.J:.10g} "
          f"pdf(x0)={record.pdf_at_x0:.6g} grid={grid.n_points} -> {out}")
    return 0


def cmd_errors(args, cfg) -> int:
    alpha, d, phys = _alpha_d(cfg)
    report = evaluate_report(alpha, d, cfg["n_max"], cfg["method"], cfg["padding"])
    payload = report.to_dict()
    payload["dominance_ok"] = report.dominance_ok
    if phys:
        payload["physical"] = phys
    payload["provenance"] = _provenance(cfg, "errors")
    out = _out_dir(args)
    gio.write_json(out / "report.json", payload)
    print(f"alpha={alpha:.6g} d={d} Px={report.P_x:.6g} Pp+={report.Pp_plus:.6g} "
          f"Pp-={report.Pp_minus:.6g} P+={report.P_plus:.6g} P-={report.P_minus:.6g} "
          f"Pmax={report.P_max:.6g}")
    return 0


SWEEP_HEADER = ("g0", "alpha", "d", "t", "Px", "Pp_plus", "Pp_minus", "Pplus_bound",
                "Pminus_bound", "Pmax", "feasible")


def cmd_sweep(args, cfg) -> int:
    if any(k in cfg["_explicit"] for k in DIRECT_KEYS):
        raise UsageError("sweep runs in physical mode only")
    conv = cfg["g0_convention"]
    g_lo, g_hi = (coupling_from_input(cfg[k], conv) for k in ("g0_min", "g0_max"))
    if not g_lo < g_hi:
        raise UsageError(f"--g0-min must be below --g0-max (got {cfg['g0_min']}, {cfg['g0_max']})")
    if cfg["points"] < 3:
        raise UsageError("--points must be at least 3")
    rows = sweep_g0(g_lo, g_hi, cfg["points"], species=_species(cfg), w0=cfg["w0"],
                    n_max=cfg["n_max"], workers=cfg["workers"])
    nan = math.nan
    table = []
    for r in rows:
        rep = r.report
        vals = ((rep.P_x, rep.Pp_plus, rep.Pp_minus, rep.P_plus, rep.P_minus, rep.P_max)
                if rep is not None else (nan,) * 6)
        table.append((r.g0, r.alpha, r.d, r.t) + vals + (r.feasible,))
    out = _out_dir(args)
    gio.write_csv(out / "sweep.csv", SWEEP_HEADER, table)
    summary: dict[str, Any] = {"rows": len(rows),
                               "infeasible_rows": [r.index for r in rows if not r.feasible],
                               "notes": {str(r.index): r.note for r in rows if r.note}}
    try:
        best = minimum_of_rows(rows)
        summary.update({"g0_star": best.g0, "Pmax_star": best.P_max, "argmin_index": best.index,
                        "bracketed": best.bracketed})
    except DomainError as exc:
        summary.update({"g0_star": None, "Pmax_star": None, "bracketed": False, "error": str(exc)})
    summary["provenance"] = _provenance(cfg, "sweep")
    gio.write_json(out / "sweep_summary.json", summary)
    if summary.get("g0_star") is not None:
        flag = "" if summary["bracketed"] else " (unbracketed: minimum on the range edge)"
        print(f"{len(rows)} rows; min Pmax={summary['Pmax_star']:.4g} at g0={summary['g0_star']:.4g}{flag}")
    return 0


def cmd_sample(args, cfg) -> int:
    alpha, _, phys = _alpha_d(cfg, need_d=False)
    if cfg["n"] < 1:
        raise UsageError("--n must be positive")
    sampler = OutcomeSampler(alpha)
    x = np.atleast_1d(sampler.sample(cfg["n"], seed=cfg["seed"]))
    out = _out_dir(args)
    gio.write_columns(out / "samples.csv", ("x0",), (x,))
    meta = {"alpha": alpha, "n": int(cfg["n"]), "seed": int(cfg["seed"]), "mean": float(x.mean()),
            "std": float(x.std()), "window": [-sampler.half_width, sampler.half_width],
            "window_mass": sampler.mass}
    if phys:
        meta["physical"] = phys
    meta["provenance"] = _provenance(cfg, "sample")
    gio.write_json(out / "samples.json", meta)
    print(f"{cfg['n']} outcomes for alpha={alpha:.6g}: mean={meta['mean']:.6g} std={meta['std']:.6g}")
    return 0


def cmd_feasibility(args, cfg) -> int:
    payload: dict[str, Any]
    try:
        setup = _setup(cfg)
    except InfeasibleGeometryError as exc:
        payload = {"feasible": False, "error": str(exc), "g0": cfg.get("g0")}
    else:
        rep = check_feasibility(setup)
        payload = {"feasible": rep.satisfied, "g0": setup.g0, "D": setup.D, "alpha": setup.alpha,
                   "d": setup.d, "t": setup.t, "v": setup.v, "delta": setup.delta, **rep.to_dict()}
    payload["provenance"] = _provenance(cfg, "feasibility")
    out = _out_dir(args)
    gio.write_json(out / "feasibility.json", payload)
    if payload["feasible"]:
        print(f"feasible: t={payload['t']:.4g} s in [{payload['t_lower']:.4g}, {payload['t_upper']:.4g}) "
              f"v={payload['v']:.4g} m/s")
    else:
        print(f"infeasible: {payload.get('error') or payload.get('notes')}")
    for note in payload.get("notes", []):
        print(f"note: {note}")
    return 0


COMMANDS = {"generate": cmd_generate, "errors": cmd_errors, "sweep": cmd_sweep,
            "sample": cmd_sample, "feasibility": cmd_feasibility}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gkplitho {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, GridError, OSError, ValueError) as exc:
        print(f"gkplitho {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "diagnostics": exc.diagnostics}
        sys.stderr.write(gio.dumps(diag))
        return 1
    except GKPLithoError as exc:
        sys.stderr.write(gio.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
