"""Command-line surface for the resonance laboratory.

Subcommands: disk-oracle, resonances, sabine-bound, opnorm-scaling,
billiards, from-manifest.  Every run writes a CSV (plus SVG on request) and
a JSON manifest echoing the fully resolved configuration; identical
configurations produce byte-identical CSV/SVG output.

Exit codes: 0 success, 2 usage/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__, bie, billiards, disk_oracle, resonance_search
from .billiards import Model, PotentialSpec
from .errors import SabineLabError
from .geometry import BoundaryCurve, CurveKind

_COMMANDS = ("disk-oracle", "resonances", "sabine-bound", "opnorm-scaling", "billiards")


def _fmt(x) -> str:
    """17-significant-digit float formatting (stable across platforms)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "nan"
    return "%.17g" % float(x)


def _model_from_flag(value: str) -> Model:
    if value == "delta":
        return Model.DELTA
    if value in ("delta-prime", "delta_prime"):
        return Model.DELTA_PRIME
    raise ValueError(f"--model must be 'delta' or 'delta-prime', got {value!r}")


@dataclass
class RunConfig:
    """Fully resolved, manifest-serializable run description."""

    command: str
    curve: str = "circle:r=1"
    h: float = 0.1
    V0: float = 1.0
    alpha: float = 0.0
    model: str = "delta"
    window: str = "0.5:1.5"
    grid: str = "33:13"
    quad_n: int = 256
    n_max: int = 0
    delta1: float = 0.05
    n_average: int = 8
    phase_grid: str = "64:64"
    lambdas: str = "50,100,200,400,800"
    s0: float = 0.0
    xi0: float = 0.0
    steps: int = 16
    out: str = "out.csv"
    svg: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_manifest(config: RunConfig, wall_time: float, outputs: list[str]) -> str:
    path = config.out + ".manifest.json"
    payload = {
        "tool": "sabine-lab",
        "version": __version__,
        "command": config.command,
        "config": config.to_dict(),
        "wall_time_s": wall_time,
        "outputs": outputs,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# deterministic SVG scatter
# ---------------------------------------------------------------------------

def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * abs(step):
        ticks.append(round(t / step) * step)
        t += step
    return ticks


def emit_plot(candidates: list, bound_curve: list, path: str) -> None:
    """Deterministic SVG scatter of (Re lambda, Im lambda) with a bound line.

    candidates carry rescaled positions z and their h; the bound polyline is
    a list of (Re lambda, Im lambda) vertices drawn as a solid line.
    """
    pts = [(c.z.real / c.h, c.z.imag / c.h) for c in candidates]
    if not pts and not bound_curve:
        raise ValueError("emit_plot needs candidates or a bound polyline")
    xs = [p[0] for p in pts] + [q[0] for q in bound_curve]
    ys = [p[1] for p in pts] + [q[1] for q in bound_curve]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    pad_x = 0.06 * (x_hi - x_lo or 1.0)
    pad_y = 0.12 * (y_hi - y_lo or 1.0)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    width, height = 800.0, 500.0
    mleft, mright, mtop, mbot = 70.0, 20.0, 20.0, 50.0

    def sx(x):
        return mleft + (x - x_lo) / (x_hi - x_lo) * (width - mleft - mright)

    def sy(y):
        return height - mbot - (y - y_lo) / (y_hi - y_lo) * (height - mtop - mbot)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{mleft:.1f}" y="{mtop:.1f}" width="{width - mleft - mright:.1f}" '
        f'height="{height - mtop - mbot:.1f}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    for tx in _nice_ticks(x_lo, x_hi):
        if not (x_lo <= tx <= x_hi):
            continue
        parts.append(f'<line x1="{sx(tx):.2f}" y1="{height - mbot:.1f}" '
                     f'x2="{sx(tx):.2f}" y2="{height - mbot + 5:.1f}" stroke="black"/>')
        parts.append(f'<text x="{sx(tx):.2f}" y="{height - mbot + 18:.1f}" '
                     f'font-size="11" text-anchor="middle">{tx:g}</text>')
    for ty in _nice_ticks(y_lo, y_hi):
        if not (y_lo <= ty <= y_hi):
            continue
        parts.append(f'<line x1="{mleft - 5:.1f}" y1="{sy(ty):.2f}" '
                     f'x2="{mleft:.1f}" y2="{sy(ty):.2f}" stroke="black"/>')
        parts.append(f'<text x="{mleft - 8:.1f}" y="{sy(ty) + 4:.2f}" '
                     f'font-size="11" text-anchor="end">{ty:g}</text>')
    parts.append(f'<text x="{(mleft + width - mright) / 2:.1f}" y="{height - 10:.1f}" '
                 'font-size="13" text-anchor="middle">Re lambda</text>')
    parts.append(f'<text x="16" y="{(mtop + height - mbot) / 2:.1f}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{(mtop + height - mbot) / 2:.1f})">Im lambda</text>')
    if bound_curve:
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in bound_curve)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="black" '
                     'stroke-width="1.5"/>')
    for x, y in pts:
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     'fill="steelblue" stroke="none"/>')
    parts.append("</svg>")
    with open(path, "wb") as fh:
        fh.write("\n".join(parts).encode("ascii") + b"\n")


def _circle_bound_line(x_values, pot: PotentialSpec, model: Model):
    """Unit-disk decay bound as a function of Re lambda (normal incidence)."""
    line = []
    for x in x_values:
        h_eff = 1.0 / x
        if model is Model.DELTA:
            hs = h_eff * h_eff ** (-pot.alpha) * pot.V0
            y = -math.log(1.0 + 4.0 / (hs * hs)) / 4.0
        else:
            sv = h_eff ** pot.alpha * pot.V0
            y = -math.log(1.0 + 4.0 * h_eff * h_eff / (sv * sv)) / 4.0
        line.append((x, y))
    return line


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _parse_range(text: str, n_fields: int, flag: str):
    parts = text.split(":")
    if len(parts) != n_fields:
        raise ValueError(f"{flag} expects {n_fields} colon-separated fields, got {text!r}")
    return [float(p) for p in parts]


def _parse_grid(text: str, flag: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"{flag} expects NX:NY, got {text!r}")
    return int(parts[0]), int(parts[1])


def _run_disk_oracle(config: RunConfig) -> list[str]:
    model = _model_from_flag(config.model)
    lo, hi = _parse_range(config.window, 2, "--window")
    pot = PotentialSpec(V0=config.V0, alpha=config.alpha)
    candidates = disk_oracle.mode_sweep(config.h, pot, model, config.n_max,
                                        window=(lo, hi))
    rows = [
        [model.value, c.provenance.n, c.provenance.k, config.h, config.alpha,
         config.V0, c.z.real, c.z.imag, c.residual]
        for c in candidates
    ]
    rows.sort(key=lambda r: (r[6], r[1]))
    _write_csv(config.out, ["model", "n", "k", "h", "alpha", "V0",
                            "re_z", "im_z", "residual"], rows)
    outputs = [config.out]
    if config.svg:
        xs = np.linspace(lo / config.h, hi / config.h, 64)
        emit_plot(candidates, _circle_bound_line(xs, pot, model), config.svg)
        outputs.append(config.svg)
    return outputs


def _run_resonances(config: RunConfig) -> list[str]:
    model = _model_from_flag(config.model)
    curve = BoundaryCurve.from_spec(config.curve)
    pot = PotentialSpec(V0=config.V0, alpha=config.alpha)
    re_lo, re_hi, im_lo, im_hi = _parse_range(config.window, 4, "--window")
    if model is Model.DELTA_PRIME:
        if curve.kind is not CurveKind.CIRCLE:
            raise ValueError(
                "--model delta-prime supports command 'resonances' only on the "
                "circle (exact per-mode solving); general-curve delta-prime "
                "search is out of scope"
            )
        n_max = max(0, int(0.95 * re_lo / config.h))
        cands = disk_oracle.mode_sweep(config.h, pot, model, n_max,
                                       window=(re_lo, re_hi))
        cands = [c for c in cands if im_lo <= c.z.imag <= im_hi]
        gap = billiards.sabine_gap(curve, config.h, pot, model).bound
        rows = [
            [c.z.real, c.z.imag, c.residual, "nan",
             (-c.z.imag / config.h) - gap, config.quad_n, config.h]
            for c in cands
        ]
    else:
        window = resonance_search.SearchWindow(
            re_range=(re_lo, re_hi), im_range=(im_lo, im_hi),
            coarse_grid=_parse_grid(config.grid, "--grid"),
            h=config.h, quad_n=config.quad_n,
        )
        cands = resonance_search.find_resonances(window, curve, pot)
        rows = [
            [c.z.real, c.z.imag, c.provenance.sigma_min, c.provenance.cond,
             c.sabine_margin, config.quad_n, config.h]
            for c in cands
        ]
    rows.sort(key=lambda r: (r[0], r[1]))
    _write_csv(config.out, ["re_z", "im_z", "sigma_min", "cond",
                            "sabine_margin", "quad_N", "h"], rows)
    outputs = [config.out]
    if config.svg:
        if curve.kind is CurveKind.CIRCLE and pot.is_constant:
            xs = np.linspace(re_lo / config.h, re_hi / config.h, 64)
            line = _circle_bound_line(xs, pot, model)
        else:
            gap = billiards.sabine_gap(curve, config.h, pot, model).bound
            line = [(re_lo / config.h, -gap), (re_hi / config.h, -gap)]
        emit_plot(cands, line, config.svg)
        outputs.append(config.svg)
    return outputs


def _run_sabine_bound(config: RunConfig) -> list[str]:
    model = _model_from_flag(config.model)
    curve = BoundaryCurve.from_spec(config.curve)
    pot = PotentialSpec(V0=config.V0, alpha=config.alpha)
    grid = _parse_grid(config.phase_grid, "--phase-grid")
    report = billiards.sabine_gap(curve, config.h, pot, model,
                                  delta1=config.delta1,
                                  n_average=config.n_average, grid=grid)
    print(f"decay-rate bound (-Im z / h units): {report.bound:.6g}")
    if model is Model.DELTA and pot.alpha < 1.0:
        diameter_bound = billiards.sabine_diameter_bound(curve, config.h, pot)
        print(f"diameter closed form:               {diameter_bound:.6g}")
    if not report.within_theory:
        print(f"note: {report.notes}")
    _write_csv(config.out,
               ["h", "model", "bound", "min_s", "min_xi", "grid", "converged"],
               [[config.h, model.value, report.bound, report.minimizer.s,
                 report.minimizer.xi, f"{report.grid[0]}x{report.grid[1]}",
                 str(report.converged).lower()]])
    return [config.out]


def _run_opnorm_scaling(config: RunConfig) -> list[str]:
    curve = BoundaryCurve.from_spec(config.curve)
    lams = [float(x) for x in config.lambdas.split(",") if x]
    if not lams:
        raise ValueError("--lambdas must list at least one frequency")
    d, _ = curve.diameter()
    rows = []
    for lam in sorted(lams):
        # resolve up to the cap; fully converged norms want ~5 nodes/wavelength
        n_nodes = int(min(config.quad_n, max(256, 2 ** math.ceil(math.log2(5.12 * lam)))))
        if n_nodes % 2:
            n_nodes += 1
        grid = bie.NystromGrid.build(curve, n_nodes)
        norm = bie.operator_norm(bie.assemble_single_layer(grid, lam))
        rows.append([lam, n_nodes, norm])
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r[0] for r in rows]),
                                 np.log([r[2] for r in rows]), 1)[0])
        print(f"least-squares slope of log norm vs log lambda: {slope:.4f}")
    _write_csv(config.out, ["lambda", "N", "norm"], rows)
    return [config.out]


def _run_billiards(config: RunConfig) -> list[str]:
    curve = BoundaryCurve.from_spec(config.curve)
    q = billiards.PhasePoint(config.s0, config.xi0)
    segments = billiards.iterate(curve, q, config.steps)
    rows = []
    for seg in segments:
        data = curve.point_at(seg.start.s)
        rows.append([seg.start.s, seg.start.xi,
                     data.position[0], data.position[1], seg.chord_length])
    _write_csv(config.out, ["s", "xi", "x", "y", "chord"], rows)
    return [config.out]


_RUNNERS = {
    "disk-oracle": _run_disk_oracle,
    "resonances": _run_resonances,
    "sabine-bound": _run_sabine_bound,
    "opnorm-scaling": _run_opnorm_scaling,
    "billiards": _run_billiards,
}


def run(config: RunConfig) -> int:
    """Execute a resolved configuration; returns the process exit code."""
    t0 = time.perf_counter()
    try:
        outputs = _RUNNERS[config.command](config)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SabineLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _write_manifest(config, time.perf_counter() - t0, outputs)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sabine-lab",
        description="Scattering resonances of thin barriers on convex planar domains",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, curve=True):
        if curve:
            p.add_argument("--curve", default="circle:r=1",
                           help="circle:r=R | ellipse:a=A,b=B | stadium:l=L,r=R")
        p.add_argument("--h", type=float, default=0.1, help="semiclassical scale")
        p.add_argument("--V0", type=float, default=1.0, help="potential amplitude")
        p.add_argument("--alpha", type=float, default=0.0,
                       help="strength exponent (h^-alpha for delta, h^+alpha for delta-prime)")
        p.add_argument("--model", default="delta", choices=["delta", "delta-prime"])
        p.add_argument("--out", default="out.csv", help="CSV output path")

    p = sub.add_parser("disk-oracle", help="exact per-mode resonances of the unit disk")
    add_common(p, curve=False)
    p.add_argument("--n-max", type=int, default=0, dest="n_max")
    p.add_argument("--window", default="0.5:1.5", help="LO:HI window for Re z")
    p.add_argument("--svg", default=None, help="optional SVG scatter path")

    p = sub.add_parser("resonances", help="boundary-integral search in a complex window")
    add_common(p)
    p.add_argument("--window", default="0.9:1.1:-0.25:-0.02",
                   help="RE_LO:RE_HI:IM_LO:IM_HI in z units")
    p.add_argument("--grid", default="33:13", help="coarse scan grid NX:NY")
    p.add_argument("--quad-N", type=int, default=256, dest="quad_n")
    p.add_argument("--svg", default=None)

    p = sub.add_parser("sabine-bound", help="billiard-averaged decay-rate bound")
    add_common(p)
    p.add_argument("--delta1", type=float, default=0.05, help="glancing margin")
    p.add_argument("--n-average", type=int, default=8, dest="n_average")
    p.add_argument("--phase-grid", default="64:64", dest="phase_grid",
                   help="phase-space grid NS:NXI")

    p = sub.add_parser("opnorm-scaling", help="layer-operator norm vs frequency")
    p.add_argument("--curve", default="circle:r=1")
    p.add_argument("--lambdas", default="50,100,200,400,800")
    p.add_argument("--quad-N", type=int, default=1024, dest="quad_n",
                   help="node-count cap")
    p.add_argument("--out", default="out.csv")

    p = sub.add_parser("billiards", help="emit a billiard orbit as CSV")
    p.add_argument("--curve", default="circle:r=1")
    p.add_argument("--s0", type=float, default=0.0)
    p.add_argument("--xi0", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--out", default="out.csv")

    p = sub.add_parser("from-manifest", help="re-run a recorded configuration")
    p.add_argument("manifest", help="path to a .manifest.json file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "from-manifest":
        try:
            with open(args.manifest) as fh:
                payload = json.load(fh)
            config = RunConfig.from_dict(payload["config"])
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            print(f"error: unreadable manifest {args.manifest!r}: {exc}", file=sys.stderr)
            return 2
        return run(config)
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    return run(RunConfig(**values))


if __name__ == "__main__":
    sys.exit(main())
