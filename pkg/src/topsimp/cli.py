"""``simplify`` command: load, cap, order, pair, simplify, emit."""

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .cell_complex import (from_pixel_grid, from_triangle_mesh, pixel_cells,
                           validate_surface)
from .errors import (ComplexError, InternalInvariantViolation, ParseError,
                     TopSimpError)
from .morse import build_total_order, extend_from_top_cells, \
    extend_from_vertices
from .persistence import all_persistence_pairs, diagram
from .simplify import simplify, smooth_within_polytope

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NON_MANIFOLD = 3
EXIT_INTERNAL = 4

EMITS = ("field", "diagram", "critical", "gradient-pairs", "stats")
NON_MANIFOLD_MSG = ("input is not a combinatorial surface; a perfect "
                    "simplification may not exist on a non-manifold "
                    "2-dimensional cell complex")


@dataclass
class RunConfig:
    input_path: str
    input_format: str = "pgm"
    delta: float = 0.0
    delta_relative: bool = False
    mode: str = "mean"
    sweeps: int = 0
    emit: tuple = ("field",)
    output_prefix: str = "out"
    values_path: str = None
    timings: bool = True

    def __post_init__(self):
        if not np.isfinite(self.delta) or self.delta < 0:
            raise ValueError("delta must be finite and >= 0")
        if self.sweeps < 0:
            raise ValueError("sweeps must be >= 0")
        bad = set(self.emit) - set(EMITS)
        if bad:
            raise ValueError(f"unknown emit targets {sorted(bad)}")


def _load(cfg):
    """Returns (complex, cell values, input samples, restriction, maxval)."""
    fmt = cfg.input_format
    if fmt in ("pgm", "values-tsv"):
        if fmt == "pgm":
            grid, maxval = io.parse_pgm(cfg.input_path)
        else:
            grid, maxval = io.parse_values_tsv(cfg.input_path), None
        cx = from_pixel_grid(*grid.shape)
        pix = pixel_cells(cx, grid.shape)
        f = extend_from_top_cells(cx, grid.ravel())

        def restrict(g):
            return g[pix]
        return cx, f, grid, restrict, maxval
    if fmt == "off":
        nv, tris, _, scalars = io.parse_off(cfg.input_path, cfg.values_path)
        if scalars is None:
            raise ParseError("OFF input needs a 4th column or --values file")
        cx = from_triangle_mesh(nv, tris)
        report = validate_surface(cx)
        if not report.is_manifold:
            raise ComplexError("; ".join(report.problems[:3]))
        f = extend_from_vertices(cx, scalars)

        def restrict(g):
            return g[cx.cells(0)]
        return cx, f, scalars, restrict, None
    raise ParseError(f"unknown input format {fmt!r}")


def run(cfg, log=None):
    """Execute one configuration and write the requested files.

    Returns the process exit status.
    """
    log = log or sys.stderr
    try:
        return _run(cfg)
    except ParseError as exc:
        print(f"simplify: parse error: {exc}", file=log)
        return EXIT_PARSE
    except OSError as exc:
        print(f"simplify: cannot read input: {exc}", file=log)
        return EXIT_PARSE
    except ComplexError as exc:
        print(f"simplify: {NON_MANIFOLD_MSG} ({exc})", file=log)
        return EXIT_NON_MANIFOLD
    except (InternalInvariantViolation, TopSimpError) as exc:
        print(f"simplify: internal error: {exc}", file=log)
        return EXIT_INTERNAL


def _run(cfg):
    clock = time.perf_counter
    t0 = clock()
    cx, f, samples, restrict, maxval = _load(cfg)
    t_load = clock() - t0
    delta = cfg.delta
    if cfg.delta_relative:
        delta *= float(np.ptp(samples))

    res = simplify(cx, f, delta, timer=clock)
    out = {"min": res.f_min, "max": res.f_max, "mean": res.f_mean,
           "smooth": res.f_mean}[cfg.mode]
    t_smooth = 0.0
    if cfg.mode == "smooth":
        t1 = clock()
        out = smooth_within_polytope(res.complex, res.f, res.f_mean,
                                     res.v_delta, delta, cfg.sweeps)
        t_smooth = clock() - t1
    cxc = res.complex
    prefix = Path(cfg.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    stats = {}

    if "field" in cfg.emit:
        vals = restrict(out)
        if cfg.input_format == "pgm":
            q, scale, offset, err = io.quantize(vals, maxval)
            io.write_pgm(f"{prefix}.pgm", q, maxval)
            Path(f"{prefix}.pgm.scale").write_text(
                f"scale={io.format_value(scale)}\n"
                f"offset={io.format_value(offset)}\n")
            stats["quantization_max_error"] = err
        elif cfg.input_format == "values-tsv":
            io.emit_values_tsv(f"{prefix}.tsv", vals)
        else:
            io.emit_values(f"{prefix}.tsv", vals)
    if "diagram" in cfg.emit:
        order = build_total_order(cxc, out, res.v_delta)
        recs, _, _ = all_persistence_pairs(cxc, out, order, 0.0, res.v_delta)
        io.emit_diagram(f"{prefix}.diagram.tsv", diagram(recs))
    if "critical" in cfg.emit:
        crit = res.critical()
        lines = ["cell\tdim\tvalue"]
        lines += [f"{c}\t{cxc.dims[c]}\t{io.format_value(out[c])}"
                  for c in crit]
        Path(f"{prefix}.critical.tsv").write_text("\n".join(lines) + "\n")
    if "gradient-pairs" in cfg.emit:
        Path(f"{prefix}.gradient.txt").write_text(res.v_delta.to_text(cxc))
    if "stats" in cfg.emit:
        crit = res.critical(include_virtual=True)
        lines = [f"cells={res.n_input}",
                 f"cells_0={int(np.sum(cxc.dims[:res.n_input] == 0))}",
                 f"cells_1={int(np.sum(cxc.dims[:res.n_input] == 1))}",
                 f"cells_2={int(np.sum(cxc.dims[:res.n_input] == 2))}",
                 f"virtual_cells={cxc.n - res.n_input}",
                 f"delta={io.format_value(delta)}",
                 f"mode={cfg.mode}"]
        for d in range(3):
            k = int(np.sum(res.records.dim == d))
            lines.append(f"records_{d}={k}")
        lines += [f"surviving={len(res.surviving)}",
                  f"canceled={len(res.canceled)}",
                  f"critical={crit.size}"]
        for d in range(3):
            lines.append(f"critical_{d}={int(np.sum(cxc.dims[crit] == d))}")
        lines.append(f"max_abs_change="
                     f"{io.format_value(_sup(res.strip(out), res.strip(f)))}")
        for k, v in stats.items():
            lines.append(f"{k}={io.format_value(v)}")
        if cfg.timings:
            times = dict(res.timings, load=t_load, smooth=t_smooth)
            for k in ("load", "order", "persistence", "extract",
                      "construct", "smooth"):
                lines.append(f"time_{k}={times[k]:.6f}")
        Path(f"{prefix}.stats.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _sup(a, b):
    return float(np.max(np.abs(a - b))) if np.size(a) else 0.0


def build_parser():
    p = argparse.ArgumentParser(
        prog="simplify",
        description="Topological simplification of a scalar field: keep only "
                    "the features with persistence above 2*delta.")
    p.add_argument("--input", required=True, help="input file")
    p.add_argument("--format", choices=("pgm", "off", "values-tsv"),
                   default=None, help="input format (default: by suffix)")
    p.add_argument("--values", help="per-vertex values for OFF input")
    p.add_argument("--delta", type=float, default=0.0,
                   help="sup-norm budget in input units")
    p.add_argument("--delta-relative", action="store_true",
                   help="interpret delta as a fraction of the value range")
    p.add_argument("--mode", choices=("min", "max", "mean", "smooth"),
                   default="mean")
    p.add_argument("--sweeps", type=int, default=10,
                   help="Gauss-Seidel sweeps for --mode smooth")
    p.add_argument("--emit", default="field",
                   help="comma separated subset of " + ",".join(EMITS))
    p.add_argument("--out", default="out", help="output prefix")
    p.add_argument("--no-timings", action="store_true",
                   help="leave wall-clock lines out of the stats file")
    return p


_SUFFIX = {".pgm": "pgm", ".off": "off", ".tsv": "values-tsv"}


def main(argv=None):
    parser = build_parser()
    a = parser.parse_args(argv)
    fmt = a.format or _SUFFIX.get(Path(a.input).suffix.lower())
    if fmt is None:
        parser.error("cannot infer --format from the input suffix")
    emit = tuple(e.strip() for e in a.emit.split(",") if e.strip())
    emit = tuple("critical" if e == "critical-cells" else e for e in emit)
    try:
        cfg = RunConfig(a.input, fmt, a.delta, a.delta_relative, a.mode,
                        a.sweeps, emit, a.out, a.values,
                        timings=not a.no_timings)
    except ValueError as exc:
        parser.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
