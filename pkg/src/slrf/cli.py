"""Command-line driver: ``slrf run | sphere-error | compare | oracle``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure
(partial outputs are kept), 3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, fields
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .config import PRESETS, ConfigError, FlowConfig, build_config, coerce, parse_config_text
from .embedding import EmbeddingFailed, GeneratingCurve, curve_distance, embed_lattice, embed_metric
from .engine import FlowResult, run_flow
from .fd import MetricGrid, run_fd
from .lattice import cumulative_arclength

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
TIME_DIGITS = 12  # snapshot times are matched across runs after rounding


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# analysis helpers shared with the scripts and the acceptance suite

def sphere_radius_sq(snapshot) -> float:
    """r^2 of a round-sphere snapshot.

    Lattice: the meridian has length pi r, so r^2 = (sum L_y / pi)^2.
    Metric: r^2 = m(pi/2).
    """
    if isinstance(snapshot, MetricGrid):
        n = snapshot.n_points
        if n % 2:
            return float(snapshot.m[n // 2])
        rho = snapshot.rho
        return float(np.interp(np.pi / 2, rho, snapshot.m))
    return float((np.sum(snapshot.L_y) / np.pi) ** 2)


def sphere_error_series(snapshots: Iterable) -> list[tuple[float, float]]:
    """(t, e) with e = (r^2 - 1 + 2t) / r^2."""
    out = []
    for snap in snapshots:
        r2 = sphere_radius_sq(snap)
        out.append((float(snap.t), (r2 - 1 + 2 * snap.t) / r2))
    return out


def embed_snapshot(snapshot, source: str) -> GeneratingCurve:
    if isinstance(snapshot, MetricGrid):
        return embed_metric(snapshot, source=source)
    return embed_lattice(snapshot, source=source)


def embed_all(snapshots, source: str) -> tuple[dict[float, GeneratingCurve], list[dict]]:
    """Embed every snapshot; failures are collected, not raised."""
    curves: dict[float, GeneratingCurve] = {}
    failures = []
    for snap in snapshots:
        try:
            curves[round(float(snap.t), TIME_DIGITS)] = embed_snapshot(snap, source)
        except EmbeddingFailed as exc:
            failures.append({"t": float(snap.t), "message": str(exc)})
    return curves, failures


def common_time_distances(runs: dict[str, dict[float, GeneratingCurve]]) -> dict[float, dict[tuple[str, str], float]]:
    """Pairwise curve distances at every time all runs have an embedding for."""
    names = list(runs)
    times = set.intersection(*(set(runs[k]) for k in names)) if names else set()
    table = {}
    for t in sorted(times):
        table[t] = {(a, b): curve_distance(runs[a][t], runs[b][t]) for a, b in combinations(names, 2)}
    return table


def run_config(config: FlowConfig) -> FlowResult:
    return run_fd(config) if config.method == "fd" else run_flow(config)


# ---------------------------------------------------------------------------
# output files

def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    count = 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            count += 1
    return count


def _snapshot_rows(snapshots):
    for snap in snapshots:
        if isinstance(snap, MetricGrid):
            for i, (r, h, m) in enumerate(zip(snap.rho, snap.h, snap.m)):
                yield (snap.t, i, r, h, m)
        else:
            s = cumulative_arclength(snap)
            for i in range(snap.n_vertices):
                ly = snap.L_y[i] if i < snap.N else None
                yield (snap.t, i, s[i], snap.L_x[i], ly, snap.R[i])


def write_outputs(result: FlowResult, config: FlowConfig, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    is_fd = config.method == "fd"
    inventory = {}
    header = ("t", "i", "rho", "h", "m") if is_fd else ("t", "i", "s", "L_x", "L_y", "R")
    inventory["snapshots.csv"] = _write_csv(out / "snapshots.csv", header, _snapshot_rows(result.snapshots))
    inventory["diagnostics.csv"] = _write_csv(
        out / "diagnostics.csv",
        ("step", "t", "dt", "max_R", "min_L_y", "regridded"),
        ((d.step_index, d.t, d.dt, d.max_R, d.min_L_y, d.regrid_performed) for d in result.diagnostics),
    )
    curves, failures = embed_all(result.snapshots, config.method)
    inventory["embeddings.csv"] = _write_csv(
        out / "embeddings.csv",
        ("t", "i", "x", "y", "source"),
        ((c.t, i, x, y, c.source) for c in curves.values() for i, (x, y) in enumerate(zip(c.x, c.y))),
    )
    if config.c3 == 0 and config.c5 == 0:
        inventory["sphere_error.csv"] = _write_csv(
            out / "sphere_error.csv", ("t", "e"), sphere_error_series(result.snapshots)
        )
    manifest = {
        "config": asdict(config),
        "code_version": __version__,
        "t_start": float(result.snapshots[0].t),
        "t_end": float(result.final.t),
        "steps": len(result.diagnostics),
        "dt_initial": result.dt_initial,
        "termination": result.reason,
        "message": result.message,
        "metadata": result.metadata,
        "embedding_failures": failures,
        "files": inventory,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_embeddings(run_dir: Path) -> dict[float, GeneratingCurve]:
    rows: dict[float, list] = {}
    source = ""
    with (run_dir / "embeddings.csv").open(newline="") as fh:
        for rec in csv.DictReader(fh):
            t = round(float(rec["t"]), TIME_DIGITS)
            rows.setdefault(t, []).append((int(rec["i"]), float(rec["x"]), float(rec["y"])))
            source = rec["source"]
    curves = {}
    for t, pts in rows.items():
        pts.sort()
        arr = np.array([(x, y) for _, x, y in pts])
        curves[t] = GeneratingCurve(arr[:, 0], arr[:, 1], source, t)
    return curves


# ---------------------------------------------------------------------------
# argument handling

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", type=Path, help="key = value file of FlowConfig fields")
    p.add_argument("--n", "--N", dest="N", metavar="N", help="vertex segments (lattice) or grid points (fd)")
    for f in fields(FlowConfig):
        if f.name == "N":
            continue
        names = {"--" + f.name.replace("_", "-"), "--" + f.name}
        p.add_argument(*sorted(names), dest=f.name, metavar="VALUE")


def config_from_args(args: argparse.Namespace) -> FlowConfig:
    values = {}
    if args.config is not None:
        values.update(parse_config_text(args.config.read_text()))
    for f in fields(FlowConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            values[f.name] = coerce(f.name, raw)
    preset = args.preset
    if preset is None and not {"c3", "c5"} <= values.keys():
        raise ConfigError("give --preset or both c3 and c5")
    return build_config(preset, **values)


def cmd_run(args) -> int:
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    result = run_config(config)
    try:
        manifest = write_outputs(result, config, args.out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{config.method}: {manifest['termination']} at t={manifest['t_end']:.6g} "
          f"after {manifest['steps']} steps -> {args.out}")
    if result.failed:
        print(f"numerical failure: {result.message}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sphere_error(args) -> int:
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    result = run_config(config)
    series = sphere_error_series(result.snapshots)
    for t, e in series:
        if args.t_max is None or t <= args.t_max + 1e-12:
            print(f"{fmt(t)},{fmt(e)}")
    return EXIT_NUMERIC if result.failed else EXIT_OK


def _labels(dirs: Sequence[Path]) -> list[str]:
    names = [str(d) for d in dirs]
    return [n if names.count(n) == 1 else f"{n}#{k}" for k, n in enumerate(names)]


def cmd_compare(args) -> int:
    try:
        coarse = {k: read_embeddings(d) for k, d in zip(_labels(args.runs), args.runs)}
        fine = None
        if args.refined:
            fine = {k: read_embeddings(d) for k, d in zip(_labels(args.refined), args.refined)}
    except (OSError, KeyError, ValueError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if fine is not None and len(fine) != len(coarse):
        print("config error: --refined needs one directory per run", file=sys.stderr)
        return EXIT_CONFIG
    table = common_time_distances(coarse)
    if not table:
        print("no overlapping snapshot times", file=sys.stderr)
        return EXIT_CONFIG
    pairs = list(next(iter(table.values())))
    print("t," + ",".join(f"{a}|{b}" for a, b in pairs))
    for t, row in table.items():
        print(fmt(t) + "," + ",".join(fmt(row[p]) for p in pairs))
    for p in pairs:
        print(f"max {p[0]}|{p[1]}: {max(row[p] for row in table.values()):.3e}")
    if fine is not None:
        ftable = common_time_distances(fine)
        latest = sorted(set(table) & set(ftable))
        if not latest:
            print("no common time between the two resolutions", file=sys.stderr)
            return EXIT_CONFIG
        t = latest[-1]
        fpairs = list(ftable[t])
        for p, fp in zip(pairs, fpairs):
            a, b = table[t][p], ftable[t][fp]
            trend = "decreasing" if b < a else "not decreasing"
            print(f"t={t:.6g} {p[0]}|{p[1]}: {a:.3e} -> {b:.3e} ({trend})")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracles import convergence_report

    for line in convergence_report():
        print(line)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slrf", description="Smooth-lattice Ricci flow on axisymmetric 2-spheres")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a flow and write CSV outputs")
    _add_config_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sphere-error", help="print (t, e) for a round-sphere run")
    _add_config_flags(p)
    p.add_argument("--t-max", type=float, default=None)
    p.set_defaults(func=cmd_sphere_error)

    p = sub.add_parser("compare", help="curve distances between runs at common times")
    p.add_argument("runs", nargs="+", type=Path)
    p.add_argument("--refined", nargs="+", type=Path, help="the same runs at doubled resolution")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="print the discretisation-order checks")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
