"""Run the dumbbell presets to the stop criterion and write run directories.

Usage: python3 scripts/dumbbell_runs.py OUTDIR [--N 100] [--fd-n 801] [--methods slrf-v1 slrf-v2 fd]
"""
import argparse
import json
import time
from pathlib import Path

from slrf.cli import main as slrf


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out", type=Path)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--fd-n", type=int, default=801)
    p.add_argument("--methods", nargs="+", default=["slrf-v1", "slrf-v2"])
    p.add_argument("--presets", nargs="+", default=["single-dumbbell", "double-dumbbell"])
    args = p.parse_args()
    for preset in args.presets:
        for method in args.methods:
            n = args.fd_n if method == "fd" else args.N
            out = args.out / f"{preset}_{method}_{n}"
            start = time.perf_counter()
            code = slrf(["run", "--preset", preset, "--method", method, "--N", str(n), "--out", str(out)])
            m = json.loads((out / "manifest.json").read_text())
            print(f"{preset:16s} {method:8s} N={n:5d} exit={code} {m['termination']:12s} "
                  f"t_end={m['t_end']:.6f} steps={m['steps']} "
                  f"embedding_failures={len(m['embedding_failures'])} "
                  f"{time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
