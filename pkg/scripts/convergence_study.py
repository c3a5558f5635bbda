"""Single-dumbbell cross-method comparison under refinement.

Runs slrf-v1, slrf-v2 and fd at a coarse level (N=100, n=801) and a fine
level (N=200, n=1201), then reports pairwise generating-curve distances at
every snapshot time where all runs of a level embed, and the trend at the
latest time common to both levels. The fine level takes about ten minutes.

Usage: python3 scripts/convergence_study.py OUTDIR
"""
import argparse
import time
from pathlib import Path

from slrf.cli import main as slrf
from slrf.cli import common_time_distances, read_embeddings

LEVELS = {"coarse": (100, 801), "fine": (200, 1201)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out", type=Path)
    p.add_argument("--reuse", action="store_true", help="skip runs whose directory already exists")
    args = p.parse_args()
    tables = {}
    for level, (n_lat, n_fd) in LEVELS.items():
        curves = {}
        for method, n in (("slrf-v1", n_lat), ("slrf-v2", n_lat), ("fd", n_fd)):
            run_dir = args.out / f"sd_{method}_{n}"
            if not (args.reuse and (run_dir / "manifest.json").exists()):
                start = time.perf_counter()
                code = slrf(["run", "--preset", "single-dumbbell", "--method", method,
                             "--N", str(n), "--out", str(run_dir)])
                print(f"{method} n={n} exit={code} {time.perf_counter() - start:.1f}s")
            curves[method] = read_embeddings(run_dir)
        tables[level] = common_time_distances(curves)
        print(f"\n{level} level: distances at common embeddable times")
        for t, row in tables[level].items():
            print(f"  t={t:.5f} " + " ".join(f"{a}/{b}={d:.3e}" for (a, b), d in row.items()))
    common = sorted(set(tables["coarse"]) & set(tables["fine"]))
    if not common:
        print("\nno common embeddable time")
        return
    t = common[-1]
    print(f"\nlatest common time t={t:.5f}")
    for pair, d in tables["coarse"][t].items():
        f = tables["fine"][t][pair]
        print(f"  {pair[0]}/{pair[1]}: {d:.3e} -> {f:.3e} ratio {d / f:.2f} "
              f"{'decreasing' if f < d else 'NOT decreasing'}")


if __name__ == "__main__":
    main()
