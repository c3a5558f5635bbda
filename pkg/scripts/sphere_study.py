"""Round-sphere collapse: error e(t) = (r^2 - 1 + 2t)/r^2 for every method.

Usage: python3 scripts/sphere_study.py [--t-max 0.45] [--fine]
"""
import argparse
import time

from slrf.cli import run_config, sphere_error_series
from slrf.config import build_config


def max_error(result, t_max):
    return max(abs(e) for t, e in sphere_error_series(result.snapshots) if t <= t_max + 1e-12)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--t-max", type=float, default=0.45)
    p.add_argument("--fine", action="store_true", help="also run N=200 lattices and n=1601 fd")
    args = p.parse_args()
    cases = [("slrf-v1", "analytic"), ("slrf-v2", "analytic"), ("slrf-v2", "legs")]
    sizes = (100, 200) if args.fine else (100,)
    print(f"{'method':10s} {'seed':9s} {'N':>5s} {'max|e|':>10s} {'secs':>6s}")
    for method, seed in cases:
        errs = []
        for N in sizes:
            cfg = build_config("sphere", method=method, N=N, r_seed=seed,
                               t_end=args.t_max, snapshot_dt=0.005)
            start = time.perf_counter()
            res = run_config(cfg)
            errs.append(max_error(res, args.t_max))
            print(f"{method:10s} {seed:9s} {N:5d} {errs[-1]:10.3e} {time.perf_counter() - start:6.1f}")
        if len(errs) == 2 and errs[1] > 0:
            print(f"{'':26s} ratio {errs[0] / errs[1]:.3f}")
    for n in (801, 1601) if args.fine else (801,):
        cfg = build_config("sphere", method="fd", N=n, t_end=args.t_max, snapshot_dt=0.005)
        start = time.perf_counter()
        res = run_config(cfg)
        print(f"{'fd':10s} {'-':9s} {n:5d} {max_error(res, args.t_max):10.3e} "
              f"{time.perf_counter() - start:6.1f}")


if __name__ == "__main__":
    main()
