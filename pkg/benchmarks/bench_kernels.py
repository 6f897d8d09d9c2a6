#!/usr/bin/env python3
"""Timing comparison of the compiled and pure kernel backends.

Runs the two hot paths on identical inputs through skylane._corekern and
skylane._purekern and prints median wall times plus the speedup.  Both
backends must return bit-identical results; the script asserts that before
it reports anything.

Usage:
    python benchmarks/bench_kernels.py [--points 60000] [--boxes 48]
                                       [--models 12] [--repeats 5]
"""

import argparse
import statistics
import sys
import time

import numpy as np

from skylane import _purekern, ilp

try:
    from skylane import _corekern
except ImportError:
    _corekern = None


def make_walls_input(rng, num_points, num_boxes):
    """One elevated origin, a slab of target points, random axis boxes."""
    origin = np.array([5.0, 5.0, 22.0])
    targets = np.column_stack(
        [
            rng.uniform(0.0, 480.0, num_points),
            rng.uniform(0.0, 480.0, num_points),
            rng.uniform(55.0, 65.0, num_points),
        ]
    )
    lo = np.column_stack(
        [
            rng.uniform(0.0, 440.0, num_boxes),
            rng.uniform(0.0, 440.0, num_boxes),
            np.zeros(num_boxes),
        ]
    )
    size = np.column_stack(
        [
            rng.uniform(8.0, 40.0, num_boxes),
            rng.uniform(8.0, 40.0, num_boxes),
            rng.uniform(10.0, 70.0, num_boxes),
        ]
    )
    boxes = np.hstack([lo, lo + size])
    return origin, targets, boxes


def make_models(rng, count):
    """Random dense-ish 0-1 programs shaped like the planner's corridor rows."""
    out = []
    for _ in range(count):
        n = int(rng.integers(16, 21))
        model = ilp.IlpModel(f"bench{n}")
        for i in range(n):
            model.add_binary(f"x{i}")
        for _ in range(max(3, n // 2)):
            support = rng.choice(n, size=int(rng.integers(2, 7)), replace=False)
            coefs = rng.integers(-4, 5, size=support.size)
            coefs[coefs == 0] = 1
            sense = "<=" if rng.random() < 0.7 else ">="
            rhs = int(rng.integers(-1, 6)) if sense == "<=" else int(rng.integers(-2, 3))
            model.add_constraint(
                {int(j): float(c) for j, c in zip(support, coefs)}, sense, float(rhs)
            )
        c = rng.integers(-3, 4, size=n)
        model.set_objective({i: float(c[i]) for i in range(n) if c[i]})
        out.append(ilp._compile(model))
    return out


def run_walls(impl, args):
    origin, targets, boxes = args
    return impl.segment_walls(origin, targets, boxes)


def run_bnb(impl, compiled):
    results = []
    for arrays in compiled:
        results.append(impl.bnb_search(*arrays, np.int64(2_000_000), False))
    return results


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=60_000)
    parser.add_argument("--boxes", type=int, default=48)
    parser.add_argument("--models", type=int, default=24)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=11)
    opts = parser.parse_args(argv)

    if _corekern is None:
        print("compiled backend not importable; showing pure timings only")

    rng = np.random.default_rng(opts.seed)
    walls_args = make_walls_input(rng, opts.points, opts.boxes)
    compiled_models = make_models(rng, opts.models)

    workloads = [
        (
            f"segment_walls ({opts.points} pts x {opts.boxes} boxes)",
            lambda impl: run_walls(impl, walls_args),
        ),
        (
            f"bnb_search ({opts.models} models, n 16..20)",
            lambda impl: run_bnb(impl, compiled_models),
        ),
    ]

    print(f"{'workload':<44} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for label, fn in workloads:
        pure_out = fn(_purekern)
        if _corekern is not None:
            core_out = fn(_corekern)
            flat_p = pure_out if isinstance(pure_out, list) else [pure_out]
            flat_c = core_out if isinstance(core_out, list) else [core_out]
            for p, c in zip(flat_p, flat_c):
                for a, b in zip(p, c):
                    if a is None or b is None:
                        assert a is None and b is None, "backend results differ"
                    else:
                        assert np.array_equal(np.asarray(a), np.asarray(b)), (
                            "backend results differ"
                        )
        t_pure = median_time(lambda: fn(_purekern), opts.repeats)
        if _corekern is None:
            print(f"{label:<44} {t_pure * 1e3:>8.1f}ms {'-':>10} {'-':>8}")
            continue
        t_core = median_time(lambda: fn(_corekern), opts.repeats)
        print(
            f"{label:<44} {t_pure * 1e3:>8.1f}ms {t_core * 1e3:>8.1f}ms "
            f"{t_pure / t_core:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
