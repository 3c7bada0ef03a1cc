"""Time the compiled kernels against the pure-Python fallback.

Both backends run the same inputs on a PEG graph; outputs are compared
before timing so a speedup never hides a disagreement.

    python benchmarks/bench_kernels.py --n-var 256 --repeat 5
"""

import argparse
import time

import numpy as np

from pegemd import _pykernels, kernels
from pegemd.graph import LAMBDA_DE8
from pegemd.peg import MetricPipeline, peg_construct


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(graph, rng, frames):
    arrays = graph.arrays
    n = graph.n_var
    erased = (rng.random((frames, n)) < 0.35).astype(np.uint8)
    llr = rng.normal(2.0, 2.0, (frames, n))
    return {
        "bfs (all roots)": lambda k: [k.bfs(*arrays, v, False, -1, -1, -1) for v in range(n)],
        f"peel ({frames} frames)": lambda k: [k.peel(*arrays, e) for e in erased],
        f"spa ({frames} frames, 20 it)": lambda k: k.spa(*arrays, llr, 20, False, 30.0, False),
        "count_cycles (<= 8)": lambda k: k.count_cycles(*arrays, 8),
    }


def agree(a, b):
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(agree(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.allclose(a, b, atol=1e-9) if a.dtype.kind == "f" else np.array_equal(a, b)
    return a == b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-var", type=int, default=256)
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if kernels.compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e .` first")
    g, _ = peg_construct(args.n_var, args.n_var // 2, LAMBDA_DE8, MetricPipeline.named("peg", args.seed))
    rng = np.random.default_rng(args.seed)
    print(f"graph N={g.n_var} M={g.n_chk} E={g.n_edges}")
    print(f"{'kernel':32s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, fn in cases(g, rng, args.frames).items():
        if not agree(fn(kernels.compiled), fn(_pykernels)):
            raise SystemExit(f"{name}: backends disagree")
        tc = best_of(lambda: fn(kernels.compiled), args.repeat)
        tp = best_of(lambda: fn(_pykernels), args.repeat)
        print(f"{name:32s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
