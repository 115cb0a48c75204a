"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--N 1000] [--repeat 5]

Both backends run on identical inputs, and their outputs are checked for
equality before the timings are printed.
"""

import argparse
import timeit

import numpy as np

from hglfr._kernels import _pykernels
from hglfr.config import BENCHMARK_GENERATOR
from hglfr.sampling import GeneratorParams
from hglfr.wiring import generate

try:
    from hglfr._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def inputs(N, seed):
    gen = dict(BENCHMARK_GENERATOR, N=N, k_max=min(BENCHMARK_GENERATOR["k_max"], N - 1))
    net = generate(GeneratorParams(**gen, mode="LFR", mu=0.3), None, np.random.default_rng(seed))
    indptr, indices = net.graph.csr
    rng = np.random.default_rng(seed + 1)
    return {
        "indptr": indptr.astype(np.int64),
        "indices": indices.astype(np.int64),
        "weights": np.ones(indices.size),
        "strength": net.graph.degrees.astype(np.float64),
        "order": rng.permutation(N).astype(np.int64),
        "u": rng.random(N),
        "m2": 2.0 * net.graph.m,
        "N": N,
    }


def run_local_moves(mod, x):
    comm = np.arange(x["N"], dtype=np.int64)
    mod.local_moves(x["indptr"], x["indices"], x["weights"], x["strength"], comm, x["order"], 1.0, x["m2"])
    return comm


def run_lp(mod, x):
    labels = np.arange(x["N"], dtype=np.int64)
    for _ in range(5):
        mod.lp_sweep(x["indptr"], x["indices"], labels, x["order"], x["u"])
    mod.lp_stable(x["indptr"], x["indices"], labels)
    return labels


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled kernels are not built; run 'pip install -e . --no-build-isolation' first")
    x = inputs(args.N, args.seed)
    print(f"N={args.N} m={int(x['m2'] // 2)} repeat={args.repeat}")
    print(f"{'kernel':<14}{'python (ms)':>14}{'cython (ms)':>14}{'speed-up':>10}")
    for name, fn in (("local_moves", run_local_moves), ("lp_sweep x5", run_lp)):
        assert np.array_equal(fn(_pykernels, x), fn(_ckernels, x)), f"{name}: backends disagree"
        t_py = min(timeit.repeat(lambda: fn(_pykernels, x), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn(_ckernels, x), number=1, repeat=args.repeat))
        print(f"{name:<14}{t_py * 1e3:>14.2f}{t_cy * 1e3:>14.3f}{t_py / t_cy:>9.0f}x")


if __name__ == "__main__":
    main()
