"""Timing of the dense eigensolver backends on band-structure Hamiltonians.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--M 2 3 4]
"""
import argparse
import math
import time

import numpy as np

from paraxial_bands import (
    CavitySpec,
    KPoint,
    MirrorPattern,
    PotentialModel,
    SquareLattice,
    _kernels,
    assemble,
    build_gbasis,
)


def hamiltonian(M):
    model = PotentialModel(
        CavitySpec(3.5, 0.266, 0.96), SquareLattice(5.0, 0.5), MirrorPattern(math.log(0.999), 0.01 + 0.01j)
    )
    return assemble(model, build_gbasis(model.lattice, M), KPoint(0.3, 0.17)).entries


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--M", type=int, nargs="+", default=[2, 3, 4])
    args = ap.parse_args()

    backends = dict(_kernels.available())
    backends["lapack"] = lambda A, _: np.linalg.eig(A)
    print(f"selected kernel: {_kernels.KERNEL}")
    print(f"{'M':>3} {'dim':>5} " + " ".join(f"{name + ' [ms]':>16}" for name in backends) + f" {'python/compiled':>16}")
    for M in args.M:
        A = hamiltonian(M)
        t = {name: best_of(lambda f=f: f(A, None), args.repeat) for name, f in backends.items()}
        ratio = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        print(f"{M:>3} {A.shape[0]:>5} " + " ".join(f"{1e3 * v:>16.3f}" for v in t.values()) + f" {ratio:>16.1f}")


if __name__ == "__main__":
    main()
