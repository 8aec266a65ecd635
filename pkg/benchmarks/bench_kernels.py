"""Compare the compiled and the numpy implementations of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the Hankel table for a 2N x 2N circulant embedding and the dense
Nystrom assembly for a Gaussian support, and checks that both backends agree.
"""

import argparse
import timeit

import numpy as np

from nvscatter import _pykernels
from nvscatter.grid import make_grid
from nvscatter.potentials import gaussian, sample_potential
from nvscatter.scattering import green_table

try:
    from nvscatter import _ckernels
except ImportError:
    _ckernels = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"{'kernel':<28}{'size':>10}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for N in (128, 256, 512):
        g = make_grid(20.0, N)
        d = np.arange(2 * N)
        d = np.where(d < N, d, d - 2 * N)
        z = g.h * np.hypot(d[:, None], d[None, :]).ravel()
        z[0] = g.h
        times = {name: best(lambda m=m: m.hankel1_0(z), args.repeat) for name, m in backends.items()}
        if len(backends) == 2:
            assert np.allclose(_ckernels.hankel1_0(z), _pykernels.hankel1_0(z), rtol=1e-13, atol=0)
        _row("hankel1_0", z.size, times)

    for N, A in ((96, 0.2), (128, 0.2)):
        g = make_grid(20.0, N)
        v = sample_potential(gaussian(A), g).values
        mask = np.abs(v) > 1e-12 * A
        i1, i2 = (a.astype(np.intp) for a in np.nonzero(mask))
        w = (v[mask] * g.h**2).astype(complex)
        idx = np.arange(-(N - 1), N) % (2 * N)
        table = np.ascontiguousarray(green_table(g, 1.0)[np.ix_(idx, idx)])
        times = {name: best(lambda m=m: m.assemble_system(table, i1, i2, w, N - 1), max(1, args.repeat // 2))
                 for name, m in backends.items()}
        if len(backends) == 2:
            a = _ckernels.assemble_system(table, i1, i2, w, N - 1)
            b = _pykernels.assemble_system(table, i1, i2, w, N - 1)
            assert np.array_equal(a, b)
        _row("assemble_system", f"{len(w)}^2", times)


def _row(name, size, times):
    line = f"{name:<28}{str(size):>10}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
    if len(times) == 2:
        line += f"{times['python'] / times['cython']:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()
