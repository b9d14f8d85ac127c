"""Time the compiled and numpy kernels on problem sizes the densities actually use.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, size, backend) with the best wall time and the
max deviation from the numpy result.
"""
import argparse
import time

import numpy as np

from propertime import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    # fourier_sum: (n_freq, n_nodes, n_rows) as in time_density / position_amplitudes
    for nf, nj, nb in ((4001, 600, 1), (1201, 192, 64), (6001, 2000, 13)):
        x = np.sort(rng.uniform(-1.5, 1.5, nj))
        c = rng.normal(size=(nb, nj)) + 1j * rng.normal(size=(nb, nj))
        f = np.linspace(-200, 200, nf)
        yield f"fourier_sum {nf}x{nj}x{nb}", lambda f=f, x=x, c=c: kernels.fourier_sum(f, x, c)
    # cosine_transform: Mehler-Dirichlet quadrature, (n_lambda, n_x, n_nodes)
    for nl, nx, nk in ((64, 96, 128), (161, 400, 256)):
        lam = np.linspace(0, 8, nl)
        ang = rng.uniform(0, 5, (nx, nk))
        amp = rng.normal(size=(nx, nk))
        yield f"cosine_transform {nl}x{nx}x{nk}", lambda lam=lam, ang=ang, amp=amp: kernels.cosine_transform(lam, ang, amp)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    for name, fn in cases(rng):
        results = {}
        for b in backends:
            prev = kernels.use_backend(b)
            try:
                results[b] = best_of(fn, args.repeat)
            finally:
                kernels.use_backend(prev)
        ref = results["python"][1]
        for b, (t, out) in results.items():
            dev = np.max(np.abs(out - ref)) / max(np.max(np.abs(ref)), 1e-300)
            speed = results["python"][0] / t
            print(f"{name:34s} {b:9s} {t * 1e3:9.2f} ms  x{speed:5.2f}  rel dev {dev:.1e}")


if __name__ == "__main__":
    main()
