"""Compare the compiled and pure-Python convolution kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first table times ``int_convolve`` directly on random integer vectors of
several sizes and bit widths.  The second runs a representative workload
(phi_m by three methods) in subprocesses with and without QKZ_PURE_PYTHON.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from qkz.kernels import compiled_convolve, python_convolve

WORKLOAD = (
    "from qkz.phi import phi_ode, phi_residue, phi_partition\n"
    "for m in range(1, 9):\n"
    "    assert phi_ode(m, 12) == phi_residue(m, 12) == phi_partition(m, 12)\n"
)


def _vectors(n, bits, rng):
    lim = 1 << bits
    return [rng.randrange(-lim, lim) for _ in range(n)], [rng.randrange(-lim, lim) for _ in range(n)]


def bench_direct(repeat):
    rng = random.Random(20240101)
    print(f"{'n':>6} {'bits':>5} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}")
    for n in (16, 64, 256, 1024):
        for bits in (8, 24, 200):
            a, b = _vectors(n, bits, rng)
            if compiled_convolve is not None and compiled_convolve(a, b) != python_convolve(a, b):
                raise SystemExit("backends disagree")
            number = max(1, 2000 // n)
            tp = min(timeit.repeat(lambda: python_convolve(a, b), number=number, repeat=repeat)) / number
            if compiled_convolve is None:
                print(f"{n:>6} {bits:>5} {tp * 1e3:>12.4f} {'n/a':>14} {'':>8}")
                continue
            tc = min(timeit.repeat(lambda: compiled_convolve(a, b), number=number, repeat=repeat)) / number
            print(f"{n:>6} {bits:>5} {tp * 1e3:>12.4f} {tc * 1e3:>14.4f} {tp / tc:>8.2f}")


def bench_workload():
    def run(pure):
        env = dict(os.environ)
        env.pop("QKZ_PURE_PYTHON", None)
        if pure:
            env["QKZ_PURE_PYTHON"] = "1"
        code = "import time; t = time.perf_counter()\n" + WORKLOAD + "print(time.perf_counter() - t)"
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        return float(out.stdout.strip())

    tp = run(True)
    tc = run(False)
    print(f"\nphi_m three-way check, m <= 8, q^12: python {tp:.2f} s, default backend {tc:.2f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-workload", action="store_true")
    args = p.parse_args()
    if compiled_convolve is None:
        print("compiled extension not built; only the fallback is timed")
    bench_direct(args.repeat)
    if not args.skip_workload:
        bench_workload()


if __name__ == "__main__":
    main()
