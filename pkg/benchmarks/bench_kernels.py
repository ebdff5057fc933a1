"""Compare the compiled and pure-Python term kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--p P]

Micro benchmarks call both kernel modules directly on identical inputs and
check the outputs agree.  The end-to-end row runs ``degenerate`` in a
subprocess once per backend, selected with WITTDEGEN_PURE_PYTHON.
"""

import argparse
import os
import random
import subprocess
import sys
import time

from wittdegen import _kernels_py as py_k

try:
    from wittdegen import _kernels_c as c_k
except ImportError:
    c_k = None


def random_terms(rng, p, nvars, nterms, max_exp):
    return {tuple([rng.randint(-2, 4)] + [rng.randint(0, max_exp) for _ in range(nvars)]):
            rng.randint(1, p - 1) for _ in range(nterms)}


def witt_rules(p, nvars):
    # x_i^p -> x_i + x_{i-1}^(p-1) + pi, a triangular system in slots 1..nvars
    rules = []
    for slot in range(1, nvars + 1):
        rhs = {tuple(1 if j == slot else 0 for j in range(nvars + 1)): 1,
               tuple([1] + [0] * nvars): 1}
        if slot > 1:
            rhs[tuple(p - 1 if j == slot - 1 else 0 for j in range(nvars + 1))] = 1
        rules.append((slot, rhs))
    return tuple(reversed(rules))


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--p", type=int, default=7)
    args = ap.parse_args()
    p = args.p
    rng = random.Random(1)
    a = random_terms(rng, p, 4, 300, 2 * p)
    b = random_terms(rng, p, 4, 300, 2 * p)
    rules = witt_rules(p, 4)

    cases = {
        "mul_terms 300x300": lambda k: k.mul_terms(a, b, p),
        "add_terms 300+300": lambda k: k.add_terms(a, b, p),
        "reduce_terms (fresh cache)": lambda k: k.reduce_terms(a, rules, p, {}),
    }
    print(f"{'kernel':28s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases.items():
        tp, outp = timeit(lambda: fn(py_k), args.repeat)
        if c_k is None:
            print(f"{name:28s} {tp * 1e3:12.2f} {'n/a':>12s}")
            continue
        tc, outc = timeit(lambda: fn(c_k), args.repeat)
        if outp != outc:
            sys.exit(f"backends disagree on {name}")
        print(f"{name:28s} {tp * 1e3:12.2f} {tc * 1e3:12.2f} {tp / tc:7.1f}x")

    cmd = [sys.executable, "-m", "wittdegen", "degenerate", "--p", str(p), "--m1", str(-p * p),
           "--m2", "0", "--format", "json"]
    rows = {}
    for label, env_val in (("python", "1"), ("cython", "0")):
        env = dict(os.environ, WITTDEGEN_PURE_PYTHON=env_val)
        t = time.perf_counter()
        res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        rows[label] = (time.perf_counter() - t, res.stdout)
    if rows["python"][1] != rows["cython"][1]:
        sys.exit("backends produce different degenerate reports")
    tp, tc = rows["python"][0], rows["cython"][0]
    print(f"{'degenerate p=%d regime B' % p:28s} {tp * 1e3:12.0f} {tc * 1e3:12.0f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
