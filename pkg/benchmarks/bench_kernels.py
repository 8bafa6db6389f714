"""Compare the compiled and pure-Python polynomial kernels.

Two measurements:

* kernel micro-benchmarks (``pmul``, ``preduce``, ``pdiv_exact``) on
  polynomials shaped like the ones the normal form builds;
* end-to-end: the symbolic checks of the identity suite on every built-in
  chart (the numeric finite-difference check is left out, it never touches
  the kernels), run in a fresh interpreter per backend so no cache is shared.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--skip-e2e]
"""
from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from fieldcalc.symkernel import _kernels_py, backend

BITS = _kernels_py.BITS
GUARD = sum(1 << (i * BITS + BITS - 1) for i in range(8))


def random_poly(rng: random.Random, terms: int, atoms: int = 8, maxdeg: int = 3) -> dict:
    p = {}
    while len(p) < terms:
        m = sum(rng.randint(0, maxdeg) << (i * BITS) for i in range(atoms))
        p[m] = rng.choice([-3, -2, -1, 1, 2, 3])
    return p


def micro(repeat: int) -> list[tuple[str, dict[str, float]]]:
    rng = random.Random(0)
    a, b = random_poly(rng, 40), random_poly(rng, 40)
    ab = _kernels_py.pmul(a, b)
    # sin^2 -> 1 - cos^2 on atoms 0/1 and 2/3, as in the normal form
    rules = [(0, {0: 1, 2 << BITS: -1}), (2 * BITS, {0: 1, 2 << (3 * BITS): -1})]
    cases = {
        "pmul 40x40": lambda k: k.pmul(a, b),
        "preduce": lambda k: k.preduce(ab, rules),
        "pdiv_exact": lambda k: k.pdiv_exact(ab, b, GUARD),
    }
    out = []
    for label, fn in cases.items():
        row = {}
        for name, mod in backend.available().items():
            n = max(1, repeat)
            row[name] = min(timeit.repeat(lambda: fn(mod), number=n, repeat=5)) / n
        out.append((label, row))
    return out


E2E = (
    "import time; t=time.perf_counter();"
    "from fieldcalc.builtin_charts import builtin_chart;"
    "from fieldcalc import verify;"
    "checks=[c for c in verify.CHECKS if c is not verify.check_finite_differences];"
    "charts=[builtin_chart(n) for n in "
    "('cartesian','cylinder','sphere','toroidal','shifted-cylinder')];"
    "charts.append(builtin_chart('shifted-cylinder').with_parameters({'alpha':'pi/3'}));"
    "[c(ch, 0) for ch in charts for c in checks];"
    "print(time.perf_counter()-t)"
)


def end_to_end() -> dict[str, float]:
    out = {}
    for name, pure in (("compiled", "0"), ("python", "1")):
        if name == "compiled" and "compiled" not in backend.available():
            continue
        env = dict(os.environ, FIELDCALC_PURE=pure)
        runs = []
        for _ in range(3):
            proc = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True,
                                  text=True, check=True)
            runs.append(float(proc.stdout.strip()))
        out[name] = min(runs)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()

    print(f"selected backend: {backend.NAME}")
    print(f"{'kernel':<14}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for label, row in micro(args.repeat):
        py, co = row.get("python"), row.get("compiled")
        sp = f"{py / co:.2f}x" if co else "n/a"
        print(f"{label:<14}{py * 1e6:>10.1f}us{(co or 0) * 1e6:>10.1f}us{sp:>10}")
    if not args.skip_e2e:
        e2e = end_to_end()
        print("\nsymbolic identity checks, all built-ins (best of 3, fresh process):")
        for name, t in e2e.items():
            print(f"  {name:<9} {t:.3f} s")
        if len(e2e) == 2:
            print(f"  speedup   {e2e['python'] / e2e['compiled']:.2f}x")


if __name__ == "__main__":
    main()
