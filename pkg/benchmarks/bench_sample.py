"""Benchmark the drawing kernels: numba JIT vs the pure-numpy fallback.

Usage: python benchmarks/bench_sample.py [-n RECORDS] [--seed SEED]
"""

import argparse
import time

from belnet import build_network_cpts, generate, parse_network
from belnet.kernels import HAVE_NUMBA

CHAIN = """
net bench_chain4
var X1 : a b
var X2 : a b
var X3 : a b
var X4 : a b
edge X1 -> X2
edge X2 -> X3
edge X3 -> X4
table X1 | kind=m
  {a} : 0.4
  {b} : 0.4
  {a,b} : 0.2
end
"""
COND = """table {child} | {parent} kind=m
  {{a}} | {{a}} : 0.16666666666666666
  {{b}} | {{a}} : -0.08333333333333333
  {{a,b}} | {{a}} : -0.08333333333333333
  {{a}} | {{b}} : -0.08333333333333333
  {{b}} | {{b}} : 0.16666666666666666
  {{a,b}} | {{b}} : -0.08333333333333333
  {{a}} | {{a,b}} : 0.35
  {{b}} | {{a,b}} : 0.35
  {{a,b}} | {{a,b}} : 0.3
end
"""


def bench(net, cpts, n, seed, backend, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        generate(net, n, seed=seed, cpts=cpts, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    text = CHAIN + "".join(
        COND.format(child=c, parent=p) for c, p in (("X2", "X1"), ("X3", "X2"), ("X4", "X3"))
    )
    net = parse_network(text)
    cpts = build_network_cpts(net)

    print(f"{args.n} records, 4-node chain, seed {args.seed}")
    t_np = bench(net, cpts, args.n, args.seed, "numpy")
    print(f"numpy : {t_np:8.3f} s   {args.n / t_np / 1e6:6.2f} M records/s")
    if HAVE_NUMBA:
        generate(net, 64, seed=0, cpts=cpts, backend="numba")  # compile
        t_nb = bench(net, cpts, args.n, args.seed, "numba")
        print(f"numba : {t_nb:8.3f} s   {args.n / t_nb / 1e6:6.2f} M records/s")
        print(f"speedup: {t_np / t_nb:.2f}x")
    else:
        print("numba : unavailable")


if __name__ == "__main__":
    main()
