"""Convergence of the Fourier-basis trace sum to the spectral trace.

Prints the partial sum over the first K modes and its gap to the target (1 for maps
above the diagonal, 1/2 for the identity) for K = 25, 50, 100, ...
"""

import argparse

from vphi.phi_map import parse_map
from vphi.traces import fourier_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", default="power:alpha=0.5")
    ap.add_argument("--modes", type=int, default=800)
    ap.add_argument("--target", type=float, default=1.0)
    ap.add_argument("--grid", type=int, default=8192)
    args = ap.parse_args()

    ft = fourier_trace(parse_map(args.map), args.modes, args.grid)
    if ft.under_resolved:
        print("# grid too coarse for the highest modes; raise --grid")
    k, prev = 25, None
    print(f"{'modes':>6}  {'partial sum':>14}  {'gap':>10}  ratio")
    while k <= args.modes:
        gap = abs(ft.partial_sums[k] - args.target)
        ratio = "" if prev is None else f"{prev / gap:.2f}"
        print(f"{k:>6}  {ft.partial_sums[k]:14.10f}  {gap:10.3e}  {ratio}")
        prev, k = gap, 2 * k


if __name__ == "__main__":
    main()
