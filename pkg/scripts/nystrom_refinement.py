"""Nystrom refinement study: top eigenvalues of the midpoint discretisation as m doubles.

For a map given in the CLI syntax (default the square root), prints the top eigenvalues
for each m and the largest change from the previous m scaled by m; a bounded scaled
change is the C/m behaviour expected for smooth strictly increasing maps.
"""

import argparse

import numpy as np

from vphi.nystrom import build, eigs, parse_kernel
from vphi.phi_map import parse_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", default="power:alpha=0.5", help="map or raw:<expr> kernel")
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--count", type=int, default=4)
    args = ap.parse_args()

    target = parse_kernel(args.map) if args.map.startswith("raw:") else parse_map(args.map)
    prev = None
    print(f"{'m':>6}  " + "  ".join(f"lam_{k + 1:<10d}" for k in range(args.count)) + "  m*max|change|")
    for m in args.sizes:
        ev = eigs(build(target, m), args.count)
        row = "  ".join(f"{v.real:+.9f}" for v in ev)
        change = "" if prev is None else f"{m * np.max(np.abs(ev - prev)):.4f}"
        print(f"{m:>6}  {row}  {change}")
        prev = ev


if __name__ == "__main__":
    main()
