#!/usr/bin/env python3
"""Grow one layer of tangent spheres and narrate every exploration step.

Each step picks a Poisson point in the step region of the chosen lattice
vertex, radius-matches it to touch its parent sphere, and keeps it only if
its isolation ball holds no other point.  The run ends when the growth
rules find no admissible vertex, the lattice rim interferes, or the step
budget runs out.
"""

import argparse
import math

from hardspheres import bounds
from hardspheres.construction import (
    ConstructionParams,
    assemble_gamma,
    cluster_components,
    run_layer,
    verify_hard_sphere,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=31)
    ap.add_argument("--lam", type=float, default=None,
                    help="Poisson intensity (default: 12 * lambda*(dim))")
    ap.add_argument("--cells-C", type=float, default=16.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--max-steps", type=int, default=200)
    args = ap.parse_args()

    lam = args.lam
    if lam is None:
        star = bounds.lambda_star(args.dim)
        if star is None:
            ap.error(f"no lambda* at d={args.dim}; give --lam explicitly")
        lam = 12.0 * star
    params = ConstructionParams(
        d=args.dim, C=args.cells_C, lam=lam, max_steps=args.max_steps
    )
    state, spheres = run_layer(params, args.seed)

    by_vertex = {s.vertex: s for s in spheres}
    print(f"d={args.dim}, lambda={lam:.6g}, C={args.cells_C:g}, "
          f"seed={args.seed}")
    for e in state.log:
        bits = [f"step {e.step:>3}", f"{e.kind:>4} {e.vertex:>5}",
                f"{e.rule:>7}", f"{e.case:>14}", f"[{e.mode}]"]
        if e.outcome == "good":
            s = by_vertex[e.vertex]
            tang = ""
            if s.parent is not None:
                p = by_vertex[s.parent]
                gap = math.dist(s.center, p.center) - s.radius - p.radius
                tang = f" tangency residual {abs(gap):.2e}"
            bits.append(f"radius {e.radius:.6f}{tang}")
        print("  ".join(bits))
    print(f"stop: {state.stopped_reason}")

    gamma = assemble_gamma(params, [state])
    report = verify_hard_sphere(gamma)
    clusters = cluster_components(gamma)
    print(f"{len(gamma.constructed)} constructed spheres, "
          f"{len(gamma.leftovers)} leftover points, "
          f"{gamma.n_stream_leftovers} stream-only leftovers")
    print(f"hard-sphere check: {'pass' if report.passed else 'FAIL'} "
          f"({report.n_pairs_checked} close pairs)")
    if clusters:
        c = clusters[0]
        print(f"largest tangency cluster: {c.size} spheres "
              f"({c.n_constructed} constructed) within radius "
              f"{c.bounding_radius:.3f}")


if __name__ == "__main__":
    main()
