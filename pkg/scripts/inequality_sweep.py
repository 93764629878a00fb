#!/usr/bin/env python3
"""Numeric inequality experiments at desk scale.

Four panels:
  1. uniformity of the strong-type ratio across the perturbed family
     gamma_a(t) = (t, t^2 + a t^3),
  2. restricted weak type ratios across shrinking adapted rectangles,
  3. torsion-band profile for the degenerate cubic (t, t^3),
  4. growth of the truncated 2D counterexample ratio.

    python scripts/inequality_sweep.py [--samples N] [--seed S]
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from torsionlab.scenes import Box, Scene, curve_maps, moment_curve_scene
from torsionlab.torsion import torsion_profile
from torsionlab.verify import (
    BoxUnion,
    StepFunction,
    counterexample_2d,
    perturbation_ratios,
    rwt_ratio,
    scale_profile,
)

F = Fraction


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print("== uniformity across gamma_a(t) = (t, t^2 + a t^3) ==")
    probe = perturbation_ratios(["0", "1/4", "-1/4", "1", "-1"],
                                n_samples=args.samples, seed=args.seed)
    for row in probe["rows"]:
        print(f"  a = {row['a']:>4}: ratio = {row['ratio']:.5f}")
    print(f"  max/min = {probe['max_over_min']:.3f}")

    print("== restricted weak type across dyadic rectangle scales ==")
    scene = moment_curve_scene(2)
    prof = torsion_profile(scene.word_table(), scene.beta)
    dom = Box((F(0),) * 3, (F(1),) * 3)
    for k in range(4):
        s = F(1, 2 ** k)
        e = BoxUnion((Box((F(0), F(0)), (s, s * s)),))
        r = rwt_ratio(e, e, prof, scene.pi1, scene.pi2, dom, band=None,
                      n_samples=args.samples, seed=args.seed)
        print(f"  scale 1/{2 ** k}: |Omega| = {r['estimate']:.3e}  "
              f"ratio = {r['ratio']:.4f}")

    print("== torsion bands for gamma(t) = (t, t^3) ==")
    pi1, pi2 = curve_maps([[0, 1], [0, 0, 0, 1]])
    cubic = Scene(pi1=pi1, pi2=pi2, beta=(0, 1, 0), cap=6)
    prof3 = torsion_profile(cubic.word_table(), cubic.beta)
    f = StepFunction.indicator_box(Box((F(-2), F(-2)), (F(2), F(2))))
    sp = scale_profile(f, f, prof3, pi1, pi2, Box((F(-1),) * 3, (F(1),) * 3),
                       range(-8, 3), n_samples=args.samples, seed=args.seed)
    for row in sp["bands"]:
        if row["B_m"] > 0:
            print(f"  m = {row['m']:+d}: B_m = {row['B_m']:.4f}")
    print(f"  sum = {sp['sum']:.4f}; theta-sum = {sp['theta_sum']:.4f} "
          f"(theta = {sp['theta']:.3f}, bands = {sp['nonzero_bands']})")

    print("== truncated 2D counterexample growth (k = 2) ==")
    ce = counterexample_2d(2)
    for row in ce["rows"][::5] + [ce["rows"][-1]]:
        print(f"  delta = {row['delta']:>10}: ratio = {row['ratio']:.4f}")
    print(f"  strictly increasing: {ce['strictly_increasing']}; "
          f"growth x{ce['growth_factor']:.2f}")


if __name__ == "__main__":
    main()
