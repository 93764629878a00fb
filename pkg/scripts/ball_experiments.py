#!/usr/bin/env python3
"""Carnot-Caratheodory ball probes on the moment curve.

Volume sandwich across shrinking anisotropic radii, the doubling containment
along an integral curve, and a greedy Vitali-style cover with its coverage
fraction.

    python scripts/ball_experiments.py [--seed S]
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from torsionlab.ccballs import BallSpec, ball_sample, doubling_check, vitali_cover
from torsionlab.polytope import lambda_table
from torsionlab.scenes import moment_curve_scene

F = Fraction


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    scene = moment_curve_scene(2)
    table = scene.word_table()
    entries = lambda_table(table)
    words = ((1,), (2,), (1, 2))

    print("== volume sandwich: vol(B) / (vol(Q) |lambda|) ==")
    for k in range(5):
        a = F(1, 2 ** k)
        spec = BallSpec(center=(F(0),) * 3, words=words, alpha=(a, a))
        s = ball_sample(table, spec, 4000, seed=args.seed)
        box = float(np.prod([2 * h for h in spec.box_halfwidths()]))
        print(f"  alpha = 1/{2 ** k}: vol = {s.volume_estimate:.3e}  "
              f"ratio = {s.volume_estimate / (box * 2.0):.4f}  "
              f"jac in {s.jac_range}")

    print("== doubling along the first integral curve (c = 1/8) ==")
    for shift in (F(1, 64), F(1, 16), F(1, 4)):
        r = doubling_check(table, entries, [0, 0, 0], [0, 0, shift],
                           words, words, rho=0.5, delta=1.0,
                           n_samples=300, seed=args.seed, c=0.125)
        print(f"  shift = {shift}: verdict = {r['verdict']}  "
              f"pass = {r.get('pass_fraction', float('nan')):.3f}")

    print("== greedy cover of the unit cube neighborhood ==")
    # selection radius is rho/64, so the count saturates at the grid size
    # once the balls drop below the grid spacing
    for rho in (96.0, 48.0, 16.0, 4.0):
        r = vitali_cover(table, entries, [-0.5] * 3, [0.5] * 3,
                         rho=rho, delta=0.5, grid=3, seed=args.seed)
        print(f"  rho = {rho}: #A = {r['count']}  "
              f"covered = {r['covered_fraction']:.2f}")


if __name__ == "__main__":
    main()
