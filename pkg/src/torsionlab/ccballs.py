"""Carnot-Caratheodory ball sampling, doubling checks, and greedy covers.

A ball B^I(x; alpha) is the image of the anisotropic box

    Q^I_alpha = { |t_i| < alpha1^(d1_i) * alpha2^(d2_i) },  (d1,d2) = deg w_i,

under the composed flow Phi^I_x.  Everything here is a numeric probe: volumes
come from quasi-Monte-Carlo sampling, membership from damped Newton preimage
solves, and the outputs are reports with recorded constants rather than
assertions against constants nobody can compute.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Word, WordTable, word_degree
from .numeric import JacobianEvaluator, MapEvaluator, newton_preimage
from .polytope import LambdaEntry
from .sampling import halton
from .torsion import IterFlowMap, iter_flow


@dataclass(frozen=True)
class BallSpec:
    """Center, word tuple, and anisotropic radius pair of one ball."""

    center: tuple[Fraction, ...]
    words: tuple[Word, ...]
    alpha: tuple[Fraction, Fraction]

    def __post_init__(self):
        if self.alpha[0] <= 0 or self.alpha[1] <= 0:
            raise ValueError("alpha components must be positive")

    def box_halfwidths(self) -> list[float]:
        a1, a2 = float(self.alpha[0]), float(self.alpha[1])
        out = []
        for w in self.words:
            d1, d2 = word_degree(w)
            out.append(a1**d1 * a2**d2)
        return out

    def to_json_dict(self) -> dict:
        return {
            "center": [str(c) for c in self.center],
            "words": [list(w) for w in self.words],
            "alpha": [str(a) for a in self.alpha],
        }


@dataclass
class BallSample:
    spec: BallSpec
    points: np.ndarray
    volume_estimate: float
    volume_stderr: float
    jac_range: tuple[float, float]
    method: str
    n_samples: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "volume_estimate": self.volume_estimate,
            "volume_stderr": self.volume_stderr,
            "jac_range": list(self.jac_range),
            "method": self.method,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


class _BallGeometry:
    """Float-side machinery for one (table, word tuple, center)."""

    def __init__(self, table: WordTable, words: Sequence[Word], center: Sequence):
        self.n = table.dim
        self.flow: IterFlowMap = iter_flow(table, tuple(words))
        self.center = np.array([float(Fraction(c)) for c in center])
        n = self.n
        self._map = MapEvaluator(self.flow.map)
        self._jac = JacobianEvaluator(self.flow.map, wrt=list(range(n, 2 * n)))
        self._jac_det = MapEvaluator((self.flow.jac_det,))

    def _with_center(self, t: np.ndarray) -> np.ndarray:
        m = len(t)
        return np.hstack([np.tile(self.center, (m, 1)), t])

    def push(self, t: np.ndarray) -> np.ndarray:
        return self._map(self._with_center(t))

    def jac_at(self, t: np.ndarray) -> np.ndarray:
        return self._jac_det(self._with_center(t))[:, 0]

    def members(self, ys: np.ndarray, halfwidths: Sequence[float],
                tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
        """(membership mask, inconclusive mask) for points ys.

        Membership solves Phi(t) = y from 8 deterministic starts inside the
        box; a point is inconclusive when no start converges at all.
        """
        hw = np.asarray(halfwidths, dtype=float)
        n = self.n
        m = len(ys)

        def fwd(t):
            return self.push(t)

        def jac(t):
            return self._jac(self._with_center(t))

        member = np.zeros(m, dtype=bool)
        converged_any = np.zeros(m, dtype=bool)
        starts = [np.zeros(n)]
        for k in range(n):
            e = np.zeros(n)
            e[k] = 0.5 * hw[k]
            starts.extend([e, -e])
        starts = starts[: 8]
        for st in starts:
            sol, ok = newton_preimage(fwd, jac, ys, st, tol=tol)
            converged_any |= ok
            inside = ok & np.all(np.abs(sol) < hw * (1 + 1e-9) + tol, axis=1)
            member |= inside
            if member.all():
                break
        return member, ~converged_any


def ball_sample(table: WordTable, spec: BallSpec, n_samples: int,
                seed: int = 0) -> BallSample:
    """QMC image sample of a ball with a volume estimate.

    When the Jacobian keeps one sign across the sampled box, the volume is the
    change-of-variables integral of |det|; a sign change (or a vanishing
    Jacobian) falls back to occupancy counting over a bounding-box grid.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    geo = _BallGeometry(table, spec.words, spec.center)
    n = geo.n
    hw = np.array(spec.box_halfwidths())
    u = halton(n, n_samples, seed=seed)
    t = (2.0 * u - 1.0) * hw
    pts = geo.push(t)
    jac = geo.jac_at(t)
    box_vol = float(np.prod(2.0 * hw))
    degenerate = np.abs(jac).max() == 0.0
    if not degenerate and (np.all(jac > 0) or np.all(jac < 0)):
        vals = np.abs(jac) * box_vol
        vol = float(vals.mean())
        stderr = float(vals.std() / np.sqrt(n_samples))
        method = "change_of_variables"
    else:
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-300)
        g = max(2, int(round(n_samples ** (1.0 / n) / 2)))
        cells = set()
        scaled = np.clip(((pts - lo) / span * g).astype(int), 0, g - 1)
        for row in scaled:
            cells.add(tuple(row.tolist()))
        vol = len(cells) * float(np.prod(span / g))
        stderr = float("nan")
        method = "occupancy"
    return BallSample(
        spec=spec,
        points=pts,
        volume_estimate=vol,
        volume_stderr=stderr,
        jac_range=(float(np.abs(jac).min()), float(np.abs(jac).max())),
        method=method,
        n_samples=int(n_samples),
        seed=int(seed),
    )


def _lambda_nondegeneracy(entries: Sequence[LambdaEntry], words: tuple[Word, ...],
                          x: Sequence) -> tuple[float, float]:
    """(|lambda_I(x)|, max over classes |lambda_J(x)|) for the precondition."""
    target = None
    biggest = 0.0
    key = tuple(sorted(words))
    for e in entries:
        v = abs(float(e.poly.eval(x)))
        biggest = max(biggest, v)
        if tuple(sorted(e.words)) == key:
            target = v
    if target is None:
        target = 0.0
    return target, biggest


def doubling_check(table: WordTable, entries: Sequence[LambdaEntry],
                   x1: Sequence, x2: Sequence,
                   I1: Sequence[Word], I2: Sequence[Word],
                   rho: float, delta: float,
                   n_samples: int = 400, seed: int = 0,
                   c: float = 0.125, tol: float = 1e-9) -> dict:
    """Numeric probe of the ball-doubling containment.

    Samples the radius-(c*delta*rho) ball around x1; if it meets the matching
    ball around x2, every sample must land inside the radius-rho ball around
    x2.  Membership failures and Newton non-convergence are reported, never
    papered over; >1% non-convergence marks the whole check inconclusive.
    """
    I1 = tuple(tuple(w) for w in I1)
    I2 = tuple(tuple(w) for w in I2)
    report: dict = {"c": c, "delta": delta, "rho": rho, "seed": seed}
    lam1, big1 = _lambda_nondegeneracy(entries, I1, x1)
    lam2, big2 = _lambda_nondegeneracy(entries, I2, x2)
    report["lambda_ratio_x1"] = lam1 / big1 if big1 else 0.0
    report["lambda_ratio_x2"] = lam2 / big2 if big2 else 0.0
    if lam1 < delta * big1 or lam2 < delta * big2:
        report["verdict"] = "HypothesisNotMet"
        return report
    small = c * delta * rho
    geo1 = _BallGeometry(table, I1, x1)
    geo2 = _BallGeometry(table, I2, x2)
    n = geo1.n
    u = halton(n, n_samples, seed=seed)
    t_small = (2.0 * u - 1.0) * small
    cloud1 = geo1.push(t_small)
    inter_member, inter_bad = geo2.members(cloud1, [small] * n, tol=tol)
    if not inter_member.any():
        report["verdict"] = "NotApplicable"
        report["reason"] = "sampled small balls do not intersect"
        return report
    member, inconclusive = geo2.members(cloud1, [rho] * n, tol=tol)
    n_inc = int(inconclusive.sum())
    pass_fraction = float(member[~inconclusive].mean()) if (~inconclusive).any() else 0.0
    report.update(
        {
            "n_samples": int(n_samples),
            "intersecting_fraction": float(inter_member.mean()),
            "pass_fraction": pass_fraction,
            "newton_failures": n_inc,
            "newton_failure_fraction": n_inc / n_samples,
        }
    )
    if n_inc > 0.01 * n_samples:
        report["verdict"] = "Inconclusive"
    else:
        report["verdict"] = "Pass" if pass_fraction >= 0.99 else "Fail"
    return report


def vitali_cover(table: WordTable, entries: Sequence[LambdaEntry],
                 region_lo: Sequence[float], region_hi: Sequence[float],
                 rho: float, delta: float = 0.5, grid: int = 4,
                 words: Sequence[Word] | None = None,
                 c: float = 0.125, exponent: float = 1.0,
                 cloud: int = 16, seed: int = 0) -> dict:
    """Greedy maximal-disjoint ball selection plus a coverage report.

    Grid points where some |lambda_I| clears delta * |Lambda| are eligible
    centers.  Selection uses balls of radius c^2 * rho^exponent; coverage is
    then checked at the inflated radius c * rho^exponent.  The tuple defaults
    to the one maximizing |lambda_I| at the region center.
    """
    lo = np.asarray(region_lo, dtype=float)
    hi = np.asarray(region_hi, dtype=float)
    n = table.dim
    mid = [Fraction(a + b).limit_denominator(10**6) / 2 for a, b in zip(region_lo, region_hi)]
    if words is None:
        if not entries:
            return {"centers": [], "count": 0, "covered_fraction": float("nan"),
                    "reason": "no nonzero lambda classes"}
        words = max(entries, key=lambda e: abs(float(e.poly.eval(mid)))).words
    words = tuple(tuple(w) for w in words)
    axes = [np.linspace(lo[i], hi[i], grid) for i in range(n)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    lam_eval = MapEvaluator(tuple(e.poly for e in entries))
    vals = np.abs(lam_eval(mesh))
    big = vals.max(axis=1)
    key = tuple(sorted(words))
    idx = [i for i, e in enumerate(entries) if tuple(sorted(e.words)) == key]
    mine = vals[:, idx[0]] if idx else np.zeros(len(mesh))
    eligible = mesh[(mine >= delta * big) & (big > 0)]
    if len(eligible) == 0:
        return {"centers": [], "count": 0, "covered_fraction": float("nan"),
                "reason": "no eligible grid points", "words": [list(w) for w in words]}
    r_small = (c ** 2) * (rho ** exponent)
    r_big = c * (rho ** exponent)
    u = halton(n, cloud, seed=seed)
    selected: list[np.ndarray] = []
    geos: list[_BallGeometry] = []
    for x in eligible:
        geo = _BallGeometry(table, words, [Fraction(v).limit_denominator(10**9) for v in x])
        cloud_pts = geo.push((2.0 * u - 1.0) * r_small)
        disjoint = True
        for other in geos:
            m1, _ = other.members(cloud_pts, [r_small] * n)
            if m1.any():
                disjoint = False
                break
        if disjoint:
            selected.append(x)
            geos.append(geo)
    covered = np.zeros(len(eligible), dtype=bool)
    for geo in geos:
        m, _ = geo.members(eligible, [r_big] * n)
        covered |= m
    return {
        "centers": [list(map(float, x)) for x in selected],
        "count": len(selected),
        "covered_fraction": float(covered.mean()),
        "eligible_points": int(len(eligible)),
        "radius_small": r_small,
        "radius_inflated": r_big,
        "words": [list(w) for w in words],
    }
