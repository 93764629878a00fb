"""Float-side helpers: vectorized polynomial evaluation and Newton preimages.

Exact objects cross into floating point exactly here.  Evaluators take one
numpy array per variable (broadcastable) and return an array; the Newton
solver batches damped iterations over many target points at once, which is
what ball-membership testing needs.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .polycore import RatPoly


def poly_evaluator(p: RatPoly) -> Callable[[Sequence[np.ndarray]], np.ndarray]:
    """Compile a RatPoly into a vectorized float evaluator."""
    terms = [(float(c), exp) for exp, c in p.sorted_terms()]
    nvars = p.nvars

    def ev(args: Sequence[np.ndarray]) -> np.ndarray:
        if len(args) != nvars:
            raise ValueError(f"expected {nvars} arrays, got {len(args)}")
        args = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in args)) if args else ()
        out = np.zeros(shape)
        for c, exp in terms:
            term = np.full(shape, c)
            for i, e in enumerate(exp):
                if e == 1:
                    term = term * args[i]
                elif e > 1:
                    term = term * args[i] ** e
            out += term
        return out

    return ev


class MapEvaluator:
    """Vectorized evaluator for a tuple of RatPolys sharing one variable space."""

    def __init__(self, components: Sequence[RatPoly]):
        self.components = tuple(components)
        self.nvars = self.components[0].nvars
        self._evs = [poly_evaluator(c) for c in self.components]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """points: (m, nvars) -> (m, ncomps)."""
        points = np.asarray(points, dtype=float)
        cols = [points[:, i] for i in range(self.nvars)]
        return np.stack([ev(cols) for ev in self._evs], axis=1)


class JacobianEvaluator:
    """Vectorized Jacobian of selected variables of a polynomial map."""

    def __init__(self, components: Sequence[RatPoly], wrt: Sequence[int]):
        self.wrt = list(wrt)
        self._evs = [
            [poly_evaluator(c.partial(j)) for j in self.wrt] for c in components
        ]
        self.nvars = components[0].nvars

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """points: (m, nvars) -> (m, ncomps, len(wrt))."""
        points = np.asarray(points, dtype=float)
        cols = [points[:, i] for i in range(self.nvars)]
        rows = [[ev(cols) for ev in row] for row in self._evs]
        return np.stack([np.stack(r, axis=1) for r in rows], axis=1)


def newton_preimage(
    forward: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    targets: np.ndarray,
    start: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton solve forward(t) = target, batched over targets.

    ``start`` may be a single point (broadcast) or one start per target.
    Returns (solutions, converged mask); non-converged rows hold the last
    iterate.  Steps are halved until the residual decreases (at most 8
    halvings per iteration).
    """
    targets = np.asarray(targets, dtype=float)
    m, n = targets.shape
    t = np.broadcast_to(np.asarray(start, dtype=float), (m, n)).copy()
    res = forward(t) - targets
    res_norm = np.linalg.norm(res, axis=1)
    active = res_norm > tol
    for _ in range(max_iter):
        if not active.any():
            break
        ta = t[active]
        ra = res[active]
        Ja = jacobian(ta)
        try:
            step = np.linalg.solve(Ja, ra[..., None])[..., 0]
        except np.linalg.LinAlgError:
            # singular rows fall back to least-squares via the pseudoinverse
            step = np.einsum("mij,mj->mi", np.linalg.pinv(Ja), ra)
        # guard singular rows elementwise
        bad = ~np.isfinite(step).all(axis=1)
        step[bad] = 0.0
        scale = np.ones(len(ta))
        cur_norm = np.linalg.norm(ra, axis=1)
        new_t = ta - step
        new_res = forward(new_t) - targets[active]
        new_norm = np.linalg.norm(new_res, axis=1)
        for _ in range(8):
            worse = new_norm > cur_norm
            if not worse.any():
                break
            scale[worse] *= 0.5
            new_t[worse] = ta[worse] - scale[worse, None] * step[worse]
            new_res[worse] = forward(new_t[worse]) - targets[active][worse]
            new_norm[worse] = np.linalg.norm(new_res[worse], axis=1)
        t[active] = new_t
        res[active] = new_res
        res_norm[active] = new_norm
        active = res_norm > tol
    return t, res_norm <= tol
