"""Abstract nilpotent layer: structure constants, BCH, Malcev coordinates.

The concrete bracket fields of a WordTable span a finite-dimensional Lie
algebra over Q.  This module extracts a basis by exact linear algebra on
coefficient vectors, expresses every bracket in that basis, and then works
abstractly: truncated Baker-Campbell-Hausdorff products, weak Malcev bases
through a prescribed subalgebra, the polynomial group law in Malcev
coordinates, and the covering map built from flows at a base point.

Convention tying the abstract product to concrete flows: bch(U, V) is the
element whose time-1 flow equals (flow V at time 1) composed after (flow U at
time 1), i.e. flowing U first.  Tests pin this as an exact polynomial
identity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .geometry import (
    PolyVectorField,
    Word,
    WordTable,
    lie_series_flow,
)
from .polycore import PolyMatrix, RatPoly


class DependentBracket(ArithmeticError):
    """A bracket left the rational span of the stored fields."""


class NotASubalgebra(ValueError):
    """A spanning set fed to weak_malcev is not bracket-closed."""


class SingularAtOrigin(ArithmeticError):
    """Covering-map differential is singular at 0 (fields fail to span)."""


# -- exact linear algebra over Q ---------------------------------------------

def _echelon(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Row-reduce in place; returns (rref rows, pivot column list)."""
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _in_span(basis_rref: list[list[Fraction]], pivots: list[int],
             vec: Sequence[Fraction]) -> list[Fraction] | None:
    """Coordinates of vec in the row space, or None if outside."""
    v = list(vec)
    coords = []
    for row, p in zip(basis_rref, pivots):
        f = v[p]
        coords.append(f)
        if f != 0:
            v = [a - f * b for a, b in zip(v, row)]
    if any(x != 0 for x in v):
        return None
    return coords


def _solve_in_basis(basis: list[list[Fraction]], vec: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve sum_i c_i basis[i] = vec exactly; None when unsolvable."""
    n = len(vec)
    k = len(basis)
    aug = [[basis[i][r] for i in range(k)] + [Fraction(vec[r])] for r in range(n)]
    rref, pivots = _echelon(aug)
    coeffs = [Fraction(0)] * k
    for row, p in zip(rref, pivots):
        if p == k:
            return None  # inconsistent
        coeffs[p] = row[k]
    return coeffs


def _nullspace(rows: list[list[Fraction]], dim: int) -> list[list[Fraction]]:
    if not rows:
        return [[Fraction(1 if i == j else 0) for j in range(dim)] for i in range(dim)]
    rref, pivots = _echelon(rows)
    free = [c for c in range(dim) if c not in pivots]
    out = []
    for fc in free:
        v = [Fraction(0)] * dim
        v[fc] = Fraction(1)
        for row, p in zip(rref, pivots):
            v[p] = -row[fc]
        out.append(v)
    return out


# -- field embedding ----------------------------------------------------------

def _field_vector(f: PolyVectorField, index: dict) -> list[Fraction]:
    v = [Fraction(0)] * len(index)
    for comp_i, comp in enumerate(f.components):
        for exp, c in comp.terms.items():
            v[index[(comp_i, exp)]] = c
    return v


@dataclass
class AbstractNilpotent:
    """Nilpotent Lie algebra presented by exact structure constants.

    ``struct[(i, j)]`` for i < j holds the coordinates of [e_i, e_j] in the
    chosen basis; antisymmetry fills in the rest.
    """

    dim: int
    basis_words: tuple[Word, ...]
    basis_fields: tuple[PolyVectorField, ...]
    struct: dict[tuple[int, int], tuple[Fraction, ...]]
    step: int

    def bracket_basis(self, i: int, j: int) -> tuple[Fraction, ...]:
        if i == j:
            return tuple(Fraction(0) for _ in range(self.dim))
        if i < j:
            return self.struct[(i, j)]
        return tuple(-c for c in self.struct[(j, i)])

    def bracket_vec(self, u: Sequence, v: Sequence, zero=None):
        """Bilinear bracket of coefficient vectors; scalars may be Fractions
        or RatPolys (anything supporting + and *)."""
        if zero is None:
            zero = Fraction(0)
        out = [zero] * self.dim
        for i, ui in enumerate(u):
            if _scalar_zero(ui):
                continue
            for j, vj in enumerate(v):
                if _scalar_zero(vj):
                    continue
                for k, ck in enumerate(self.bracket_basis(i, j)):
                    if ck != 0:
                        out[k] = out[k] + ui * vj * ck
        return out

    def element_field(self, coeffs: Sequence[Fraction]) -> PolyVectorField:
        """Concrete field for a rational coefficient vector."""
        n = self.basis_fields[0].dim
        acc = PolyVectorField.zero(n)
        for c, f in zip(coeffs, self.basis_fields):
            if c != 0:
                acc = acc + f.scale(c)
        return acc

    def bch(self, u: Sequence, v: Sequence, step: int | None = None, zero=None):
        """Truncated BCH product of coefficient vectors (exact)."""
        s = self.step if step is None else step
        if s > self.step:
            raise ValueError("cannot exceed the certified nilpotency step")
        if zero is None:
            zero = Fraction(0)
        out = [zero] * self.dim
        for word, coeff in _dynkin_terms(s):
            val = list(u) if word[-1] == 0 else list(v)
            for letter in reversed(word[:-1]):
                val = self.bracket_vec(u if letter == 0 else v, val, zero=zero)
                if all(_scalar_zero(x) for x in val):
                    break
            for k in range(self.dim):
                if not _scalar_zero(val[k]):
                    out[k] = out[k] + val[k] * coeff
        return out

    def jacobi_defect(self, i: int, j: int, k: int) -> tuple[Fraction, ...]:
        """[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]; zero when Jacobi holds."""
        e = lambda idx: [Fraction(1 if t == idx else 0) for t in range(self.dim)]
        a = self.bracket_vec(e(i), self.bracket_vec(e(j), e(k)))
        b = self.bracket_vec(e(j), self.bracket_vec(e(k), e(i)))
        c = self.bracket_vec(e(k), self.bracket_vec(e(i), e(j)))
        return tuple(x + y + z for x, y, z in zip(a, b, c))


def _scalar_zero(x) -> bool:
    if isinstance(x, RatPoly):
        return x.is_zero()
    return x == 0


@lru_cache(maxsize=None)
def _dynkin_terms(step: int) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
    """Dynkin expansion of log(e^x e^y) through total degree ``step``.

    Terms are (letter word, rational coefficient) with 0 for x and 1 for y;
    the word encodes the right-nested bracket [w1,[w2,[...,wm]]].  Words whose
    two innermost letters agree are dropped (the bracket vanishes).
    """
    collected: dict[tuple[int, ...], Fraction] = {}

    def pair_blocks(k: int, remaining: int, prefix: list[tuple[int, int]]):
        if k == 0:
            if prefix:
                total = sum(p + q for p, q in prefix)
                denom = total
                for p, q in prefix:
                    denom *= math.factorial(p) * math.factorial(q)
                kk = len(prefix)
                coeff = Fraction((-1) ** (kk - 1), kk) * Fraction(1, denom)
                word = []
                for p, q in prefix:
                    word.extend([0] * p)
                    word.extend([1] * q)
                w = tuple(word)
                if len(w) >= 2 and w[-1] == w[-2]:
                    return  # innermost bracket [a,a] = 0
                collected[w] = collected.get(w, Fraction(0)) + coeff
            return
        for p in range(remaining + 1):
            for q in range(remaining - p + 1):
                if p == 0 and q == 0:
                    continue
                pair_blocks(k - 1, remaining - p - q, prefix + [(p, q)])

    for k in range(1, step + 1):
        pair_blocks(k, step, [])
    return tuple(sorted(
        ((w, c) for w, c in collected.items() if c != 0),
        key=lambda t: (len(t[0]), t[0]),
    ))


def abstract_algebra(table: WordTable, step: int) -> AbstractNilpotent:
    """Basis and exact structure constants of the algebra a table spans.

    The basis is the greedy maximal Q-independent subset of the nonzero word
    fields in length-then-lex order; every pairwise bracket is then expressed
    in that basis.  A bracket outside the span raises DependentBracket (it
    signals an incomplete table, not a recoverable state).
    """
    words = table.words()
    if not words:
        raise ValueError("empty word table")
    index: dict = {}
    for w in words:
        for comp_i, comp in enumerate(table.entries[w].components):
            for exp in comp.terms:
                index.setdefault((comp_i, exp), len(index))
    basis_words: list[Word] = []
    vectors: list[list[Fraction]] = []
    rref_rows: list[list[Fraction]] = []
    pivots: list[int] = []
    for w in words:
        vec = _field_vector(table.entries[w], index)
        if _in_span(rref_rows, pivots, vec) is None:
            basis_words.append(w)
            vectors.append(vec)
            rref_rows, pivots = _echelon(vectors)
    struct: dict[tuple[int, int], tuple[Fraction, ...]] = {}
    fields = [table.entries[w] for w in basis_words]
    from .geometry import lie_bracket

    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            br = lie_bracket(fields[i], fields[j])
            vec = _field_vector(br, index)
            coeffs = _solve_in_basis(vectors, vec)
            if coeffs is None:
                raise DependentBracket(
                    f"[{basis_words[i]}, {basis_words[j]}] escapes the stored span"
                )
            struct[(i, j)] = tuple(coeffs)
    return AbstractNilpotent(
        dim=len(basis_words),
        basis_words=tuple(basis_words),
        basis_fields=tuple(fields),
        struct=struct,
        step=step,
    )


@dataclass(frozen=True)
class MalcevBasis:
    """Ordered basis whose every tail span is a subalgebra.

    Elements are coefficient vectors over the parent algebra's basis; the
    trailing ``dim - split`` elements span the prescribed subalgebra.
    """

    algebra: AbstractNilpotent
    elements: tuple[tuple[Fraction, ...], ...]
    split: int

    def tail_is_subalgebra(self, k: int) -> bool:
        tail = [list(e) for e in self.elements[k:]]
        if not tail:
            return True
        rref, piv = _echelon(tail)
        for a, b in itertools.combinations(tail, 2):
            br = self.algebra.bracket_vec(a, b)
            if _in_span(rref, piv, br) is None:
                return False
        return True


def _subalgebra_chain(alg: AbstractNilpotent, start: list[list[Fraction]],
                      target: list[list[Fraction]]) -> list[list[Fraction]]:
    """Grow ``start`` to ``target`` one dimension at a time through normalizers.

    Both must be bracket-closed with start inside target; nilpotency makes the
    normalizer strictly larger at every stage, so the chain always completes.
    Returns the added elements in the order they were added (deepest first).
    """
    N = alg.dim
    added: list[list[Fraction]] = []
    current = [list(v) for v in start]
    t_rref, t_piv = _echelon([list(v) for v in target]) if target else ([], [])
    target_dim = len(t_rref)
    while True:
        c_rref, c_piv = _echelon(current) if current else ([], [])
        cur_dim = len(c_rref)
        if cur_dim == target_dim:
            return added
        # normalizer of current inside target: v with [v, h] in span(current)
        # for every generator h; unknown v = sum_bi c_bi * target_basis[bi]
        target_basis = [list(row) for row in t_rref]
        rows_for: list[list[Fraction]] = []
        residual_len = N
        for h in current:
            cols = []
            for tb in target_basis:
                br = alg.bracket_vec(tb, h)
                v = list(br)
                for row, p in zip(c_rref, c_piv):
                    f = v[p]
                    if f != 0:
                        v = [a - f * b for a, b in zip(v, row)]
                cols.append(v)
            for r in range(residual_len):
                rows_for.append([cols[bi][r] for bi in range(len(target_basis))])
        null = _nullspace(rows_for, len(target_basis))
        chosen = None
        for nv in null:
            cand = [Fraction(0)] * N
            for c, tb in zip(nv, target_basis):
                if c != 0:
                    cand = [a + c * b for a, b in zip(cand, tb)]
            if _in_span(c_rref, c_piv, cand) is None:
                chosen = cand
                break
        if chosen is None:
            raise NotASubalgebra(
                "normalizer chain stalled; ambient algebra is not nilpotent-closed"
            )
        added.append(chosen)
        current.append(chosen)


def weak_malcev(alg: AbstractNilpotent, z_span: Sequence[Sequence[Fraction]]) -> MalcevBasis:
    """Weak Malcev basis of the algebra through the subalgebra spanned by z_span.

    The prescribed set must be bracket-closed (exactly); the returned ordered
    basis has every tail span a subalgebra and its final block spanning z.
    """
    N = alg.dim
    z = [list(map(Fraction, v)) for v in z_span]
    z_rref, z_piv = _echelon(z) if z else ([], [])
    z_basis = [list(r) for r in z_rref]
    for a, b in itertools.combinations(z_basis, 2):
        if _in_span(z_rref, z_piv, alg.bracket_vec(a, b)) is None:
            raise NotASubalgebra("prescribed span is not closed under the bracket")
    full = [[Fraction(1 if i == j else 0) for j in range(N)] for i in range(N)]
    inner = _subalgebra_chain(alg, [], z_basis)      # builds z from nothing
    outer = _subalgebra_chain(alg, z_basis, full)    # extends z to the algebra
    # added deepest-first; the ordered basis reads outermost-first
    ordered = list(reversed(outer)) + list(reversed(inner))
    basis = MalcevBasis(
        algebra=alg,
        elements=tuple(tuple(v) for v in ordered),
        split=N - len(z_basis),
    )
    for k in range(N + 1):
        if not basis.tail_is_subalgebra(k):
            raise NotASubalgebra(f"tail {k} failed closure; construction bug")
    return basis


@dataclass(frozen=True)
class GroupLaw:
    """Polynomial group law in weak Malcev coordinates.

    q(x1, x2) solves e^(x2 . X) psi(x1) = psi(q); r solves psi(x1) e^(x2 . X)
    = psi(r).  Both are volume-preserving polynomial diffeomorphisms in x1 and
    q is triangular: q_i depends only on x1_1..x1_i and x2.
    """

    q: tuple[RatPoly, ...]
    r: tuple[RatPoly, ...]

    @property
    def dim(self) -> int:
        return len(self.q)


def _malcev_struct(basis: MalcevBasis) -> AbstractNilpotent:
    """Re-express the algebra in the Malcev basis coordinates."""
    alg = basis.algebra
    N = alg.dim
    mats = [list(e) for e in basis.elements]
    struct: dict[tuple[int, int], tuple[Fraction, ...]] = {}
    for i in range(N):
        for j in range(i + 1, N):
            br = alg.bracket_vec(mats[i], mats[j])
            coeffs = _solve_in_basis(mats, br)
            if coeffs is None:
                raise DependentBracket("Malcev basis does not span")
            struct[(i, j)] = tuple(coeffs)
    return AbstractNilpotent(
        dim=N,
        basis_words=alg.basis_words,
        basis_fields=alg.basis_fields,
        struct=struct,
        step=alg.step,
    )


def group_law(basis: MalcevBasis) -> GroupLaw:
    """Exact group law from truncated BCH algebra plus triangular peeling."""
    alg = _malcev_struct(basis)
    N = alg.dim
    nv = 2 * N
    zero = RatPoly.zero(nv)
    x1 = [RatPoly.variable(nv, i) for i in range(N)]
    x2 = [RatPoly.variable(nv, N + i) for i in range(N)]

    def basis_vec(i: int, scale: RatPoly) -> list[RatPoly]:
        return [scale if k == i else zero for k in range(N)]

    def log_psi(coords: list[RatPoly]) -> list[RatPoly]:
        acc = basis_vec(0, coords[0])
        for i in range(1, N):
            acc = alg.bch(acc, basis_vec(i, coords[i]), zero=zero)
        return acc

    def peel(z: list[RatPoly]) -> list[RatPoly]:
        out = []
        for i in range(N):
            out.append(z[i])
            z = alg.bch(basis_vec(i, -z[i]), z, zero=zero)
        return out

    L1 = log_psi(x1)
    x2_elt = list(x2)
    q = peel(alg.bch(x2_elt, L1, zero=zero))
    r = peel(alg.bch(L1, x2_elt, zero=zero))

    jac = PolyMatrix.from_rows([[q[i].partial(j) for j in range(N)] for i in range(N)])
    if not jac.det() == RatPoly.const(nv, 1):
        raise ArithmeticError("group law q is not volume preserving; algebra data bad")
    rjac = PolyMatrix.from_rows([[r[i].partial(j) for j in range(N)] for i in range(N)])
    if not rjac.det() == RatPoly.const(nv, 1):
        raise ArithmeticError("group law r is not volume preserving; algebra data bad")
    for i in range(N):
        for j in range(i + 1, N):
            if q[i].degree_in(j) > 0:
                raise ArithmeticError("group law q is not triangular; algebra data bad")
    return GroupLaw(q=tuple(q), r=tuple(r))


@dataclass(frozen=True)
class CoveringMap:
    """Flow-composition chart y -> e^(y1 X1) ... e^(yn Xn)(x0) with diagnostics."""

    map: tuple[RatPoly, ...]
    basis: MalcevBasis
    base_point: tuple[Fraction, ...]
    jacobian_det_at_origin: Fraction
    diagnostics: dict


def isotropy_subalgebra(alg: AbstractNilpotent, x0: Sequence) -> list[list[Fraction]]:
    """Kernel of evaluation at x0: elements whose concrete field vanishes there."""
    vals = [f.eval(x0) for f in alg.basis_fields]
    n = len(vals[0])
    rows = [[vals[i][r] for i in range(alg.dim)] for r in range(n)]
    return _nullspace(rows, alg.dim)


def covering_map(table: WordTable, x0: Sequence, step: int) -> CoveringMap:
    """Local polynomial-coordinates chart at a base point.

    Builds the abstract algebra, computes the isotropy subalgebra at x0, runs
    a weak Malcev basis through it, and composes the flows of the first n
    basis elements.  Raises SingularAtOrigin when the fields cannot span.
    """
    alg = abstract_algebra(table, step)
    n = table.dim
    x0 = [Fraction(v) for v in x0]
    z = isotropy_subalgebra(alg, x0)
    if alg.dim - len(z) != n:
        raise SingularAtOrigin(
            f"fields span a {alg.dim - len(z)}-dimensional space at x0, need {n}"
        )
    basis = weak_malcev(alg, z)
    head = [alg.element_field(e) for e in basis.elements[:n]]
    state = [RatPoly.const(n, c) for c in x0]
    for i in reversed(range(n)):
        fm = lie_series_flow(head[i])
        subs = state + [RatPoly.variable(n, i)]
        state = [m.compose(subs) for m in fm.map]
    jac = PolyMatrix.from_rows([[state[i].partial(j) for j in range(n)] for i in range(n)])
    det0 = jac.det().eval([0] * n)
    if det0 == 0:
        raise SingularAtOrigin("covering map differential singular at the origin")
    frame = PolyMatrix.from_rows(
        [[RatPoly.const(n, head[j].eval(x0)[i]) for j in range(n)] for i in range(n)]
    )
    frame_det = frame.det().eval([0] * n)
    diagnostics = {
        "frame_det": frame_det,
        "det_matches_frame_up_to_sign": abs(det0) == abs(frame_det),
        "pullback_fd_check": _pullback_fd_check(state, head, n),
    }
    return CoveringMap(
        map=tuple(state),
        basis=basis,
        base_point=tuple(x0),
        jacobian_det_at_origin=det0,
        diagnostics=diagnostics,
    )


def _pullback_fd_check(state: list[RatPoly], head: list[PolyVectorField],
                       n: int, samples: int = 4) -> dict:
    """Finite-difference consistency of the pullback frame along the chart.

    At sample points y, the pullback of each basis field solves
    DPhi(y) v = X(Phi(y)); flowing X for a short time from Phi(y) should agree
    with Phi(y + s v) to second order.  Reports the worst first-order defect.
    """
    import numpy as np

    from .numeric import poly_evaluator

    maps = [poly_evaluator(m) for m in state]
    jac_evals = [[poly_evaluator(state[i].partial(j)) for j in range(n)] for i in range(n)]
    field_evals = [[poly_evaluator(c) for c in X.components] for X in head]
    worst = 0.0
    for s_i in range(samples):
        y = [0.05 * (s_i + 1) * ((j + 1) % 3 + 1) % 0.4 for j in range(n)]
        arrs = [np.array([v]) for v in y]
        phi_y = np.array([m(arrs)[0] for m in maps])
        J = np.array([[jac_evals[i][j](arrs)[0] for j in range(n)] for i in range(n)])
        phi_arrs = [np.array([v]) for v in phi_y]
        for fe in field_evals:
            xval = np.array([c(phi_arrs)[0] for c in fe])
            try:
                v = np.linalg.solve(J, xval)
            except np.linalg.LinAlgError:
                continue
            h = 1e-5
            arrs2 = [np.array([y[j] + h * v[j]]) for j in range(n)]
            phi_shift = np.array([m(arrs2)[0] for m in maps])
            defect = float(np.max(np.abs(phi_shift - (phi_y + h * xval)))) / h
            worst = max(worst, defect)
    return {"worst_first_order_defect": worst, "samples": samples}
