"""Iterated flow maps, Jacobian-derivative functionals, and torsion weights.

The central object is the composed flow

    Phi^I_x(t) = e^(t_n X_{w_n}) o ... o e^(t_1 X_{w_1})(x),

a polynomial map in 2n variables (base point first, flow times second).  Its
time-Jacobian determinant, expanded around t = 0, produces the functionals

    J^beta(x) = d_t^beta det D_t Psi_x(0),

where Psi alternates the two generators starting with X_1 (and the reversed
map Psi-tilde starts with X_2).  The weight carried by a multiindex beta is
|J^beta|^(1/(b1+b2-1)) with the bidegree bookkeeping

    b(beta) = (sum over odd slots of 1+beta_j, sum over even slots of 1+beta_j)

and endpoint exponents p = ((b1+b2-1)/b1, (b1+b2-1)/b2).  Everything here is
exact; the numeric |.|^e evaluation lives in the verifier.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .geometry import PolyVectorField, Word, WordTable, lie_series_flow
from .polycore import PolyMatrix, RatPoly


class NonConstantJacobian(ValueError):
    """A coordinate-change map fed to weight_transform has a non-constant Jacobian."""


@dataclass(frozen=True)
class IterFlowMap:
    """Composed flow Phi^I_x and its time-Jacobian determinant.

    ``map`` holds n polynomials in 2n variables: x_0..x_(n-1), t_1..t_n.
    ``jac_det`` is det of d(map)/d(t), same variable space.
    """

    words: tuple[Word, ...]
    map: tuple[RatPoly, ...]
    jac_det: RatPoly

    @property
    def dim(self) -> int:
        return len(self.map)

    def time_vars(self) -> list[int]:
        n = self.dim
        return list(range(n, 2 * n))

    def eval(self, x: Sequence, t: Sequence) -> list[Fraction]:
        pt = list(x) + list(t)
        return [m.eval(pt) for m in self.map]

    def jac_at(self, x: Sequence, t: Sequence) -> Fraction:
        return self.jac_det.eval(list(x) + list(t))


def _flow_in_ambient(field: PolyVectorField, time_index: int, nvars: int,
                     state: Sequence[RatPoly]) -> list[RatPoly]:
    """Compose one exact flow step onto ``state`` inside a larger variable space."""
    fm = lie_series_flow(field)
    n = field.dim
    subs = list(state) + [RatPoly.variable(nvars, time_index)]
    return [m.compose(subs) for m in fm.map]


def iter_flow(table: WordTable, words: Sequence[Word]) -> IterFlowMap:
    """Exact Phi^I_x for a tuple of words, flowing along words[0] first.

    Absent words act as zero fields and contribute identity factors; the
    resulting Jacobian is then degenerate, which is legal.  Results are
    memoized on the table.
    """
    key = tuple(tuple(w) for w in words)
    cache = table._flow_cache
    lock = cache.setdefault("__lock__", threading.Lock())
    with lock:
        if key in cache:
            return cache[key]
    n = table.dim
    if len(words) != n:
        raise ValueError(f"need an n-tuple of words (n={n}), got {len(words)}")
    nv = 2 * n
    state: list[RatPoly] = [RatPoly.variable(nv, i) for i in range(n)]
    for slot, w in enumerate(key):
        fld = table.field_for(w)
        if fld.is_zero():
            continue  # identity factor
        state = _flow_in_ambient(fld, n + slot, nv, state)
    jac = PolyMatrix.from_rows(
        [[state[i].partial(n + j) for j in range(n)] for i in range(n)]
    )
    result = IterFlowMap(words=key, map=tuple(state), jac_det=jac.det())
    with lock:
        cache[key] = result
    return result


def psi_words(n: int, start: int = 1) -> tuple[Word, ...]:
    """Cyclic word tuple ((1),(2),(1),...) of length n (start=2 for the tilde map)."""
    return tuple(((start if j % 2 == 0 else 3 - start),) for j in range(n))


def psi_flow(table: WordTable) -> IterFlowMap:
    return iter_flow(table, psi_words(table.dim, start=1))


def psi_tilde_flow(table: WordTable) -> IterFlowMap:
    return iter_flow(table, psi_words(table.dim, start=2))


def jacobian_derivative(flow: IterFlowMap, beta: Sequence[int]) -> RatPoly:
    """J^beta(x) = d_t^beta jac_det at t = 0, an exact polynomial in x.

    Extracted as beta! times the t-coefficient of jac_det, then restricted to
    the base variables.
    """
    n = flow.dim
    if len(beta) != n:
        raise ValueError("beta length must equal the dimension")
    coeffs = flow.jac_det.coefficients_in(flow.time_vars())
    c = coeffs.get(tuple(int(b) for b in beta))
    if c is None:
        return RatPoly.zero(n)
    factor = 1
    for b in beta:
        factor *= math.factorial(b)
    # restrict from 2n variables down to the base block
    out = RatPoly(n, {exp[:n]: v * factor for exp, v in c.terms.items()})
    return out


def all_jacobian_derivatives(flow: IterFlowMap) -> dict[tuple[int, ...], RatPoly]:
    """Every beta with J^beta not identically zero, read off the Jacobian expansion."""
    n = flow.dim
    out = {}
    for texp, c in flow.jac_det.coefficients_in(flow.time_vars()).items():
        factor = 1
        for b in texp:
            factor *= math.factorial(b)
        out[texp] = RatPoly(n, {exp[:n]: v * factor for exp, v in c.terms.items()})
    return out


def b_of_beta(beta: Sequence[int]) -> tuple[int, int]:
    """Bidegree bookkeeping for the alternating map starting with X_1.

    Slots are 1-indexed in the convention: odd slots flow X_1.
    """
    b1 = sum(1 + b for j, b in enumerate(beta) if (j + 1) % 2 == 1)
    b2 = sum(1 + b for j, b in enumerate(beta) if (j + 1) % 2 == 0)
    return (b1, b2)


def b_tilde_of_beta(beta: Sequence[int]) -> tuple[int, int]:
    """Swapped bookkeeping for the reversed map (odd slots flow X_2)."""
    b1, b2 = b_of_beta(beta)
    return (b2, b1)


def exponents_for_b(b: tuple[int, int]) -> tuple[Fraction, Fraction]:
    """Endpoint Lebesgue exponents p(b) = ((|b|-1)/b1, (|b|-1)/b2)."""
    s = b[0] + b[1] - 1
    return (Fraction(s, b[0]), Fraction(s, b[1]))


@dataclass(frozen=True)
class TorsionProfile:
    """The weight data attached to one multiindex beta.

    The weight itself is |J_beta|^rho_exponent, kept symbolic as the pair
    (base polynomial, rational exponent).
    """

    beta: tuple[int, ...]
    b: tuple[int, int]
    p: tuple[Fraction, Fraction]
    J_beta: RatPoly
    rho_exponent: Fraction

    def rho_at(self, point: Sequence) -> float:
        """Numeric weight value; the single sanctioned float crossing."""
        v = self.J_beta.eval(point)
        return float(abs(v)) ** float(self.rho_exponent)

    def to_json_dict(self) -> dict:
        return {
            "beta": list(self.beta),
            "b": list(self.b),
            "p": [str(self.p[0]), str(self.p[1])],
            "J_beta": self.J_beta.to_json_dict(),
            "rho_exponent": str(self.rho_exponent),
        }


def torsion_profile(table: WordTable, beta: Sequence[int],
                    reversed_order: bool = False) -> TorsionProfile:
    """Profile for beta: b, p, and the exact J^beta polynomial.

    ``reversed_order`` computes the tilde variant (flows starting with X_2)
    with the swapped bidegree convention; there is no separate code path.
    """
    beta = tuple(int(x) for x in beta)
    flow = psi_tilde_flow(table) if reversed_order else psi_flow(table)
    b = b_tilde_of_beta(beta) if reversed_order else b_of_beta(beta)
    return TorsionProfile(
        beta=beta,
        b=b,
        p=exponents_for_b(b),
        J_beta=jacobian_derivative(flow, beta),
        rho_exponent=Fraction(1, b[0] + b[1] - 1),
    )


def _constant_jacobian(components: Sequence[RatPoly]) -> Fraction:
    n = components[0].nvars
    if len(components) != n:
        raise ValueError("expected a self-map")
    jac = PolyMatrix.from_rows(
        [[c.partial(j) for j in range(n)] for c in components]
    )
    d = jac.det()
    if not d.is_constant():
        raise NonConstantJacobian(f"Jacobian determinant {d!r} is not constant")
    return d.constant_value()


def weight_transform(profile: TorsionProfile,
                     F: Sequence[RatPoly],
                     G1: Sequence[RatPoly],
                     G2: Sequence[RatPoly]) -> TorsionProfile:
    """Covariance of J_beta under pi_j -> G_j o pi_j o F.

    When every Jacobian determinant is constant, the chain-rule expansion has
    no lower-order terms and the transformed functional is exactly

        J_beta -> (det DF)^(b1+b2-1) (det DG1)^b1 (det DG2)^b2 * (J_beta o F).

    Raises NonConstantJacobian otherwise; the error terms are then genuinely
    present and no pointwise identity is available.
    """
    kF = _constant_jacobian(F)
    k1 = _constant_jacobian(G1)
    k2 = _constant_jacobian(G2)
    if kF == 0 or k1 == 0 or k2 == 0:
        raise NonConstantJacobian("coordinate change is singular")
    b1, b2 = profile.b
    scale = (kF ** (b1 + b2 - 1)) * (k1 ** b1) * (k2 ** b2)
    transformed = profile.J_beta.compose(list(F)) * scale
    return TorsionProfile(
        beta=profile.beta,
        b=profile.b,
        p=profile.p,
        J_beta=transformed,
        rho_exponent=profile.rho_exponent,
    )
