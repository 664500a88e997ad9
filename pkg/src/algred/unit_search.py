"""Channel reduction by walking the unit-group tiling of hyperbolic 3-space.

The normalized channel h1 ∈ SL2(C) pulls the base point J to h1^{-1}(J),
which lies in exactly one tile u(P) of the Dirichlet tiling generated by the
sixteen stored units.  Starting from the identity, each step moves to the
neighboring tile whose center u_i(J) is closest to the current pull-back of
J and multiplies the accumulated word accordingly; the walk stops when J's
own tile wins.  The output unit û = ū^{-1} then attains the minimum of
‖u h1^{-1}‖²_F over the whole unit group, and the residual E = h1 û^{-1}
(so h1 = E·embed(û)) satisfies ‖E‖²_F ≤ 2 cosh R_max = 2√5.

Ties in the distance comparison (within 1e−12 relative) resolve to the
smallest index, so the walk is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import golden_code
from .exact_order import (GaussianMatrix, OrderElement, evaluate_word,
                          generator, GAUSS_ONE)
from .hyperbolic import J, cosh_dist, orbit_point

TIE_TOL = 1e-12
T_ROUND_TOL = 1e-6
DEFAULT_MAX_STEPS = 64


class SingularChannelError(ValueError):
    """Channel determinant too close to zero to normalize."""


class NonTerminationError(RuntimeError):
    """The tile walk exceeded max_steps (diagnostic; unreachable for sane input)."""


class PrecisionError(ArithmeticError):
    """Numeric rounding residual too large to trust an integer matrix."""


@dataclass(frozen=True)
class UnitWord:
    """Word in the generators; letter k means u_k (k ≤ 8) or u_{k−8}^{-1}."""

    letters: tuple[int, ...]

    def evaluate(self) -> OrderElement:
        u = evaluate_word(self.letters)
        if u.reduced_norm() != GAUSS_ONE:
            raise ValueError("word does not evaluate to a norm-one unit")
        return u

    def __str__(self):
        return "[" + ", ".join(str(k) for k in self.letters) + "]"


class GeneratorTable:
    """The sixteen units u_1..u_8, u_1^{-1}..u_8^{-1} with cached numerics.

    Stores for each entry the exact order element, its embedded matrix, and
    the image u(J) = (x, y, r); entries 9..16 are the exact inverses of
    entries 1..8.
    """

    def __init__(self):
        units = [generator(k) for k in range(1, 17)]
        for k, u in enumerate(units[:8]):
            assert (u * units[k + 8]).is_one()
            assert u.reduced_norm() == GAUSS_ONE
        self.units = tuple(units)
        self.mats = np.stack([u.embed() for u in units])
        pts = [orbit_point(m) for m in self.mats]
        self.images = np.array([[p.x, p.y, p.r] for p in pts])

    def entry(self, k: int) -> OrderElement:
        return self.units[k - 1]


@lru_cache(maxsize=1)
def get_table() -> GeneratorTable:
    return GeneratorTable()


@dataclass
class ReductionResult:
    unit_exact: OrderElement
    unit_numeric: np.ndarray
    word: UnitWord
    t: GaussianMatrix
    e: np.ndarray
    steps: int

    @property
    def residual_frob_sq(self) -> float:
        return float(np.linalg.norm(self.e, "fro") ** 2)


def normalize_channel(h) -> tuple[np.ndarray, complex]:
    """Split H = √det(H) · H1 with det H1 = 1 (principal square root)."""
    h = np.asarray(h, dtype=complex)
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    if abs(det) <= 1e-12:
        raise SingularChannelError(f"|det H| = {abs(det)} too small")
    return h / np.sqrt(det), det


def _pullback_point(h):
    """(h^{-1})(J) for det-one h, via the adjugate."""
    hinv = np.array([[h[1, 1], -h[0, 1]], [-h[1, 0], h[0, 0]]])
    return orbit_point(hinv)


def reduce(h1, table: GeneratorTable | None = None,
           max_steps: int = DEFAULT_MAX_STEPS) -> ReductionResult:
    """Find the unit minimizing ‖u h1^{-1}‖²_F by the greedy tile walk.

    One step = one round of the 17 distance comparisons; the identity
    channel therefore reports steps = 1.  The accumulated comparison
    distance is strictly decreasing across moves (asserted to 1e−12).
    """
    table = table or get_table()
    h1 = np.asarray(h1, dtype=complex)
    det = h1[0, 0] * h1[1, 1] - h1[0, 1] * h1[1, 0]
    if abs(det - 1.0) > 1e-6:
        raise ValueError("reduce expects a normalized (determinant-one) channel")

    h = h1.copy()
    word_back: list[int] = []   # letters of ū, in product order
    imgs = table.images
    last_d0 = np.inf
    steps = 0
    while steps < max_steps:
        steps += 1
        p = _pullback_point(h)
        d0 = cosh_dist(p, J)
        assert d0 <= last_d0 * (1.0 + TIE_TOL), "tile walk failed to make progress"
        last_d0 = d0
        dd = 1.0 + ((p.x - imgs[:, 0]) ** 2 + (p.y - imgs[:, 1]) ** 2
                    + (p.r - imgs[:, 2]) ** 2) / (2.0 * p.r * imgs[:, 2])
        dmin = min(d0, float(dd.min()))
        if d0 <= dmin * (1.0 + TIE_TOL):
            break
        i0 = int(np.argmax(dd <= dmin * (1.0 + TIE_TOL))) + 1
        word_back.append(i0)
        h = h @ table.mats[i0 - 1]
    else:
        raise NonTerminationError(f"no fixed tile after {max_steps} steps")

    # û = ū^{-1}: reverse the word and invert each letter
    letters = tuple(k - 8 if k > 8 else k + 8 for k in reversed(word_back))
    unit = evaluate_word(letters)
    unit_mat = unit.embed()
    t = compute_t(unit)
    # residual from the exact unit: E = h1 · embed(û)^{-1}
    adj = np.array([[unit_mat[1, 1], -unit_mat[0, 1]],
                    [-unit_mat[1, 0], unit_mat[0, 0]]])
    e = h1 @ adj
    return ReductionResult(unit_exact=unit, unit_numeric=unit_mat,
                           word=UnitWord(letters), t=t, e=e, steps=steps)


def compute_t(u: OrderElement, basis: golden_code.LatticeBasis | None = None,
              tol: float = T_ROUND_TOL) -> GaussianMatrix:
    """Unimodular change of basis T_U = Φ^{-1} U_l Φ, rounded onto Z[i].

    Raises PrecisionError when the rounding residual exceeds `tol`
    (recompute via `compute_t_exact` in that case).
    """
    if u.reduced_norm() != GAUSS_ONE:
        raise ValueError("T is defined for norm-one units")
    basis = basis or _default_basis()
    ul = golden_code.left_mult_matrix(u.embed())
    t_num = basis.phi_h @ ul @ basis.phi
    t, resid = GaussianMatrix.from_complex_rounded(t_num)
    if resid > tol:
        raise PrecisionError(f"rounding residual {resid:.3e} exceeds {tol:.1e}")
    return t


# coordinates of the ideal basis α·{1, θ, j, θj} over the order basis
# {1, θ, j, θj}: two copies of the 2×2 block [[1+i, −i], [−i, 1]], det 2+i
_ABLOCK = ((1, 1), (0, -1), (0, -1), (1, 0))


def compute_t_exact(u: OrderElement) -> GaussianMatrix:
    """T_U over Z[i] with no floating point: solve u·(α v_k) = Σ_m T_mk (α v_m).

    Conjugation by α maps O to itself, so each column is the exact solution
    of a 2×2 block system with determinant 2+i; the divisions are exact.
    """
    from .exact_order import GaussInt, RingElem

    alpha = RingElem(GaussInt(*_ABLOCK[0]), GaussInt(*_ABLOCK[1]))
    theta = RingElem(GaussInt(0, 0), GaussInt(1, 0))
    zero = RingElem(GaussInt(0, 0), GaussInt(0, 0))
    basis_elems = [
        OrderElement(alpha, zero),
        OrderElement(alpha * theta, zero),
        OrderElement(zero, alpha),
        OrderElement(zero, alpha * theta),
    ]
    det = GaussInt(2, 1)
    cols = []
    for w in basis_elems:
        lhs = (u * w).coeffs()
        col = []
        for pair in ((lhs[0], lhs[1]), (lhs[2], lhs[3])):
            l1, l2 = pair
            # inverse of [[1+i, −i], [−i, 1]] is [[1, i], [i, 1+i]] / (2+i)
            col.append((l1 + l2.mul_i()).exact_div(det))
            col.append((l1.mul_i() + GaussInt(1, 1) * l2).exact_div(det))
        cols.append(col)
    rows = [[cols[j][i] for j in range(4)] for i in range(4)]
    return GaussianMatrix(rows)


@lru_cache(maxsize=1)
def _default_basis() -> golden_code.LatticeBasis:
    return golden_code.build_basis()
