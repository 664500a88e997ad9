"""Exact arithmetic in the maximal order of the Golden Code algebra.

The code algebra is the cyclic division algebra (Q(i,θ)/Q(i), σ, i) with
θ = (1+√5)/2 and σ(θ) = 1−θ.  Its maximal order

    O = { [[x1, x2], [i σ(x2), σ(x1)]] : x1, x2 ∈ Z[i,θ] }
      = Z[i,θ] ⊕ Z[i,θ]·j ,      j = [[0, 1], [i, 0]],  j² = i,  j x = σ(x) j

is represented here with four arbitrary-precision Gaussian-integer
coefficients over the basis {1, θ, j, θj}, so group relations among units
can be checked exactly.  The norm-one unit group O¹ = {u : det u = 1} is
generated by the eight units in GENERATORS; their inverses come from the
adjugate, which stays inside O.

Because θ + σ(θ) = 1 and θ² + σ(θ)² = 3, the squared Frobenius norm of the
embedded matrix of any order element is a plain integer, which makes the
norm-ball enumeration in `enumerate_norm_bounded` exact.
"""

from __future__ import annotations

import numpy as np

THETA = (1.0 + np.sqrt(5.0)) / 2.0
THETA_BAR = 1.0 - THETA


class NonUnitError(ValueError):
    """Raised when an inverse is requested for an element of reduced norm != 1."""


class GaussInt:
    """Gaussian integer re + im·i with unbounded Python integers."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = int(re)
        self.im = int(im)

    def __add__(self, o):
        return GaussInt(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return GaussInt(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return GaussInt(self.re * o.re - self.im * o.im,
                        self.re * o.im + self.im * o.re)

    def __neg__(self):
        return GaussInt(-self.re, -self.im)

    def conj(self):
        return GaussInt(self.re, -self.im)

    def mul_i(self):
        return GaussInt(-self.im, self.re)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def exact_div(self, o: "GaussInt") -> "GaussInt":
        """Quotient self/o, which must divide exactly in Z[i]."""
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian integer")
        p = self * o.conj()
        if p.re % n or p.im % n:
            raise ArithmeticError(f"{self} not divisible by {o}")
        return GaussInt(p.re // n, p.im // n)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def is_unit(self):
        return self.norm() == 1

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __eq__(self, o):
        return isinstance(o, GaussInt) and self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"({self.re}{self.im:+d}i)"


GAUSS_ZERO = GaussInt(0, 0)
GAUSS_ONE = GaussInt(1, 0)
GAUSS_I = GaussInt(0, 1)
GAUSS_UNITS = (GaussInt(1, 0), GaussInt(-1, 0), GaussInt(0, 1), GaussInt(0, -1))


class RingElem:
    """Element a + b·θ of Z[i,θ]; multiplication uses θ² = θ + 1."""

    __slots__ = ("a", "b")

    def __init__(self, a: GaussInt, b: GaussInt):
        self.a = a
        self.b = b

    def __add__(self, o):
        return RingElem(self.a + o.a, self.b + o.b)

    def __sub__(self, o):
        return RingElem(self.a - o.a, self.b - o.b)

    def __neg__(self):
        return RingElem(-self.a, -self.b)

    def __mul__(self, o):
        # (a1 + b1θ)(a2 + b2θ) = a1a2 + b1b2 + (a1b2 + a2b1 + b1b2)θ
        bb = self.b * o.b
        return RingElem(self.a * o.a + bb, self.a * o.b + self.b * o.a + bb)

    def conj(self):
        """Galois conjugate σ: θ ↦ 1 − θ, fixing Z[i]."""
        return RingElem(self.a + self.b, -self.b)

    def mul_i(self):
        return RingElem(self.a.mul_i(), self.b.mul_i())

    def norm(self) -> GaussInt:
        """Relative norm x·σ(x) = a² + ab − b² ∈ Z[i]."""
        return self.a * self.a + self.a * self.b - self.b * self.b

    def is_zero(self):
        return self.a.is_zero() and self.b.is_zero()

    def embed(self, conjugate: bool = False) -> complex:
        t = THETA_BAR if conjugate else THETA
        return self.a.to_complex() + self.b.to_complex() * t

    def __eq__(self, o):
        return isinstance(o, RingElem) and self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"{self.a}+{self.b}θ"


def _q_form(a: GaussInt, b: GaussInt) -> int:
    # |a+bθ|² + |a+bθ̄|² = |a|² + |a+b|² + 2|b|², an exact integer
    return a.norm() + (a + b).norm() + 2 * b.norm()


class OrderElement:
    """Element x1 + x2·j of the maximal order O."""

    __slots__ = ("x1", "x2")

    def __init__(self, x1: RingElem, x2: RingElem):
        self.x1 = x1
        self.x2 = x2

    @classmethod
    def from_coeffs(cls, a, b, c, d) -> "OrderElement":
        """Build from the four Z[i] coefficients over the basis {1, θ, j, θj}.

        Each of a, b, c, d is a GaussInt or an (re, im) pair.
        """
        gi = lambda v: v if isinstance(v, GaussInt) else GaussInt(*v)
        return cls(RingElem(gi(a), gi(b)), RingElem(gi(c), gi(d)))

    @classmethod
    def one(cls) -> "OrderElement":
        return cls.from_coeffs((1, 0), (0, 0), (0, 0), (0, 0))

    def coeffs(self):
        return (self.x1.a, self.x1.b, self.x2.a, self.x2.b)

    def __mul__(self, o):
        # j y = σ(y) j and j² = i:
        # (x1 + x2 j)(y1 + y2 j) = x1y1 + i·x2σ(y2) + (x1y2 + x2σ(y1)) j
        z1 = self.x1 * o.x1 + (self.x2 * o.x2.conj()).mul_i()
        z2 = self.x1 * o.x2 + self.x2 * o.x1.conj()
        return OrderElement(z1, z2)

    def __neg__(self):
        return OrderElement(-self.x1, -self.x2)

    def reduced_norm(self) -> GaussInt:
        """det of the matrix form: x1σ(x1) − i·x2σ(x2) ∈ Z[i]."""
        n = self.x1.norm() - self.x2.norm().mul_i()
        return n

    def inverse(self) -> "OrderElement":
        """Inverse of a norm-one unit via the adjugate [[σ(x1),−x2],[−iσ(x2),x1]]."""
        if self.reduced_norm() != GAUSS_ONE:
            raise NonUnitError(f"reduced norm {self.reduced_norm()} != 1")
        return OrderElement(self.x1.conj(), -self.x2)

    def frobenius_sq(self) -> int:
        """Exact squared Frobenius norm of the embedded matrix (an integer)."""
        return _q_form(self.x1.a, self.x1.b) + _q_form(self.x2.a, self.x2.b)

    def embed(self) -> np.ndarray:
        """Numeric 2×2 matrix [[x1, x2], [i σ(x2), σ(x1)]] with θ = (1+√5)/2."""
        return np.array(
            [[self.x1.embed(), self.x2.embed()],
             [1j * self.x2.embed(conjugate=True), self.x1.embed(conjugate=True)]],
            dtype=complex)

    def is_one(self):
        return (self.x1.a == GAUSS_ONE and self.x1.b.is_zero()
                and self.x2.is_zero())

    def __eq__(self, o):
        return isinstance(o, OrderElement) and self.x1 == o.x1 and self.x2 == o.x2

    def __hash__(self):
        return hash((self.x1, self.x2))

    def __repr__(self):
        return f"[{self.x1}] + [{self.x2}]j"


# The eight generators of O¹, as coefficient 4-tuples over {1, θ, j, θj}.
# Index k in a word means u_k for k <= 8 and u_{k-8}^{-1} for k > 8.
GENERATOR_COEFFS = (
    ((0, 0), (0, 1), (0, 0), (0, 0)),    # u1 = iθ
    ((0, 1), (0, 0), (1, 1), (0, 0)),    # u2 = i + (1+i)j
    ((0, 0), (1, 0), (1, 1), (0, 0)),    # u3 = θ + (1+i)j
    ((0, 0), (1, 0), (-1, -1), (0, 0)),  # u4 = θ − (1+i)j
    ((1, 1), (0, 0), (1, 1), (0, -1)),   # u5 = (1+i) + (1+iθ̄)j
    ((1, 1), (0, 0), (1, 0), (0, 1)),    # u6 = (1+i) + (1+iθ)j
    ((1, -1), (0, 0), (1, 1), (-1, 0)),  # u7 = (1−i) + (θ̄+i)j
    ((1, -1), (0, 0), (0, 1), (1, 0)),   # u8 = (1−i) + (θ+i)j
)

GENERATORS = tuple(OrderElement.from_coeffs(*c) for c in GENERATOR_COEFFS)


def generator(k: int) -> OrderElement:
    """Table entry k ∈ {1..16}: u_k for k ≤ 8, u_{k−8}^{-1} for k > 8."""
    if not 1 <= k <= 16:
        raise ValueError(f"generator index {k} out of range 1..16")
    return GENERATORS[k - 1] if k <= 8 else GENERATORS[k - 9].inverse()


def inverse_letter(k: int) -> int:
    return k - 8 if k > 8 else k + 8


def evaluate_word(letters) -> OrderElement:
    """Exact product u_{letters[0]} · u_{letters[1]} · ... (empty word = 1)."""
    acc = OrderElement.one()
    for k in letters:
        acc = acc * generator(k)
    return acc


def enumerate_norm_bounded(bound: float, tol: float = 1e-9) -> list[OrderElement]:
    """All u ∈ O¹ whose embedded matrix has squared Frobenius norm ≤ bound.

    The squared norm of an order element is the integer
    Q(x1) + Q(x2) with Q(a + bθ) = |a|² + |a+b|² + 2|b|², so membership at
    the boundary is decided exactly; `tol` only widens the real-valued bound
    before truncation.  Elements are returned in a fixed canonical order.
    """
    if bound < 2:
        raise ValueError("no determinant-one matrix has squared Frobenius norm < 2")
    b_int = int(np.floor(bound + tol))

    lim_a = int(np.floor(np.sqrt(b_int)))
    lim_b = int(np.floor(np.sqrt(b_int / 2.0)))
    span_a = np.arange(-lim_a, lim_a + 1, dtype=np.int64)
    span_b = np.arange(-lim_b, lim_b + 1, dtype=np.int64)
    ar, ai, br, bi = [g.ravel() for g in np.meshgrid(span_a, span_a, span_b, span_b,
                                                     indexing="ij")]
    q = ar * ar + ai * ai + (ar + br) ** 2 + (ai + bi) ** 2 + 2 * (br * br + bi * bi)
    keep = q <= b_int
    ar, ai, br, bi, q = ar[keep], ai[keep], br[keep], bi[keep], q[keep]
    # relative norm N(a + bθ) = a² + ab − b² over Z[i]
    n_re = ar * ar - ai * ai + ar * br - ai * bi - (br * br - bi * bi)
    n_im = 2 * ar * ai + ar * bi + ai * br - 2 * br * bi

    by_norm: dict[tuple[int, int], list[int]] = {}
    for idx in range(len(q)):
        by_norm.setdefault((int(n_re[idx]), int(n_im[idx])), []).append(idx)

    units = []
    for k2 in range(len(q)):
        # reduced norm N(x1) − i·N(x2) = 1  ⇒  N(x1) = 1 + i·N(x2)
        want = (1 - int(n_im[k2]), int(n_re[k2]))
        for k1 in by_norm.get(want, ()):
            if q[k1] + q[k2] <= b_int:
                units.append((int(q[k1] + q[k2]),
                              (int(ar[k1]), int(ai[k1]), int(br[k1]), int(bi[k1])),
                              (int(ar[k2]), int(ai[k2]), int(br[k2]), int(bi[k2]))))
    units.sort()
    return [OrderElement.from_coeffs((c1[0], c1[1]), (c1[2], c1[3]),
                                     (c2[0], c2[1]), (c2[2], c2[3]))
            for _, c1, c2 in units]


class GaussianMatrix:
    """Small dense matrix over Z[i], exact; used for unimodular transforms."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]

    @classmethod
    def identity(cls, n: int) -> "GaussianMatrix":
        return cls([[GAUSS_ONE if i == j else GAUSS_ZERO for j in range(n)]
                    for i in range(n)])

    @classmethod
    def from_complex_rounded(cls, arr) -> tuple["GaussianMatrix", float]:
        """Round a complex array to Z[i] entries; returns (matrix, max residual)."""
        arr = np.asarray(arr, dtype=complex)
        re = np.floor(arr.real + 0.5)
        im = np.floor(arr.imag + 0.5)
        resid = float(np.max(np.maximum(np.abs(arr.real - re), np.abs(arr.imag - im))))
        rows = [[GaussInt(int(re[i, j]), int(im[i, j])) for j in range(arr.shape[1])]
                for i in range(arr.shape[0])]
        return cls(rows), resid

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]))

    def __matmul__(self, o: "GaussianMatrix") -> "GaussianMatrix":
        n, m = self.shape
        m2, p = o.shape
        assert m == m2
        out = []
        for i in range(n):
            row = []
            for j in range(p):
                acc = GAUSS_ZERO
                for k in range(m):
                    acc = acc + self.rows[i][k] * o.rows[k][j]
                row.append(acc)
            out.append(row)
        return GaussianMatrix(out)

    def det(self) -> GaussInt:
        n, m = self.shape
        assert n == m
        if n == 1:
            return self.rows[0][0]
        acc = GAUSS_ZERO
        sign = 1
        for j in range(n):
            minor = GaussianMatrix([r[:j] + r[j + 1:] for r in self.rows[1:]])
            term = self.rows[0][j] * minor.det()
            acc = acc + term if sign > 0 else acc - term
            sign = -sign
        return acc

    def inverse(self) -> "GaussianMatrix":
        """Exact inverse; the determinant must be a unit of Z[i]."""
        d = self.det()
        if not d.is_unit():
            raise NonUnitError(f"matrix determinant {d} is not a Z[i] unit")
        n = self.shape[0]
        dinv = d.conj()  # for |d| = 1, d^{-1} = conj(d)
        adj = []
        for i in range(n):
            row = []
            for j in range(n):
                minor = GaussianMatrix([
                    [self.rows[r][c] for c in range(n) if c != i]
                    for r in range(n) if r != j
                ])
                cof = minor.det()
                if (i + j) % 2:
                    cof = -cof
                row.append(cof * dinv)
            adj.append(row)
        return GaussianMatrix(adj)

    def to_complex(self) -> np.ndarray:
        return np.array([[e.to_complex() for e in r] for r in self.rows],
                        dtype=complex)

    def __eq__(self, o):
        return isinstance(o, GaussianMatrix) and self.rows == o.rows

    def __repr__(self):
        return "GaussianMatrix(" + "; ".join(
            " ".join(repr(e) for e in r) for r in self.rows) + ")"
