"""Upper half-space model of hyperbolic 3-space and the SL2(C) action.

Points are (x, y, r) with r > 0 and z = x + iy on the boundary plane.  A
determinant-one matrix g = [[a, b], [c, d]] acts by

    g(z, r) = ( ((az+b)(c̄z̄+d̄) + a c̄ r²) / D ,  r / D ),
    D = |cz+d|² + |c|² r²,

and the distance satisfies cosh ρ(P,P') = 1 + d_euc(P,P')² / (2 r r').
The base point J = (0, 0, 1) ties the geometry to matrix size through
‖g‖²_F = 2 cosh ρ(J, g(J)); g and −g act identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DET_TOL = 1e-9


@dataclass(frozen=True)
class H3Point:
    x: float
    y: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"upper half-space requires r > 0, got r = {self.r}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


J = H3Point(0.0, 0.0, 1.0)


class Isometry:
    """Determinant-one 2×2 complex matrix acting on H³."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = complex(a), complex(b), complex(c), complex(d)
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > DET_TOL:
            raise ValueError(f"not determinant one: det = {det}")

    @classmethod
    def from_matrix(cls, m) -> "Isometry":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, o: "Isometry") -> "Isometry":
        return Isometry(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                        self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def __repr__(self):
        return f"Isometry({self.a}, {self.b}, {self.c}, {self.d})"


def _entries(g):
    if isinstance(g, Isometry):
        return g.a, g.b, g.c, g.d
    m = np.asarray(g, dtype=complex)
    return m[0, 0], m[0, 1], m[1, 0], m[1, 1]


def act(g, p: H3Point) -> H3Point:
    """Apply an isometry (Isometry or 2×2 array, det 1) to a point of H³."""
    a, b, c, d = _entries(g)
    z = p.z
    denom = abs(c * z + d) ** 2 + abs(c) ** 2 * p.r ** 2
    zs = ((a * z + b) * np.conj(c * z + d) + a * np.conj(c) * p.r ** 2) / denom
    return H3Point(zs.real, zs.imag, p.r / denom)


def orbit_point(g) -> H3Point:
    """g(J) by the closed form ((b d̄ + a c̄)/C, 1/C), C = |c|² + |d|²."""
    a, b, c, d = _entries(g)
    cc = abs(c) ** 2 + abs(d) ** 2
    z = (b * np.conj(d) + a * np.conj(c)) / cc
    return H3Point(z.real, z.imag, 1.0 / cc)


def cosh_dist(p: H3Point, q: H3Point) -> float:
    d2 = (p.x - q.x) ** 2 + (p.y - q.y) ** 2 + (p.r - q.r) ** 2
    return 1.0 + d2 / (2.0 * p.r * q.r)


def random_sl2(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Random determinant-one matrices: 4 i.i.d. CN(0,1) entries divided by the
    principal square root of the determinant."""
    n = 1 if size is None else size
    m = (rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2)))
    m /= np.sqrt(2.0)
    det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    m /= np.sqrt(det)[:, None, None]
    return m[0] if size is None else m
