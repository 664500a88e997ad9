"""Golden Code encoding, lattice representation, and detection chains.

A codeword carries four QAM symbols s = (s1..s4) as

    X = (1/√5) [[α x1, α x2], [ᾱ i σ(x2), ᾱ σ(x1)]],
    x1 = s1 + s2 θ,  x2 = s3 + s4 θ,  α = 1 + i θ̄,

i.e. X lies in the scaled ideal (1/√5) α O of the maximal order.  Vectorizing
column-major, φ(X) = Φ s with the unitary 4×4 generator matrix Φ built in
`build_basis`.  Detection works in the vectorized model y = E_l Φ (T s) + n
after a right reduction found a unimodular T: zero forcing inverts E_l Φ and
rounds onto the offset coset T c + 2 Z[i]^4 (the QAM alphabets live on
c + 2 Z[i]^4 with c = (1+i)(1,1,1,1)), ZF-DFE adds decision feedback on the
QR of the effective basis, and `ml_detect` is the exact baseline (exhaustive
for 4-QAM, depth-first Schnorr–Euchner search for 16-QAM).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .exact_order import GaussianMatrix

SQRT5 = np.sqrt(5.0)
THETA = (1.0 + SQRT5) / 2.0
THETA_BAR = 1.0 - THETA
ALPHA = 1.0 + 1j * THETA_BAR
ALPHA_BAR = 1.0 + 1j * THETA  # σ(α)

OFFSET = 1.0 + 1.0j  # QAM coset offset per component


class AlphabetError(ValueError):
    """Symbol vector outside the configured QAM alphabet."""


@dataclass(frozen=True)
class Alphabet:
    """Unnormalized square M-QAM on the odd Gaussian grid, M ∈ {4, 16}."""

    m: int
    points: np.ndarray = field(repr=False)
    level: int
    energy: float

    @property
    def size(self) -> int:
        return self.m

    def contains(self, s) -> bool:
        s = np.asarray(s, dtype=complex)
        re, im = s.real, s.imag
        ok = (np.abs(re) <= self.level) & (np.abs(im) <= self.level)
        ok &= (np.mod(re, 2) == 1) & (np.mod(im, 2) == 1)
        return bool(np.all(ok))

    def clamp(self, s) -> np.ndarray:
        """Componentwise nearest alphabet point (real and imaginary separately)."""
        s = np.asarray(s, dtype=complex)
        re = np.clip(2.0 * np.floor((s.real - 1.0) / 2.0 + 0.5) + 1.0,
                     -self.level, self.level)
        im = np.clip(2.0 * np.floor((s.imag - 1.0) / 2.0 + 0.5) + 1.0,
                     -self.level, self.level)
        return re + 1j * im

    def random_symbols(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.integers(0, self.m, size=(n, 4))
        return self.points[idx]

    def all_vectors(self) -> np.ndarray:
        """All M^4 symbol vectors, index-ordered (row k = digits of k base M)."""
        return np.array(list(product(self.points, repeat=4)), dtype=complex)


def qam_alphabet(m: int) -> Alphabet:
    if m == 4:
        pam = np.array([-1.0, 1.0])
    elif m == 16:
        pam = np.array([-3.0, -1.0, 1.0, 3.0])
    else:
        raise ValueError(f"unsupported alphabet size {m} (use 4 or 16)")
    pts = np.array([re + 1j * im for re in pam for im in pam])
    energy = float(np.mean(np.abs(pts) ** 2))
    return Alphabet(m=m, points=pts, level=int(pam[-1]), energy=energy)


def vectorize(x) -> np.ndarray:
    """Column-major vectorization [[a, c], [b, d]] -> (a, b, c, d)."""
    x = np.asarray(x, dtype=complex)
    return x.reshape(4, order="F").copy()


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v.reshape(2, 2, order="F").copy()


def left_mult_matrix(a) -> np.ndarray:
    """4×4 matrix of B ↦ AB in vectorized coordinates: blockdiag(A, A)."""
    a = np.asarray(a, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = a
    out[2:, 2:] = a
    return out


@dataclass(frozen=True)
class LatticeBasis:
    """Generator matrix Φ of the code lattice; unitary for the Golden Code."""

    phi: np.ndarray
    phi_h: np.ndarray  # Φ^H = Φ^{-1}

    def __post_init__(self):
        gram = self.phi_h @ self.phi
        if np.max(np.abs(gram - np.eye(4))) > 1e-12:
            raise ValueError("generator matrix is not unitary")


def build_basis() -> LatticeBasis:
    """Φ whose columns are φ(w_k) for the codeword basis w_k = encode(e_k)."""
    phi = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        phi[:, k] = vectorize(encode(e))
    return LatticeBasis(phi=phi, phi_h=phi.conj().T)


def encode(s, alphabet: Alphabet | None = None) -> np.ndarray:
    """Map four symbols to the 2×2 codeword matrix.

    When `alphabet` is given, s must lie inside it; omit it for raw lattice
    points (used by basis construction and tests).
    """
    s = np.asarray(s, dtype=complex)
    if s.shape != (4,):
        raise ValueError("symbol vector must have length 4")
    if alphabet is not None and not alphabet.contains(s):
        raise AlphabetError(f"symbols {s} outside {alphabet.m}-QAM alphabet")
    x1 = s[0] + s[1] * THETA
    x1c = s[0] + s[1] * THETA_BAR
    x2 = s[2] + s[3] * THETA
    x2c = s[2] + s[3] * THETA_BAR
    return np.array([[ALPHA * x1, ALPHA * x2],
                     [ALPHA_BAR * 1j * x2c, ALPHA_BAR * x1c]]) / SQRT5


def coset_round(v, offset) -> np.ndarray:
    """Round each component of v onto offset + 2 Z[i] (half-up per axis)."""
    v = np.asarray(v, dtype=complex)
    offset = np.asarray(offset, dtype=complex)
    t = (v - offset) / 2.0
    rounded = np.floor(t.real + 0.5) + 1j * np.floor(t.imag + 0.5)
    return offset + 2.0 * rounded


def _inv2(e) -> np.ndarray:
    det = e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]
    return np.array([[e[1, 1], -e[0, 1]], [-e[1, 0], e[0, 0]]], dtype=complex) / det


def _apply_blockdiag(a, v):
    out = np.empty(4, dtype=complex)
    out[:2] = a @ v[:2]
    out[2:] = a @ v[2:]
    return out


def _as_complex_t(t):
    return t.to_complex() if isinstance(t, GaussianMatrix) else np.asarray(t, dtype=complex)


def zf_detect(y1, e, t, basis: LatticeBasis, alphabet: Alphabet) -> np.ndarray:
    """Zero-forcing detection in the reduced frame.

    Model: y1 = E_l Φ z + n with z = T s on the coset T c + 2 Z[i]^4.
    Returns ŝ = T^{-1}[ẑ] clamped onto the alphabet.
    """
    y1 = np.asarray(y1, dtype=complex)
    tc = _as_complex_t(t)
    yt = basis.phi_h @ _apply_blockdiag(_inv2(np.asarray(e, dtype=complex)), y1)
    offset = tc @ (OFFSET * np.ones(4))
    z = coset_round(yt, offset)
    t_inv = t.inverse().to_complex() if isinstance(t, GaussianMatrix) else np.linalg.inv(tc)
    return alphabet.clamp(t_inv @ z)


def zfdfe_detect(y1, e, t, basis: LatticeBasis, alphabet: Alphabet) -> np.ndarray:
    """ZF with decision feedback on the QR of the effective basis E_l Φ."""
    y1 = np.asarray(y1, dtype=complex)
    tc = _as_complex_t(t)
    g = left_mult_matrix(e) @ basis.phi
    q, r = np.linalg.qr(g)
    yt = q.conj().T @ y1
    offset = tc @ (OFFSET * np.ones(4))
    z = np.zeros(4, dtype=complex)
    for k in range(3, -1, -1):
        v = (yt[k] - r[k, k + 1:] @ z[k + 1:]) / r[k, k]
        z[k] = coset_round(v, offset[k])
    t_inv = t.inverse().to_complex() if isinstance(t, GaussianMatrix) else np.linalg.inv(tc)
    return alphabet.clamp(t_inv @ z)


def ml_detect(y1, h_eff, alphabet: Alphabet) -> np.ndarray:
    """Exact maximum-likelihood argmin of ‖y1 − H_eff s‖ over the alphabet.

    4-QAM is searched exhaustively (256 candidates); 16-QAM uses a
    depth-first sphere search with Schnorr–Euchner ordering, which visits
    the exhaustive argmin by construction.
    """
    y1 = np.asarray(y1, dtype=complex)
    h_eff = np.asarray(h_eff, dtype=complex)
    if alphabet.m ** 4 <= 256:
        cands = alphabet.all_vectors()
        d = np.sum(np.abs(y1[None, :] - cands @ h_eff.T) ** 2, axis=1)
        return cands[int(np.argmin(d))].copy()
    return _sphere_ml(y1, h_eff, alphabet)


def _sphere_ml(y1, h_eff, alphabet: Alphabet) -> np.ndarray:
    q, r = np.linalg.qr(h_eff)
    yt = q.conj().T @ y1
    n = 4
    pts = alphabet.points
    best = [np.inf, None]
    symbols = np.zeros(n, dtype=complex)

    def descend(k, partial):
        if partial >= best[0]:
            return
        if k < 0:
            best[0] = partial
            best[1] = symbols.copy()
            return
        center = (yt[k] - r[k, k + 1:] @ symbols[k + 1:]) / r[k, k]
        order = np.argsort(np.abs(pts - center))
        scale = np.abs(r[k, k]) ** 2
        for idx in order:
            inc = scale * np.abs(pts[idx] - center) ** 2
            if partial + inc >= best[0]:
                break  # Schnorr–Euchner order: all remaining candidates are worse
            symbols[k] = pts[idx]
            descend(k - 1, partial + inc)

    descend(n - 1, 0.0)
    return best[1]


def mmse_gdfe_preprocess(h, snr: float) -> tuple[np.ndarray, np.ndarray]:
    """Left MMSE-GDFE filters for the 2×2 channel at the given symbol SNR.

    R is the upper-triangular Cholesky factor (positive real diagonal) of
    H^H H + I/snr, i.e. the R of a thin QR of the augmented [H; I/√snr];
    F = R^{-H} H^H.  The filtered model is F Y ≈ R X + noise, with R
    invertible even for singular H.
    """
    if not snr > 0:
        raise ValueError("snr must be positive")
    h = np.asarray(h, dtype=complex)
    g = h.conj().T @ h + np.eye(2) / snr
    r11 = np.sqrt(g[0, 0].real)
    r12 = g[0, 1] / r11
    r22 = np.sqrt(g[1, 1].real - abs(r12) ** 2)
    r = np.array([[r11, r12], [0.0, r22]], dtype=complex)
    f = np.linalg.solve(r.conj().T, h.conj().T)
    return f, r
