"""Monte-Carlo frame-error-rate harness and distribution diagnostics.

Per trial: draw an i.i.d. CN(0,1) channel and noise, encode random QAM
symbols, optionally apply MMSE-GDFE left preprocessing, normalize the
(possibly filtered) channel to determinant one, run the configured right
reduction (unit search or LLL) and detector, and count a frame error when
any symbol is wrong.  Trials are generated in fixed-size chunks from
counter-based Philox streams keyed on (seed, scheme index, SNR index), so
sweeps are reproducible bit-for-bit for a given backend and early stopping
(at chunk granularity, once `min_errors` frame errors are seen) cannot
change the random stream.

SNR is E_av/N0 with E_av the mean symbol energy of the unnormalized QAM
alphabet (2 for 4-QAM, 10 for 16-QAM).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.special import k1
from scipy.stats import chisquare

from . import golden_code
from ._backend import get_backend
from .fundamental_domain import COSH_RMIN, R_MIN
from .unit_search import get_table, compute_t

SCHEME_IDS = {"ar-zf": 0, "ar-zfdfe": 1, "lll-zf": 2, "lll-zfdfe": 3, "ml": 4}
SCHEMES = tuple(SCHEME_IDS)
DEFAULT_CHUNK = 4096

# Tail thresholds for the initial-size statistic T = ||H||_F^2 / |det H|
# = 2 cosh(distance from J to h1^{-1}(J)); see README for the acceptance
# bands tied to these.
T_TAIL_RMIN = 2.0 * (2.0 * COSH_RMIN ** 2 - 1.0)        # 2 cosh(2 R_min)
T_TAIL_5RMIN = 2.0 * math.cosh(10.0 * R_MIN)


class ConfigError(ValueError):
    """Invalid simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    alphabet: int = 4
    schemes: tuple[str, ...] = ("ar-zf",)
    snr_grid_db: tuple[float, ...] = tuple(range(0, 21, 2))
    frames_per_point: int = 100_000
    seed: int = 1
    min_errors: int = 200
    chunk: int = DEFAULT_CHUNK
    max_steps: int = 64
    lll_delta: float = 0.99

    def validate(self) -> None:
        if self.alphabet not in (4, 16):
            raise ConfigError(f"alphabet must be 4 or 16, got {self.alphabet}")
        if not self.schemes:
            raise ConfigError("schemes list is empty")
        for s in self.schemes:
            base = s.split("+")[0]
            if base not in SCHEME_IDS or s.count("+") > 1 or (
                    "+" in s and not s.endswith("+mmse")):
                raise ConfigError(f"unknown scheme '{s}'")
        if len(self.snr_grid_db) == 0:
            raise ConfigError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise ConfigError("snr grid must be strictly increasing")
        if self.frames_per_point < 1000:
            raise ConfigError("frames_per_point must be at least 1000")
        if self.min_errors < 1:
            raise ConfigError("min_errors must be positive")


@dataclass
class FERRecord:
    scheme: str
    snr_db: float
    frames: int
    frame_errors: int
    fer: float
    mean_steps: float
    step_histogram: dict[int, int] = field(default_factory=dict)
    resampled: int = 0   # singular channel draws replaced while generating


class SimConsts:
    """Immutable numeric tables shared by both backends."""

    def __init__(self, alphabet_size: int, max_steps: int = 64,
                 lll_delta: float = 0.99):
        basis = golden_code.build_basis()
        table = get_table()
        alpha = golden_code.qam_alphabet(alphabet_size)
        self.phi = np.ascontiguousarray(basis.phi)
        self.phi_h = np.ascontiguousarray(basis.phi_h)
        self.gmats = np.ascontiguousarray(table.mats)
        self.gimgs = np.ascontiguousarray(table.images)
        self.g_t = np.ascontiguousarray(
            np.stack([compute_t(u, basis).to_complex() for u in table.units]))
        self.g_tinv = np.ascontiguousarray(
            np.stack([self.g_t[k + 8 if k < 8 else k - 8] for k in range(16)]))
        self.points = alpha.points.astype(complex)
        self.level = float(alpha.level)
        self.energy = alpha.energy
        self.m = alphabet_size
        self.offset4 = golden_code.OFFSET * np.ones(4, dtype=complex)
        self.cand = np.ascontiguousarray(alpha.all_vectors())
        self.max_steps = int(max_steps)
        self.lll_delta = float(lll_delta)


_CONST_CACHE: dict[tuple, SimConsts] = {}


def get_consts(alphabet: int, max_steps: int = 64, lll_delta: float = 0.99) -> SimConsts:
    key = (alphabet, max_steps, lll_delta)
    if key not in _CONST_CACHE:
        _CONST_CACHE[key] = SimConsts(alphabet, max_steps, lll_delta)
    return _CONST_CACHE[key]


def sample_channel(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """i.i.d. CN(0,1) 2×2 channels (variance 1/2 per real dimension)."""
    shape = (1 if n is None else n, 2, 2)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return h[0] if n is None else h


def _point_rng(seed: int, scheme_idx: int, snr_idx: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(scheme_idx, snr_idx))
    return np.random.Generator(np.random.Philox(ss))


def _draw_chunk(rng, consts, n):
    """Symbols, channels (singular draws resampled), unit-variance noise."""
    sym = rng.integers(0, consts.m, size=(n, 4))
    h = sample_channel(rng, n)
    resampled = 0
    while True:
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        bad = np.abs(det) <= 1e-12
        if not bad.any():
            break
        resampled += int(bad.sum())
        h[bad] = sample_channel(rng, int(bad.sum()))
    w = sample_channel(rng, n)  # same distribution; scaled by sqrt(N0) later
    return sym, h, w, resampled


def run_point(config: SimConfig, scheme: str, scheme_idx: int, snr_idx: int,
              consts: SimConsts | None = None, backend=None) -> FERRecord:
    """Simulate one (scheme, SNR) grid point with early stopping."""
    backend = backend or get_backend()
    consts = consts or get_consts(config.alphabet, config.max_steps,
                                  config.lll_delta)
    base = scheme.split("+")[0]
    mmse = scheme.endswith("+mmse")
    sid = SCHEME_IDS[base]
    snr_db = config.snr_grid_db[snr_idx]
    n0 = consts.energy / (10.0 ** (snr_db / 10.0))
    rng = _point_rng(config.seed, scheme_idx, snr_idx)

    frames = 0
    errors = 0
    resampled = 0
    hist = np.zeros(config.max_steps + 1, dtype=np.int64)
    while frames < config.frames_per_point and errors < config.min_errors:
        n = min(config.chunk, config.frames_per_point - frames)
        sym, h, w, res = _draw_chunk(rng, consts, n)
        resampled += res
        err, steps = backend.run_frames(sid, mmse, n0, sym, h, w, consts)
        frames += n
        errors += int(np.sum(err))
        if base.startswith("ar"):
            hist += np.bincount(steps, minlength=config.max_steps + 1)
    nonzero = {int(k): int(v) for k, v in enumerate(hist) if v}
    mean_steps = float(np.dot(np.arange(len(hist)), hist) / frames) \
        if nonzero else 0.0
    return FERRecord(scheme=scheme, snr_db=float(snr_db), frames=frames,
                     frame_errors=errors, fer=errors / frames,
                     mean_steps=mean_steps, step_histogram=nonzero,
                     resampled=resampled)


def run_sweep(config: SimConfig, threads: int = 1, progress=None) -> list[FERRecord]:
    """All (scheme, SNR) points of the configured grid, deterministically.

    Results are identical for any `threads`: every point owns an
    independent Philox stream and records are ordered scheme-major.
    """
    config.validate()
    consts = get_consts(config.alphabet, config.max_steps, config.lll_delta)
    backend = get_backend()
    jobs = [(si, gi, scheme)
            for si, scheme in enumerate(config.schemes)
            for gi in range(len(config.snr_grid_db))]
    records: dict[tuple[int, int], FERRecord] = {}
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(run_point, config, scheme, si, gi, consts,
                                backend): (si, gi)
                    for si, gi, scheme in jobs}
            for fut, key in futs.items():
                records[key] = fut.result()
                if progress:
                    progress(records[key])
    else:
        for si, gi, scheme in jobs:
            records[(si, gi)] = run_point(config, scheme, si, gi, consts, backend)
            if progress:
                progress(records[(si, gi)])
    return [records[(si, gi)] for si, gi, _ in jobs]


def step_stats(n_trials: int, seed: int = 0, chunk: int = 65536):
    """Distribution of walk lengths over random channels (SNR-independent).

    Returns (histogram array indexed by step count, mean).
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    consts = get_consts(4)
    backend = get_backend()
    rng = _point_rng(seed, 0, 0)
    hist = np.zeros(consts.max_steps + 1, dtype=np.int64)
    done = 0
    while done < n_trials:
        n = min(chunk, n_trials - done)
        h = sample_channel(rng, n)
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        good = np.abs(det) > 1e-12
        h1 = h[good] / np.sqrt(det[good])[:, None, None]
        steps, _, _, _ = backend.reduce_batch(
            h1, consts.gmats, consts.gimgs, consts.g_t, consts.g_tinv,
            consts.max_steps)
        hist += np.bincount(steps, minlength=consts.max_steps + 1)
        done += n
    total = int(hist.sum())
    mean = float(np.dot(np.arange(len(hist)), hist) / total)
    return hist, mean


def t_density(t):
    """Density 12·sqrt(t²−4)/t⁴ of T = ||H||²_F/|det H| on t > 2."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = t > 2.0
    out[m] = 12.0 * np.sqrt(t[m] ** 2 - 4.0) / t[m] ** 4
    return out


def t_cdf(t: float) -> float:
    if t <= 2.0:
        return 0.0
    return math.tanh(math.acosh(t / 2.0)) ** 3


def z_density(z):
    """Density z² K₁(z)/2 of Z = 2|det H|."""
    z = np.asarray(z, dtype=float)
    return np.where(z > 0, z * z * k1(np.maximum(z, 1e-300)) / 2.0, 0.0)


def z_density_integral(z: float) -> float:
    """Same density via the integral form (z/4)·∫ exp(−z²/2u − u/2) du."""
    val = quad(lambda u: math.exp(-z * z / (2.0 * u) - u / 2.0), 0.0, np.inf,
               limit=200)[0]
    return z / 4.0 * val


@dataclass
class DistributionReport:
    n: int
    t_chi2_p: float
    z_chi2_p: float
    t_norm_quadrature: float
    z_norm_quadrature: float
    t_mean_empirical: float
    t_mean_quadrature: float
    p_tail_rmin: float
    tail_rmin_band: tuple[float, float]
    tail_5rmin_count: int

    @property
    def passed(self) -> bool:
        lo, hi = self.tail_rmin_band
        return (self.t_chi2_p > 0.01 and self.z_chi2_p > 0.01
                and abs(self.t_norm_quadrature - 1.0) <= 1e-8
                and abs(self.z_norm_quadrature - 1.0) <= 1e-8
                and lo <= self.p_tail_rmin <= hi
                and self.tail_5rmin_count == 0
                and abs(self.t_mean_empirical / self.t_mean_quadrature - 1.0) <= 0.02)


def distribution_checks(n: int, seed: int = 0) -> DistributionReport:
    """Empirical fits of the size statistic T and of Z = 2|det H|.

    The tail probabilities use the thresholds 2cosh(2·R_min) and
    2cosh(10·R_min) on T; the first tail sits near 0.038 and the second is
    of order 1e-10, so it should never be observed at this sample size.
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    rng = _point_rng(seed, 1, 0)
    h = sample_channel(rng, n)
    det = np.abs(h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0])
    frob = np.sum(np.abs(h) ** 2, axis=(1, 2))
    t = frob / np.maximum(det, 1e-300)
    z = 2.0 * det

    # chi-square against the analytic densities, equal-probability bins;
    # inverse CDF of T: t(p) = 2 cosh(atanh(p^{1/3})) = 2/sqrt(1 - p^{2/3})
    t_edges = np.array([2.0] + [2.0 / math.sqrt(1.0 - (k / 30.0) ** (2.0 / 3.0))
                                for k in range(1, 30)] + [np.inf])
    t_counts, _ = np.histogram(t, t_edges)
    t_expected = np.full(30, n / 30.0)
    t_p = float(chisquare(t_counts, t_expected).pvalue)

    z_edges = np.quantile(z, np.linspace(0, 1, 31))
    z_edges[0], z_edges[-1] = 0.0, np.inf
    z_counts, _ = np.histogram(z, z_edges)
    z_exp = np.array([quad(lambda u: float(z_density(u)), z_edges[k],
                           min(z_edges[k + 1], 60.0), limit=200)[0]
                      for k in range(30)]) * n
    z_p = float(chisquare(z_counts, z_exp * (n / z_exp.sum())).pvalue)

    t_norm = quad(lambda u: float(t_density(u)), 2.0, np.inf, limit=400)[0]
    z_norm = quad(lambda u: float(z_density(u)), 0.0, np.inf, limit=400)[0]
    t_mean_quad = quad(lambda u: u * float(t_density(u)), 2.0, np.inf,
                       limit=400)[0]

    return DistributionReport(
        n=n,
        t_chi2_p=t_p,
        z_chi2_p=z_p,
        t_norm_quadrature=t_norm,
        z_norm_quadrature=z_norm,
        t_mean_empirical=float(t.mean()),
        t_mean_quadrature=t_mean_quad,
        p_tail_rmin=float(np.mean(t > T_TAIL_RMIN)),
        tail_rmin_band=(0.030, 0.046),
        tail_5rmin_count=int(np.sum(t > T_TAIL_5RMIN)),
    )


class SlopeError(ValueError):
    """Not enough well-measured high-SNR points to fit a diversity slope."""


def diversity_slope(records: list[FERRecord], scheme: str, top: int = 3,
                    min_errors: int = 100) -> float:
    """Least-squares slope of log10(FER) against −snr_db/10 over the highest
    SNR points of `scheme` with at least `min_errors` frame errors."""
    pts = sorted([r for r in records
                  if r.scheme == scheme and r.frame_errors >= min_errors
                  and r.fer > 0.0],
                 key=lambda r: r.snr_db)
    if len(pts) < top:
        raise SlopeError(f"only {len(pts)} usable points for {scheme}")
    pts = pts[-top:]
    x = np.array([-r.snr_db / 10.0 for r in pts])
    y = np.log10([r.fer for r in pts])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def snr_at_fer(records: list[FERRecord], scheme: str, target: float) -> float:
    """SNR (dB) where the scheme's FER curve crosses `target`, by log-linear
    interpolation; NaN when the curve never crosses."""
    pts = sorted([r for r in records if r.scheme == scheme and r.fer > 0],
                 key=lambda r: r.snr_db)
    logt = math.log10(target)
    for a, b in zip(pts, pts[1:]):
        la, lb = math.log10(a.fer), math.log10(b.fer)
        if (la - logt) * (lb - logt) <= 0 and la != lb:
            return a.snr_db + (b.snr_db - a.snr_db) * (la - logt) / (la - lb)
    return float("nan")


def write_fer_csv(records: list[FERRecord], fh) -> None:
    fh.write("scheme,snr_db,frames,frame_errors,fer,mean_steps\n")
    for r in records:
        fh.write(f"{r.scheme},{r.snr_db:g},{r.frames},{r.frame_errors},"
                 f"{r.fer:.6g},{r.mean_steps:.6g}\n")


def write_steps_csv(records: list[FERRecord], fh) -> None:
    total: dict[int, int] = {}
    for r in records:
        for k, v in r.step_histogram.items():
            total[k] = total.get(k, 0) + v
    fh.write("steps,count\n")
    for k in sorted(total):
        fh.write(f"{k},{total[k]}\n")
