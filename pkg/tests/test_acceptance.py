"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s`.  The FER sweep and the
runtime limits assume the compiled backend (built by `pip install -e .`);
the pure-python fallback computes the same numbers but much more slowly.
"""

import math
import time

import numpy as np
import pytest

from algred import backend_name
from algred import sim_engine as se
from algred.exact_order import (GAUSS_UNITS, evaluate_word, generator)
from algred.fundamental_domain import (ball_radii, build_polyhedron,
                                       covering_bound, expected_spheres,
                                       expected_vertices, volume_mc)
from algred.golden_code import (build_basis, left_mult_matrix, ml_detect,
                                qam_alphabet, zf_detect)
from algred.hyperbolic import J, cosh_dist, orbit_point, random_sl2
from algred.unit_search import compute_t, reduce

COMPILED = backend_name() == "compiled"

RELATIONS = [
    ([3, 3, 3], -1), ([4, 4, 4], -1), ([2, 1] * 3, 1), ([2, 9] * 3, 1),
    ([6, 3, 7], -1), ([6, 7, 12], -1), ([8, 3, 5], -1), ([12, 8, 5], -1),
    ([1, 11, 1, 12], 1), ([13, 2, 13, 9, 8, 2, 8, 1], 1),
    ([6, 10, 6, 1, 15, 10, 15, 9], 1),
]


def _report(num, ok, detail):
    line = f"ACCEPTANCE {num:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def poly():
    return build_polyhedron()


@pytest.fixture(scope="module")
def fer_records():
    cfg = se.SimConfig(
        alphabet=4,
        schemes=("ar-zf", "ar-zf+mmse", "ar-zfdfe+mmse",
                 "lll-zf+mmse", "lll-zfdfe+mmse", "ml"),
        snr_grid_db=tuple(float(x) for x in range(0, 21, 2)),
        frames_per_point=400_000,
        seed=20240809,
        min_errors=200,
    )
    t0 = time.perf_counter()
    records = se.run_sweep(cfg)
    return records, time.perf_counter() - t0


def test_criterion_01_exact_algebra():
    t0 = time.perf_counter()
    one = evaluate_word([])
    ok = all(evaluate_word(w) == (one if s > 0 else -one) for w, s in RELATIONS)
    for k in range(1, 17):
        u = generator(k)
        ok &= (u * u.inverse()).is_one()
        inv = u.inverse()
        # adjugate identity: inverse swaps x1 with σ(x1) and negates x2
        ok &= inv.x1 == u.x1.conj() and inv.x2 == -u.x2
    dt = time.perf_counter() - t0
    ok &= dt < 1.0
    _report(1, ok, f"11 relations and 16 adjugate inverses exact in {dt:.3f} s")


def test_criterion_02_frobenius_identity():
    rng = np.random.default_rng(101)
    g = random_sl2(rng, 10_000)
    t0 = time.perf_counter()
    frob = np.sum(np.abs(g) ** 2, axis=(1, 2))
    vals = np.array([2.0 * cosh_dist(J, orbit_point(m)) for m in g])
    rel = float(np.max(np.abs(frob - vals) / frob))
    dt = time.perf_counter() - t0
    ok = rel <= 1e-9 and dt < 1.0
    _report(2, ok, f"max relative error {rel:.2e} over 1e4 matrices in {dt:.2f} s")


def test_criterion_03_unimodularity():
    rng = np.random.default_rng(102)
    worst = 0.0
    ok = True
    basis = build_basis()
    for _ in range(1000):
        letters = rng.integers(1, 17, size=rng.integers(1, 21)).tolist()
        u = evaluate_word(letters)
        t = compute_t(u, basis)  # raises above residual 1e-6
        ok &= t.det() in GAUSS_UNITS
    _report(3, ok, "1e3 random words (length <= 20): Gaussian-integer T with "
                   "unit determinant")


def test_criterion_04_residual_bound():
    rng = np.random.default_rng(103)
    consts = se.get_consts(4)
    backend = se.get_backend()
    n = 100_000
    h1 = random_sl2(rng, n)
    _, ubar, _, _ = backend.reduce_batch(h1, consts.gmats, consts.gimgs,
                                         consts.g_t, consts.g_tinv, 64)
    e = np.einsum("nij,njk->nik", h1, ubar)
    frob = np.sum(np.abs(e) ** 2, axis=(1, 2))
    bound = 2 * 2.2361 + 1e-3
    ok = float(frob.max()) <= bound
    _report(4, ok, f"max ||E||^2_F = {frob.max():.6f} <= {bound:.4f}, "
                   f"mean {frob.mean():.4f} over 1e5 channels")


def test_criterion_05_step_statistics():
    t0 = time.perf_counter()
    hist, mean = se.step_stats(100_000, seed=104)
    dt = time.perf_counter() - t0
    total = hist.sum()
    p1, p2 = hist[1] / total, hist[2] / total
    p_gt11 = hist[12:].sum()
    ok = (abs(mean - 1.923) <= 0.05 and abs(p1 - 0.382) <= 0.010
          and abs(p2 - 0.394) <= 0.010 and p_gt11 == 0)
    if COMPILED:
        ok &= dt < 60.0
    _report(5, ok, f"mean {mean:.4f}, P(1) {p1:.4f}, P(2) {p2:.4f}, "
                   f"P(>11) {p_gt11}, in {dt:.1f} s")


@pytest.fixture(scope="module")
def dist_report():
    return se.distribution_checks(100_000, seed=105)


def test_criterion_06_search_radius_tail(dist_report):
    p = dist_report.p_tail_rmin
    ok = 0.030 <= p <= 0.046
    _report(6, ok, f"empirical tail probability {p:.4f} in [0.030, 0.046] "
                   "(reference value 0.038)")


def test_criterion_07_distribution_fits(dist_report):
    r = dist_report
    ok = (r.t_chi2_p > 0.01 and r.z_chi2_p > 0.01
          and abs(r.t_norm_quadrature - 1.0) <= 1e-8
          and abs(r.z_norm_quadrature - 1.0) <= 1e-8
          and r.tail_5rmin_count == 0)
    _report(7, ok, f"chi2 p-values T {r.t_chi2_p:.3f} / Z {r.z_chi2_p:.3f}; "
                   f"quadrature norms {r.t_norm_quadrature:.9f} / "
                   f"{r.z_norm_quadrature:.9f}")


def test_criterion_08_dirichlet_domain(poly):
    exp_s = expected_spheres()
    ok = len(poly.constraints) == 16 and len(poly.vertices) == 24
    for s in exp_s.values():
        ok &= any(abs(f.center[0] - s.center[0]) <= 1e-9
                  and abs(f.center[1] - s.center[1]) <= 1e-9
                  and abs(f.radius - s.radius) <= 1e-9
                  and f.interior == s.interior for f in poly.constraints)
    for name, p in expected_vertices().items():
        d = np.min(np.linalg.norm(poly.vertices
                                  - np.array([p.x, p.y, p.r]), axis=1))
        ok &= d <= 1e-9
    rmin, rmax, _ = ball_radii(poly)
    ok &= abs(rmin - 1.9069) <= 1e-3 and abs(rmax - 2.2360) <= 1e-3
    _report(8, ok, f"16 bisectors + 24 vertices match closed forms to 1e-9; "
                   f"cosh R_min {rmin:.5f}, cosh R_max {rmax:.5f}")


def test_criterion_09_volume(poly):
    t0 = time.perf_counter()
    v = volume_mc(10_000_000, seed=106, poly=poly)
    dt = time.perf_counter() - t0
    ok = (abs(v.estimate - 4.885149838) <= 0.02 * 4.885149838
          and v.estimate < 9.77029 and dt < 120.0)
    _report(9, ok, f"MC volume {v.estimate:.5f} ± {v.stderr:.5f} "
                   f"(target 4.88515, below 9.77029) in {dt:.1f} s")


def test_criterion_10_covering_bound():
    ab = covering_bound()
    ok = (abs(ab.sector - 36.2937) <= 1e-3
          and abs(ab.cap_u2 - 5.96793) <= 1e-3
          and abs(ab.cap_u4 - 5.34536) <= 1e-3
          and abs(ab.total - 9.75746) <= 5e-3)
    _report(10, ok, f"sector {ab.sector:.5f}, caps {ab.cap_u2:.5f} / "
                    f"{ab.cap_u4:.5f}, total {ab.total:.5f}")


def test_criterion_11_fer_behavior(fer_records):
    records, dt = fer_records
    slope = se.diversity_slope(records, "ar-zf", top=3)
    gap_zf = se.snr_at_fer(records, "ar-zf+mmse", 1e-3) \
        - se.snr_at_fer(records, "ml", 1e-3)
    gap_dfe = se.snr_at_fer(records, "ar-zfdfe+mmse", 1e-3) \
        - se.snr_at_fer(records, "ml", 1e-3)
    gap_lll_zf = abs(se.snr_at_fer(records, "ar-zf+mmse", 1e-2)
                     - se.snr_at_fer(records, "lll-zf+mmse", 1e-2))
    gap_lll_dfe = abs(se.snr_at_fer(records, "ar-zfdfe+mmse", 1e-2)
                      - se.snr_at_fer(records, "lll-zfdfe+mmse", 1e-2))
    slope_ml = se.diversity_slope(records, "ml", top=3)
    ok = (1.6 <= slope <= 2.4
          and slope_ml >= slope - 0.3
          and 2.5 <= gap_zf <= 5.5
          and gap_dfe < gap_zf
          and gap_lll_zf <= 1.0 and gap_lll_dfe <= 1.0)
    if COMPILED:
        ok &= dt < 600.0
    _report(11, ok, f"slope {slope:.3f}; ML gaps at 1e-3: ZF {gap_zf:.2f} dB, "
                    f"ZF-DFE {gap_dfe:.2f} dB; AR-LLL gaps at 1e-2: "
                    f"{gap_lll_zf:.2f} / {gap_lll_dfe:.2f} dB; sweep {dt:.0f} s")


def test_criterion_12_perfect_approximation_optimality():
    rng = np.random.default_rng(107)
    basis = build_basis()
    alpha = qam_alphabet(4)
    n0 = alpha.energy / 10 ** (15.0 / 10.0)
    agree = 0
    total = 1000
    for trial in range(total):
        letters = rng.integers(1, 17, size=rng.integers(1, 4)).tolist()
        u = evaluate_word(letters)
        h = u.embed()
        s = alpha.points[rng.integers(0, 4, 4)]
        w = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2)
        y = left_mult_matrix(h) @ (basis.phi @ s) + math.sqrt(n0) * w
        res = reduce(h)
        s_zf = zf_detect(y, res.e, res.t, basis, alpha)
        s_ml = ml_detect(y, left_mult_matrix(h) @ basis.phi, alpha)
        agree += int(np.array_equal(s_zf, s_ml))
    ok = agree == total
    _report(12, ok, f"AR-ZF decisions equal ML on {agree}/{total} noisy frames "
                    "with an embedded-unit channel")
