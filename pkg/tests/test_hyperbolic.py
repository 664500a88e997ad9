import numpy as np
import pytest

from algred.exact_order import generator
from algred.hyperbolic import (H3Point, Isometry, J, act, cosh_dist,
                               orbit_point, random_sl2)


def test_point_requires_positive_height():
    with pytest.raises(ValueError):
        H3Point(0.0, 0.0, 0.0)


def test_identity_fixes_points():
    p = H3Point(0.3, -0.7, 2.1)
    q = act(np.eye(2, dtype=complex), p)
    assert (q.x, q.y, q.r) == pytest.approx((p.x, p.y, p.r), abs=1e-15)


def test_diagonal_action_on_base_point():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.standard_normal() + 1j * rng.standard_normal()
        g = np.diag([a, 1 / a])
        q = act(g, J)
        assert q.x == pytest.approx(0.0, abs=1e-12)
        assert q.y == pytest.approx(0.0, abs=1e-12)
        assert q.r == pytest.approx(abs(a) ** 2, rel=1e-12)


def test_unitary_fixes_base_point():
    rng = np.random.default_rng(1)
    for _ in range(20):
        # random SU(2); the stabilizer of J is exactly the unitary subgroup
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        a, b = z / np.linalg.norm(z)
        g = np.array([[a, b], [-np.conj(b), np.conj(a)]])
        q = act(g, J)
        assert max(abs(q.x), abs(q.y), abs(q.r - 1.0)) < 1e-12


def test_cosh_dist_basics():
    p = H3Point(0.2, 0.4, 1.7)
    assert cosh_dist(p, p) == pytest.approx(1.0)
    q = H3Point(1.2, -0.4, 0.3)
    assert cosh_dist(p, q) == cosh_dist(q, p)
    assert cosh_dist(p, q) > 1.0


def test_distance_to_generator_images():
    # unit u1 moves J along the axis; u2 to height 1/3
    q1 = act(generator(1).embed(), J)
    assert cosh_dist(J, q1) == pytest.approx(1.5, abs=1e-12)
    q2 = act(generator(2).embed(), J)
    assert cosh_dist(J, q2) == pytest.approx(3.0, abs=1e-12)


def test_frobenius_identity_bulk():
    rng = np.random.default_rng(2)
    g = random_sl2(rng, 10_000)
    frob = np.sum(np.abs(g) ** 2, axis=(1, 2))
    pts = [orbit_point(m) for m in g]
    vals = np.array([2.0 * cosh_dist(J, p) for p in pts])
    assert np.max(np.abs(frob - vals) / frob) <= 1e-9


def test_action_is_isometric():
    rng = np.random.default_rng(3)
    for _ in range(200):
        g = random_sl2(rng)
        p = H3Point(*rng.standard_normal(2), rng.random() + 0.1)
        q = H3Point(*rng.standard_normal(2), rng.random() + 0.1)
        d0 = cosh_dist(p, q)
        d1 = cosh_dist(act(g, p), act(g, q))
        assert abs(d1 - d0) <= 1e-9 * d0


def test_sign_quotient():
    rng = np.random.default_rng(4)
    g = random_sl2(rng)
    p = H3Point(0.3, 0.4, 0.8)
    q1, q2 = act(g, p), act(-g, p)
    assert (q1.x, q1.y, q1.r) == (q2.x, q2.y, q2.r)


def test_action_is_a_group_action():
    rng = np.random.default_rng(5)
    for _ in range(100):
        g, h = random_sl2(rng, 2)
        p = H3Point(*rng.standard_normal(2), rng.random() + 0.1)
        q1 = act(g @ h, p)
        q2 = act(g, act(h, p))
        assert max(abs(q1.x - q2.x), abs(q1.y - q2.y), abs(q1.r - q2.r)) <= 1e-9


def test_isometry_class():
    with pytest.raises(ValueError):
        Isometry(1, 0, 0, 2)
    g = Isometry.from_matrix(generator(3).embed())
    gi = g.inverse()
    prod = (g @ gi).matrix()
    assert np.allclose(prod, np.eye(2), atol=1e-12)
    p = act(g, J)
    q = orbit_point(g)
    assert (p.x, p.y, p.r) == pytest.approx((q.x, q.y, q.r), abs=1e-14)
