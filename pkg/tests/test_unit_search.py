import math

import numpy as np
import pytest

from algred.exact_order import (GAUSS_UNITS, GaussianMatrix,
                                enumerate_norm_bounded, evaluate_word,
                                generator)
from algred.fundamental_domain import COSH_RMAX
from algred.hyperbolic import random_sl2
from algred.unit_search import (SingularChannelError, compute_t,
                                compute_t_exact, get_table, normalize_channel,
                                reduce)


def test_normalize_examples():
    h1, det = normalize_channel(np.eye(2))
    assert np.allclose(h1, np.eye(2)) and det == 1
    h1, det = normalize_channel(2 * np.eye(2))
    assert np.allclose(h1, np.eye(2)) and det == pytest.approx(4)
    m = 3 * np.array([[1, 1], [0, 1]], dtype=complex)
    h1, det = normalize_channel(m)
    assert np.allclose(h1, [[1, 1], [0, 1]]) and det == pytest.approx(9)


def test_normalize_singular_raises():
    with pytest.raises(SingularChannelError):
        normalize_channel(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_generator_table_invariants():
    table = get_table()
    assert len(table.units) == 16
    for k in range(8):
        assert (table.units[k] * table.units[k + 8]).is_one()
    dets = np.linalg.det(table.mats)
    assert np.allclose(dets, 1.0, atol=1e-12)


def test_reduce_identity():
    res = reduce(np.eye(2, dtype=complex))
    assert res.steps == 1
    assert res.word.letters == ()
    assert res.unit_exact.is_one()
    assert np.allclose(res.e, np.eye(2))


def test_reduce_embedded_generator():
    res = reduce(generator(2).embed())
    assert res.steps == 2
    assert res.unit_exact == generator(2)
    assert np.allclose(res.e, np.eye(2), atol=1e-12)


def test_reduce_rejects_unnormalized():
    with pytest.raises(ValueError):
        reduce(2 * np.eye(2, dtype=complex))


def test_reduce_deterministic():
    rng = np.random.default_rng(0)
    h1 = random_sl2(rng, 50)
    for m in h1:
        a = reduce(m)
        b = reduce(m)
        assert a.word == b.word and a.steps == b.steps


def test_word_evaluates_to_unit():
    rng = np.random.default_rng(1)
    for m in random_sl2(rng, 100):
        res = reduce(m)
        assert res.word.evaluate() == res.unit_exact
        # E * embed(unit) recovers the channel
        assert np.linalg.norm(res.e @ res.unit_numeric - m) <= 1e-9


def test_residual_bound_small_batch():
    rng = np.random.default_rng(2)
    bound = 2 * COSH_RMAX + 1e-6
    for m in random_sl2(rng, 2000):
        res = reduce(m)
        assert res.residual_frob_sq <= bound


def test_reduce_matches_brute_force_oracle():
    """The walk attains the global minimum of ||u h1^{-1}||_F^2 over units.

    Oracle: enumerate every unit u with ||u||_F^2 below the triangle-
    inequality bound 2cosh(dist(J, h1^{-1}J) + R_max) and minimize directly.
    """
    rng = np.random.default_rng(3)
    n = 1000
    h1 = random_sl2(rng, n)
    frob = np.sum(np.abs(h1) ** 2, axis=(1, 2))
    rho0 = np.arccosh(np.maximum(frob / 2.0, 1.0))
    bounds = 2.0 * np.cosh(rho0 + math.acosh(COSH_RMAX))
    cap = float(np.max(bounds))
    units = enumerate_norm_bounded(cap)
    mats = np.stack([u.embed() for u in units])
    for i in range(n):
        hinv = np.linalg.inv(h1[i])
        vals = np.sum(np.abs(mats @ hinv) ** 2, axis=(1, 2))
        best = float(vals.min())
        res = reduce(h1[i])
        assert res.residual_frob_sq <= best * (1 + 1e-9)
        assert res.residual_frob_sq >= best * (1 - 1e-9)


class TestComputeT:
    def test_identity(self):
        t = compute_t(evaluate_word([]))
        assert t == GaussianMatrix.identity(4)

    def test_generator_is_unimodular(self):
        t = compute_t(generator(1))
        assert t.det() in GAUSS_UNITS

    def test_matches_exact_computation(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            letters = rng.integers(1, 17, size=rng.integers(0, 9)).tolist()
            u = evaluate_word(letters)
            assert compute_t(u) == compute_t_exact(u)

    def test_multiplicative_over_words(self):
        w235 = compute_t(evaluate_word([2, 3, 5]))
        prod = compute_t(generator(2)) @ compute_t(generator(3)) \
            @ compute_t(generator(5))
        assert w235 == prod

    def test_long_words_round_cleanly(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            letters = rng.integers(1, 17, size=20).tolist()
            t = compute_t(evaluate_word(letters))
            assert t.det() in GAUSS_UNITS

    def test_nonunit_rejected(self):
        from algred.exact_order import OrderElement
        theta = OrderElement.from_coeffs((0, 0), (1, 0), (0, 0), (0, 0))
        with pytest.raises(ValueError):
            compute_t(theta)
