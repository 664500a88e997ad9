import math

import numpy as np
import pytest

from algred.exact_order import enumerate_norm_bounded, generator
from algred.fundamental_domain import (COSH_RMAX, COSH_RMIN, BoxViolationError,
                                       ball_radii, bisector_of,
                                       build_polyhedron, covering_bound,
                                       expected_spheres,
                                       expected_vertices, verify_tables,
                                       volume_mc, _lens_area)
from algred.hyperbolic import H3Point, J, act, cosh_dist, orbit_point

SQRT5 = math.sqrt(5.0)
THETA = (1 + SQRT5) / 2


@pytest.fixture(scope="module")
def poly():
    return build_polyhedron()


class TestBisectors:
    def test_u1_interior_sphere(self):
        s = bisector_of(generator(1))
        assert s.center == pytest.approx((0.0, 0.0), abs=1e-12)
        assert s.radius == pytest.approx(THETA, abs=1e-12)
        assert s.interior

    def test_u2_center_sign(self):
        # the reference table prints (1, 1); the vertex list forces (1, -1)
        s = bisector_of(generator(2))
        assert s.center == pytest.approx((1.0, -1.0), abs=1e-12)
        assert s.radius == pytest.approx(1.0, abs=1e-12)
        assert not s.interior

    def test_u5_closed_form(self):
        s = bisector_of(generator(5))
        assert s.center[0] == pytest.approx((-9 * SQRT5 + 19) / 22, abs=1e-12)
        assert s.center[1] == pytest.approx(-(9 + 5 * SQRT5) / 22, abs=1e-12)
        assert s.radius == pytest.approx(math.sqrt(7) / 22 * (7 - SQRT5), abs=1e-12)

    def test_membership_agrees_with_distance_inequality(self):
        rng = np.random.default_rng(0)
        for k in (1, 2, 5, 12):
            u = generator(k)
            s = bisector_of(u)
            img = orbit_point(u.embed())
            for _ in range(200):
                p = H3Point(rng.uniform(-2, 2), rng.uniform(-2, 2),
                            rng.uniform(0.05, 2.5))
                closer_to_j = cosh_dist(p, J) <= cosh_dist(p, img) + 1e-9
                margin = s.signed_margin(p.x, p.y, p.r)
                if abs(margin) > 1e-9:
                    assert closer_to_j == (margin > 0)

    def test_unitary_rejected(self):
        from algred.exact_order import OrderElement
        with pytest.raises(ValueError):
            bisector_of(OrderElement.one())


class TestPolyhedron:
    def test_face_and_vertex_counts(self, poly):
        assert len(poly.constraints) == 16
        assert len(poly.vertices) == 24

    def test_faces_match_expected_spheres(self, poly):
        exp = expected_spheres()
        for s in exp.values():
            hit = [f for f in poly.constraints
                   if abs(f.center[0] - s.center[0]) <= 1e-9
                   and abs(f.center[1] - s.center[1]) <= 1e-9
                   and abs(f.radius - s.radius) <= 1e-9
                   and f.interior == s.interior]
            assert len(hit) == 1

    def test_vertices_match_closed_forms(self, poly):
        exp = expected_vertices()
        assert len(exp) == 24
        for name, p in exp.items():
            d = np.min(np.linalg.norm(
                poly.vertices - np.array([p.x, p.y, p.r]), axis=1))
            assert d <= 1e-9, name

    def test_v2_closed_form(self, poly):
        v2 = np.array([(1 + THETA) / 2, -0.5, THETA / 2])
        assert np.min(np.linalg.norm(poly.vertices - v2, axis=1)) <= 1e-12

    def test_base_point_strictly_inside(self, poly):
        assert poly.contains(np.array([[0.0, 0.0, 1.0]]), tol=0.0)[0]

    def test_vertices_satisfy_all_constraints(self, poly):
        assert poly.contains(poly.vertices, tol=1e-9).all()

    def test_membership_vs_direct_distances(self, poly):
        units = [u for u in enumerate_norm_bounded(9) if u.frobenius_sq() > 2]
        imgs = [orbit_point(u.embed()) for u in units]
        rng = np.random.default_rng(1)
        pts = np.column_stack([rng.uniform(-1.8, 1.8, 10_000),
                               rng.uniform(-1.8, 1.8, 10_000),
                               rng.uniform(0.05, 2.0, 10_000)])
        got = poly.contains(pts, tol=0.0)
        for i in range(len(pts)):
            p = H3Point(*pts[i])
            d0 = cosh_dist(p, J)
            direct = all(d0 <= cosh_dist(p, q) + 1e-12 for q in imgs)
            if got[i] != direct:
                # disagreement allowed only on the boundary
                margins = [s.signed_margin(p.x, p.y, p.r)
                           for s in poly.constraints]
                assert min(abs(m) for m in margins) < 1e-7

    def test_tiling_locality(self, poly):
        rng = np.random.default_rng(2)
        inside = []
        while len(inside) < 100:
            p = np.column_stack([rng.uniform(-1.4, 1.4, 500),
                                 rng.uniform(-1.4, 1.4, 500),
                                 rng.uniform(0.3, 1.7, 500)])
            ok = poly.contains(p, tol=-1e-9)
            inside.extend(p[ok])
        inside = np.array(inside[:100])
        for k in range(1, 17):
            g = generator(k).embed()
            mapped = np.array([[q.x, q.y, q.r] for q in
                               (act(g, H3Point(*row)) for row in inside)])
            # interior points leave the polyhedron under every generator
            assert not poly.contains(mapped, tol=-1e-9).any()
            # but the shared face stays on the boundary: map the face center
            face = next(f for f in poly.constraints
                        if f.unit == generator(k) or f.unit == -generator(k))
            inc = [v for v in poly.vertices if face.on_sphere(*v)]
            centroid = np.mean(inc, axis=0)
            dir_xy = centroid[:2] - np.array(face.center)
            nrm = math.hypot(math.hypot(dir_xy[0], dir_xy[1]), centroid[2])
            w = np.array([face.center[0] + face.radius * dir_xy[0] / nrm,
                          face.center[1] + face.radius * dir_xy[1] / nrm,
                          face.radius * centroid[2] / nrm])
            assert poly.contains(w[None, :], tol=1e-7)[0]

    def test_constraint_set_symmetry(self, poly):
        centers = {(round(s.center[0], 9), round(s.center[1], 9),
                    round(s.radius, 9)) for s in poly.constraints}
        for sx, sy, swap in [(1, 1, True), (-1, -1, True), (-1, -1, False)]:
            mapped = set()
            for cx, cy, r in centers:
                x, y = (cy, cx) if swap else (cx, cy)
                mapped.add((round(sx * x, 9), round(sy * y, 9), r))
            assert mapped == centers

    def test_no_stronger_cut_from_larger_enumeration(self, poly):
        # elements up to norm 18 add no constraint through the polyhedron
        for u in enumerate_norm_bounded(18):
            if u.frobenius_sq() == 2:
                continue
            s = bisector_of(u)
            for v in poly.vertices:
                assert s.signed_margin(*v) > -1e-7

    def test_bound_validation(self):
        with pytest.raises(ValueError):
            build_polyhedron(bound=8.0)


def test_verify_tables_all_pass(poly):
    rep = verify_tables(poly)
    failed = [r for r in rep.rows if not r.passed]
    assert not failed, failed
    # the four known misprints are reported as corrected details
    notes = [r for r in rep.rows if r.detail]
    assert len(notes) == 4


def test_ball_radii(poly):
    rmin, rmax, c_o = ball_radii(poly)
    assert rmin == pytest.approx(COSH_RMIN, abs=1e-9)
    assert rmax == pytest.approx(COSH_RMAX, abs=1e-9)
    assert rmax ** 2 == pytest.approx(5.0, abs=1e-4)
    assert c_o == pytest.approx(2 * SQRT5, abs=1e-9)


class TestVolume:
    def test_estimate_brackets_target(self, poly):
        v = volume_mc(2_000_000, seed=10, poly=poly)
        assert abs(v.estimate - 4.885149838) <= max(4 * v.stderr, 0.02 * 4.885)
        assert v.estimate < 9.77029

    def test_stderr_scaling(self, poly):
        v1 = volume_mc(1_000_000, seed=11, poly=poly)
        v2 = volume_mc(4_000_000, seed=12, poly=poly)
        # quadrupling the sample size halves the standard error (within 20%)
        assert v2.stderr == pytest.approx(v1.stderr / 2, rel=0.2)

    def test_box_violation_detected(self, poly):
        with pytest.raises(BoxViolationError):
            volume_mc(1_000_000, seed=13, poly=poly,
                      box=((-1.2, 1.2), (-1.2, 1.2), (0.31, 1.6)))

    def test_sample_floor(self, poly):
        with pytest.raises(ValueError):
            volume_mc(1000, poly=poly)


class TestCoveringBound:
    def test_reference_values(self):
        ab = covering_bound()
        assert ab.sector == pytest.approx(36.2937, abs=1e-3)
        assert ab.cap_u2 == pytest.approx(5.96793, abs=1e-3)
        assert ab.cap_u4 == pytest.approx(5.34536, abs=1e-3)
        assert ab.diff_u1inv == pytest.approx(2.49982, abs=1e-3)
        assert ab.diff_u3inv == pytest.approx(0.70490, abs=1e-3)
        assert ab.total == pytest.approx(9.75746, abs=5e-3)
        assert ab.total < 9.77029

    def test_lens_area_against_grid_oracle(self):
        # 2-D grid integration of the disk intersection indicator
        rng = np.random.default_rng(3)
        xs = np.linspace(-3, 3, 1201)
        x, y = np.meshgrid(xs, xs)
        cell = (xs[1] - xs[0]) ** 2
        for _ in range(5):
            r1, r2 = rng.uniform(0.3, 1.8, 2)
            d = rng.uniform(0.0, r1 + r2 + 0.3)
            inside = ((x ** 2 + y ** 2 <= r1 ** 2)
                      & ((x - d) ** 2 + y ** 2 <= r2 ** 2))
            approx = inside.sum() * cell
            assert _lens_area(r1, r2, d) == pytest.approx(approx, abs=2e-2)
