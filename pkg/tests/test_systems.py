"""Fibers, affine maps, extension to paths, and system validation."""

import itertools
import math

import numpy as np
import pytest

from kfractal import fixtures
from kfractal.attractor import SetTuple
from kfractal.kgraph import Path, compose, enumerate_paths, factorize, vertex_path
from kfractal.systems import (
    exact_path_map,
    EUCLIDEAN,
    MAX,
    AffineMap,
    Ball,
    Box,
    Polygon,
    check_k_dense,
    check_k_surjective,
    check_proper_dense,
    exact_after,
    extend_map,
    grid_points,
    lipschitz_bound,
    validate_system,
)


# ---------------------------------------------------------------------------
# regions


def test_box_basics():
    b = Box((0.0, 0.0), (2.0, 1.0))
    assert b.diameter(EUCLIDEAN) == pytest.approx(math.sqrt(5))
    assert b.diameter(MAX) == 2.0
    assert np.allclose(b.centroid(), [1.0, 0.5])
    assert b.contains([[0.5, 0.5], [2.5, 0.5]]).tolist() == [True, False]
    assert b.contains_ball([1.0, 0.5], 0.5)
    assert not b.contains_ball([1.0, 0.5], 0.6)


def test_ball_basics():
    s = Ball((0.0, 0.0), 1.0)
    assert s.diameter() == 2.0
    assert s.contains([[0.0, 0.999], [0.0, 1.001]]).tolist() == [True, False]
    assert s.contains_ball([0.25, 0.0], 0.75)
    assert not s.contains_ball([0.25, 0.0], 0.8)


def test_polygon_orientation_and_containment():
    tri = Polygon(((0, 0), (1, 0), (0, 1)))
    rev = Polygon(((0, 1), (1, 0), (0, 0)))  # clockwise input, normalized
    pts = [[0.25, 0.25], [0.75, 0.75], [0.0, 0.0]]
    assert tri.contains(pts).tolist() == [True, False, True]
    assert rev.contains(pts).tolist() == [True, False, True]
    assert tri.contains_ball([0.25, 0.25], 0.2)
    assert not tri.contains_ball([0.25, 0.25], 0.3)


def test_polygon_rejects_nonconvex():
    with pytest.raises(ValueError):
        Polygon(((0, 0), (2, 0), (1, 0.2), (0, 2)))


def test_grid_points_cover_box():
    pts = grid_points(Box((0.0, 0.0), (1.0, 1.0)), 0.25)
    assert len(pts) == 25
    assert pts.min() == 0.0 and pts.max() == 1.0


# ---------------------------------------------------------------------------
# lipschitz bounds


def test_lipschitz_scaled_identity():
    m = AffineMap.of(np.eye(2) / 2, (0, 0), "v", "v")
    assert lipschitz_bound(m, EUCLIDEAN) == pytest.approx(0.5)
    assert lipschitz_bound(m, MAX) == pytest.approx(0.5)


def test_lipschitz_unit_direction():
    m = AffineMap.of([[0.5, 0.0], [0.0, 1.0]], (0, 0), "v", "v")
    assert lipschitz_bound(m, EUCLIDEAN) == pytest.approx(1.0)
    assert lipschitz_bound(m, MAX) == pytest.approx(1.0)


def test_lipschitz_antidiagonal():
    m = AffineMap.of([[0.0, 0.5], [0.5, 0.0]], (0, 0), "v", "v")
    assert lipschitz_bound(m, EUCLIDEAN) == pytest.approx(0.5)
    assert lipschitz_bound(m, MAX) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# extension to paths


def test_extend_vertex_is_identity():
    sys = fixtures.sierpinski()
    m = extend_map(sys, vertex_path(sys.graph, "v"))
    pts = np.array([[0.3, 0.2]])
    assert np.array_equal(m.apply(pts), pts)


def test_extend_two_step_hand_composite():
    # a0 after a1 on the triangle: z -> z/4 + p1/4 + p0/2, computed by hand
    sys = fixtures.sierpinski()
    p = Path(sys.graph, "v", ("a0", "a1"))
    m = extend_map(sys, p)
    p0 = np.array(fixtures.TRIANGLE[0])
    p1 = np.array(fixtures.TRIANGLE[1])
    z = np.array([0.2, 0.3])
    expected = z / 4 + p1 / 4 + p0 / 2
    assert np.allclose(m.apply(z), expected, atol=1e-15)


def test_extend_route_independent_exact_p2():
    # both orderings of a mixed word produce the same exact rational map
    sys = fixtures.half_product()
    p = Path(sys.graph, "v", ("b0", "r0"))
    direct = exact_path_map(sys, p)
    head, tail = factorize(p, (0, 1))  # r0 first route
    routed = exact_after(exact_path_map(sys, head), exact_path_map(sys, tail))
    assert direct == routed
    assert np.allclose(extend_map(sys, p).matrix, np.eye(2) / 2)


@pytest.mark.parametrize("name", ["s1", "p2", "p2c", "t0", "f3"])
def test_extend_all_decompositions_exact(name):
    """extend(p) equals extend(head) o extend(tail) exactly (in rationals)
    for every splitting of every path with |d| <= 3."""
    sys = fixtures.SYSTEMS[name]()
    g = sys.graph
    degs = [
        n
        for tot in range(4)
        for n in {
            tuple(v)
            for v in itertools.product(range(tot + 1), repeat=g.k)
            if sum(v) == tot
        }
    ]
    for v in g.vertices:
        for n in degs:
            for p in enumerate_paths(g, v, n):
                whole = exact_path_map(sys, p)
                for m in degs:
                    if not all(a <= b for a, b in zip(m, n)):
                        continue
                    head, tail = factorize(p, m)
                    split = exact_after(
                        exact_path_map(sys, head), exact_path_map(sys, tail)
                    )
                    assert split == whole
                # the float composite tracks the exact one to rounding
                fm = extend_map(sys, p)
                exact_mat = np.array(
                    [[float(x) for x in row] for row in whole[0]]
                )
                assert np.allclose(fm.matrix, exact_mat, atol=1e-12)


def test_extend_respects_composition_exact():
    sys = fixtures.cantor_product()
    g = sys.graph
    pool = [p for n in [(1, 0), (0, 1), (1, 1)] for p in enumerate_paths(g, "v", n)]
    for p, q in itertools.product(pool, pool):
        lhs = exact_path_map(sys, compose(p, q))
        rhs = exact_after(exact_path_map(sys, p), exact_path_map(sys, q))
        assert lhs == rhs


def test_extend_lipschitz_bounded_by_product():
    sys = fixtures.sierpinski()
    for p in enumerate_paths(sys.graph, "v", (3,)):
        lip = lipschitz_bound(extend_map(sys, p), sys.metric)
        assert lip <= 0.5 ** 3 + 1e-12


# ---------------------------------------------------------------------------
# validation


@pytest.mark.parametrize("name", ["s1", "p2", "p2c", "t0", "f3"])
def test_fixture_systems_validate(name):
    sys = fixtures.SYSTEMS[name]()
    rep = validate_system(sys)
    assert rep.ok, str(rep)


def test_strict_mode_rejects_p2():
    sys = fixtures.half_product()
    sys.mode = "strict"
    rep = validate_system(sys)
    assert "lipschitz" in rep.codes()
    # the offending bound is the unit singular value of the generators
    assert any("1" in f.detail for f in rep.findings)


def test_square_consistency_violation_reported():
    sys = fixtures.half_product()
    bad = dict(sys.generators)
    bad["b0"] = AffineMap.of([[0.5, 0.0], [0.0, 1.0 / 3.0]], (0.0, 0.0), "v", "v")
    sys.generators = bad
    rep = validate_system(sys)
    assert "square-consistency" in rep.codes()


def test_containment_violation_reported():
    sys = fixtures.sierpinski()
    bad = dict(sys.generators)
    bad["a1"] = AffineMap.of([[0.5, 0.0], [0.0, 0.5]], (0.9, 0.0), "v", "v")
    sys.generators = bad
    rep = validate_system(sys)
    assert "domain-containment" in rep.codes()


def test_missing_generator_is_structural():
    sys = fixtures.point_product()
    gens = dict(sys.generators)
    del gens["r"]
    sys.generators = gens
    rep = validate_system(sys)
    assert rep.structural() and "missing-map" in rep.codes()


# ---------------------------------------------------------------------------
# coverage checks


def _fiber_tuple(sys, pitch):
    return SetTuple.from_fibers(sys, pitch)


def test_k_surjective_square_tiling():
    sys = fixtures.half_product()
    h = 1 / 64
    sets = _fiber_tuple(sys, h)
    rep = check_k_surjective(sys, (1, 1), sets, tol=2 * h)
    assert rep.passed, rep.distances


def test_k_surjective_gasket_attractor():
    from kfractal.attractor import compute_attractor

    sys = fixtures.sierpinski()
    h = 1 / 128
    start = _fiber_tuple(sys, h)
    gasket, cert = compute_attractor(sys, (1,), start, tol=2 * h)
    assert cert.converged
    rep = check_k_surjective(sys, (1,), gasket, tol=2 * h)
    assert rep.passed, rep.distances


def test_k_surjective_fails_on_full_triangle_depth5():
    sys = fixtures.sierpinski()
    h = 1 / 128
    sets = _fiber_tuple(sys, h)
    rep = check_k_surjective(sys, (5,), sets, tol=2 * h)
    assert not rep.passed
    # the central hole of the gasket is macroscopic
    assert max(rep.distances.values()) > 0.05


def test_k_dense_matches_surjective_and_onto_generator():
    sys = fixtures.half_product()
    h = 1 / 64
    sets = _fiber_tuple(sys, h)
    surj = check_k_surjective(sys, (1, 0), sets, tol=2 * h)
    dens = check_k_dense(sys, (1, 0), sets, tol=2 * h)
    assert surj.distances == dens.distances
    # the two half-width strips tile the square, so degree (1,0) passes
    assert dens.passed


def test_k_surjective_flags_empty_cloud():
    sys = fixtures.point_product()
    sets = SetTuple.from_points(np.zeros(1), 1 / 64, {"v": np.empty((0, 1))})
    rep = check_k_surjective(sys, (1, 1), sets, tol=1.0)
    assert rep.empty_vertices == ["v"]
    assert not rep.passed


def test_proper_dense_reports():
    s1 = check_proper_dense(fixtures.sierpinski())
    assert s1.proper and not s1.dense
    p2 = check_proper_dense(fixtures.half_product())
    assert p2.proper and not p2.dense
    # a surjective generator is dense at any resolution
    onto = fixtures.point_product()
    onto.generators = {
        "b": AffineMap.of([[1.0]], (0.0,), "v", "v"),
        "r": AffineMap.of([[1.0]], (0.0,), "v", "v"),
    }
    assert check_proper_dense(onto).dense
