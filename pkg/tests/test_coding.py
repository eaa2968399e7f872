"""Prefix coding: certified points, sampling, intertwining, coded clouds."""

import numpy as np
import pytest

from kfractal import fixtures
from kfractal.attractor import SetTuple, compute_attractor
from kfractal.coding import (
    PathPrefix,
    check_intertwining,
    check_subsystem,
    code_point,
    coded_cloud,
    compare_attractor_coding,
    required_depth,
    sample_prefixes,
)
from kfractal.kgraph import KGraphError, Path, path_from_word, vertex_path
from kfractal.systems import AffineMap, extend_map


def word_path(g, ids):
    return path_from_word(g, "v", tuple(ids))


# ---------------------------------------------------------------------------
# code_point


def test_prefix_depth_must_match():
    g = fixtures.s1_graph()
    with pytest.raises(KGraphError):
        PathPrefix(Path(g, "v", ("a0",)), (2,))


def test_prefix_truncation_consistency():
    sys = fixtures.sierpinski()
    p = word_path(sys.graph, ["a0", "a2", "a1", "a0"])
    prefix = PathPrefix.of(p)
    trunc = prefix.truncate((2,))
    assert trunc.path.edges == ("a0", "a2")


def test_code_point_t0_nested_contraction():
    sys = fixtures.point_product()
    for n in (1, 2, 4):
        p = path_from_word(sys.graph, "v", ("b",) * n + ("r",) * n)
        coded = code_point(sys, PathPrefix.of(p))
        assert abs(float(coded.point[0])) <= 2.0 ** (-2 * n)
        assert coded.error_radius <= 2.0 ** (-2 * n) + 1e-15


def test_code_point_s1_constant_word_hits_fixed_corner():
    sys = fixtures.sierpinski()
    p = word_path(sys.graph, ["a0"] * 10)
    coded = code_point(sys, PathPrefix.of(p))
    assert np.linalg.norm(coded.point - np.array([0.0, 0.0])) <= 2.0 ** -10
    assert coded.error_radius == pytest.approx(2.0 ** -10, rel=1e-12)


def test_code_point_alternating_word_linear_solve_oracle():
    # the limit of the alternating word is the fixed point of the two-step
    # composite; solve (I - M) z = t independently
    sys = fixtures.sierpinski()
    p = word_path(sys.graph, ["a0", "a1"] * 5)
    coded = code_point(sys, PathPrefix.of(p))
    two = extend_map(sys, word_path(sys.graph, ["a0", "a1"]))
    z = np.linalg.solve(np.eye(2) - two.matrix, two.shift)
    assert np.linalg.norm(coded.point - z) <= 2.0 ** -10 + 1e-12


def test_code_point_error_bound_strict_mode():
    sys = fixtures.sierpinski()
    for p in [word_path(sys.graph, ["a1"] * 4), word_path(sys.graph, ["a2", "a0"])]:
        coded = code_point(sys, PathPrefix.of(p))
        n = sum(p.degree)
        assert coded.error_radius <= sys.ratio ** n * 1.0 + 1e-12


def test_code_point_relaxed_requires_diagonal():
    sys = fixtures.half_product()
    off = path_from_word(sys.graph, "v", ("b0",))
    with pytest.raises(ValueError):
        code_point(sys, PathPrefix.of(off))
    ok = path_from_word(sys.graph, "v", ("b0", "r0"))
    coded = code_point(sys, PathPrefix.of(ok))
    assert coded.error_radius <= 0.5 + 1e-12


def test_basepoint_rules_stay_within_twice_error():
    sys = fixtures.sierpinski()
    p = word_path(sys.graph, ["a1", "a2", "a0", "a1"])
    a = code_point(sys, PathPrefix.of(p), basepoint="centroid")
    b = code_point(sys, PathPrefix.of(p), basepoint={"v": np.array([0.0, 0.0])})
    assert np.linalg.norm(a.point - b.point) <= a.error_radius + b.error_radius


# ---------------------------------------------------------------------------
# sampling


def test_sample_exhaustive_lists_all():
    g = fixtures.s1_graph()
    prefixes = sample_prefixes(g, "v", (3,), count=0, exhaustive=True)
    assert len(prefixes) == 27
    assert len({p.path for p in prefixes}) == 27


def test_sample_depth_zero_is_vertex():
    g = fixtures.s1_graph()
    prefixes = sample_prefixes(g, "v", (0,), count=1, seed=1)
    assert prefixes[0].path == vertex_path(g, "v")


def test_sample_deterministic_under_seed():
    g = fixtures.p2_graph()
    a = sample_prefixes(g, "v", (2, 2), count=12, seed=42)
    b = sample_prefixes(g, "v", (2, 2), count=12, seed=42)
    assert [p.path for p in a] == [q.path for q in b]
    c = sample_prefixes(g, "v", (2, 2), count=12, seed=43)
    assert [p.path for p in a] != [q.path for q in c]


def test_sample_replacement_contract():
    g = fixtures.s1_graph()
    with pytest.raises(ValueError):
        sample_prefixes(g, "v", (1,), count=10)
    got = sample_prefixes(g, "v", (1,), count=10, replace=True)
    assert len(got) == 10


def test_sample_uniform_weighting_two_vertex(g_two_vertex):
    # weighted edge choice must produce only genuine paths, and in the long
    # run every path of the small space
    prefixes = sample_prefixes(g_two_vertex, "u", (1, 1), count=400, seed=7, replace=True)
    from kfractal.kgraph import enumerate_paths

    space = set(enumerate_paths(g_two_vertex, "u", (1, 1)))
    seen = {p.path for p in prefixes}
    assert seen <= space
    assert seen == space  # 4 paths, 400 draws


# ---------------------------------------------------------------------------
# intertwining


def test_intertwining_vertex_is_exact():
    sys = fixtures.sierpinski()
    v = vertex_path(sys.graph, "v")
    prefixes = sample_prefixes(sys.graph, "v", (12,), count=5, seed=3)
    rep = check_intertwining(sys, v, prefixes, tol=0.01)
    assert rep.passed
    assert rep.max_distance == 0.0


def test_intertwining_s1_generator():
    sys = fixtures.sierpinski()
    lam = Path(sys.graph, "v", ("a2",))
    prefixes = sample_prefixes(sys.graph, "v", (12,), count=50, seed=11)
    rep = check_intertwining(sys, lam, prefixes, tol=1e-3)
    assert rep.passed
    assert rep.samples == 50


def test_intertwining_insufficient_depth_reported():
    sys = fixtures.sierpinski()
    lam = Path(sys.graph, "v", ("a0",))
    shallow = sample_prefixes(sys.graph, "v", (2,), count=4, seed=2)
    rep = check_intertwining(sys, lam, shallow, tol=1e-6)
    assert not rep.passed
    assert rep.insufficient_depth
    assert rep.required_total_depth == required_depth(sys, 1e-6 / 4)
    assert rep.required_total_depth > 2


def test_intertwining_detects_square_corruption():
    # breaking the commutation between the colors splits the two evaluation
    # routes apart; a rank-2 control is needed because in rank 1 both routes
    # apply the same composite
    sys = fixtures.cantor_product()
    bad = dict(sys.generators)
    bad["r0"] = AffineMap.of(bad["r0"].matrix, (0.05, 0.0), "v", "v")
    sys.generators = bad
    lam = path_from_word(sys.graph, "v", ("b0", "r0"))
    prefixes = sample_prefixes(sys.graph, "v", (8, 8), count=20, seed=5)
    rep = check_intertwining(sys, lam, prefixes, tol=1e-3)
    assert not rep.passed
    assert rep.failures


def test_intertwining_rejects_misrooted_prefixes():
    from kfractal.kgraph import KGraph
    from kfractal.systems import Box, MetricFiber, MWSystem

    g = KGraph(1, ["u", "w"], {1: [("a", "u", "w"), ("b", "w", "u")]})
    sys = MWSystem(
        g,
        {v: MetricFiber(v, Box((0.0,), (1.0,)), "euclidean") for v in ("u", "w")},
        {
            "a": AffineMap.of([[0.5]], (0.0,), "w", "u"),
            "b": AffineMap.of([[0.5]], (0.0,), "u", "w"),
        },
        ratio=0.5,
        mode="strict",
    )
    lam = Path(g, "u", ("a",))  # source is w
    rooted_at_u = [PathPrefix.of(Path(g, "u", ("a", "b")))]
    with pytest.raises(KGraphError):
        check_intertwining(sys, lam, rooted_at_u, tol=1.0)


# ---------------------------------------------------------------------------
# coded clouds


def test_coded_cloud_t0_single_point():
    sys = fixtures.point_product()
    sets, err = coded_cloud(sys, (6, 6), pitch=1 / 256)
    pts = sets.points("v")
    assert len(pts) == 1
    assert abs(float(pts[0, 0])) <= err + 1 / 256


def test_coded_cloud_matches_attractor_s1():
    sys = fixtures.sierpinski()
    h = 1 / 128
    depth = 7
    K, cert = compute_attractor(sys, (1,), SetTuple.from_fibers(sys, h), tol=2 * h)
    T2, err = coded_cloud(sys, (depth,), pitch=h)
    assert cert.converged
    assert err == pytest.approx(0.5 ** depth, rel=1e-12)
    tol = 4 * h + err
    assert compare_attractor_coding(sys, K, T2, tol)


def test_coded_cloud_sampled_subset_of_exhaustive():
    sys = fixtures.cantor_product()
    h = 1 / 243
    full, _ = coded_cloud(sys, (5, 5), pitch=h)
    sampled, _ = coded_cloud(sys, (5, 5), pitch=h, count=500, seed=9, exhaustive=False)
    full_rows = {tuple(r) for r in full.clouds["v"].tolist()}
    assert all(tuple(r) in full_rows for r in sampled.clouds["v"].tolist())


def test_coded_cloud_p2c_product_oracle():
    # coded cloud against the attractor computed by iteration
    sys = fixtures.cantor_product()
    h = 1 / 243
    K, cert = compute_attractor(sys, (1, 1), SetTuple.from_fibers(sys, h), tol=2 * h)
    T2, err = coded_cloud(sys, (5, 5), pitch=h)
    assert cert.converged
    assert compare_attractor_coding(sys, K, T2, tol=4 * h + err)


def test_coded_cloud_sampled_20k_covers_product():
    # heavy sampling misses a handful of the 4096 depth-(6,6) cells; the
    # missed cells sit within a parent cell of a covered sibling, so the
    # gap stays inside the certified band
    sys_ = fixtures.cantor_product()
    h = 1 / 729
    K, cert = compute_attractor(sys_, (1, 1), SetTuple.from_fibers(sys_, h), tol=2 * h)
    assert cert.converged
    T2, err = coded_cloud(sys_, (6, 6), pitch=h, count=20000, seed=17, exhaustive=False)
    assert compare_attractor_coding(sys_, K, T2, tol=4 * h + 2 * err)


def test_compare_requires_same_grid():
    sys = fixtures.sierpinski()
    a = SetTuple.from_points(np.zeros(2), 1 / 64, {"v": np.zeros((1, 2))})
    b = SetTuple.from_points(np.zeros(2), 1 / 128, {"v": np.zeros((1, 2))})
    with pytest.raises(ValueError):
        compare_attractor_coding(sys, a, b, tol=1.0)


def test_compare_negative_control_different_fractals():
    s1 = fixtures.sierpinski()
    p2c = fixtures.cantor_product()
    h = 1 / 128
    K, _ = compute_attractor(s1, (1,), SetTuple.from_fibers(s1, h), tol=2 * h)
    T2, err = coded_cloud(p2c, (4, 4), pitch=h)
    assert not compare_attractor_coding(s1, K, T2, tol=4 * h + err)


def test_check_subsystem_gasket_invariant():
    sys = fixtures.sierpinski()
    h = 1 / 128
    K, cert = compute_attractor(sys, (1,), SetTuple.from_fibers(sys, h), tol=2 * h)
    rep = check_subsystem(sys, K, tol=cert.error_bound + 2 * h)
    assert rep.passed, rep.edge_distances


def test_check_subsystem_corner_singleton_fails():
    sys = fixtures.sierpinski()
    single = SetTuple.from_point(sys, 1 / 128, {"v": np.array([0.0, 0.0])})
    rep = check_subsystem(sys, single, tol=0.01)
    assert not rep.passed
    assert rep.edge_distances["a1"] > 0.2


def test_prefix_consistency_across_depths():
    sys = fixtures.sierpinski()
    deep = word_path(sys.graph, ["a0", "a1", "a2", "a0", "a1", "a2", "a0", "a1", "a2", "a0"])
    shallow = PathPrefix.of(deep).truncate((6,))
    c_deep = code_point(sys, PathPrefix.of(deep))
    c_shallow = code_point(sys, shallow)
    assert np.linalg.norm(c_deep.point - c_shallow.point) <= c_shallow.error_radius
