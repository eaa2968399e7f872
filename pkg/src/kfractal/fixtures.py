"""Shipped example systems.

Names used throughout the tests and docs:

* ``s1``  - rank 1, three half-scale maps on an equilateral triangle of unit
  diameter (the gasket system).
* ``p2``  - rank 2 product on the unit square; each color halves one
  coordinate, so only diagonal composites contract (relaxed mode); the
  attractor is the full square.
* ``p2c`` - rank 2 ternary product; the attractor is a product of two
  middle-thirds Cantor sets.
* ``t0``  - rank 2, one loop per color, both maps z/2 on [0, 1]; attractor {0}.
* ``f3``  - rank 3, one loop per color, z/2 on [0, 1].

Discrete fixtures for the exact checks: ``d1`` (singleton fibers), ``d2``
(two-point fibers, bijective tables), ``d3`` (two-point fibers, one constant
and one identity table per color).
"""

from __future__ import annotations

import math

from .duality import DiscreteSystem
from .kgraph import KGraph
from .systems import (
    EUCLIDEAN,
    MAX,
    RELAXED,
    STRICT,
    AffineMap,
    Box,
    MetricFiber,
    MWSystem,
    Polygon,
)


def _flip(blues, reds):
    return {(b, r): (r, b) for b in blues for r in reds}


def s1_graph() -> KGraph:
    return KGraph(1, ["v"], {1: [("a0", "v", "v"), ("a1", "v", "v"), ("a2", "v", "v")]})


def p2_graph() -> KGraph:
    return KGraph(
        2,
        ["v"],
        {
            1: [("b0", "v", "v"), ("b1", "v", "v")],
            2: [("r0", "v", "v"), ("r1", "v", "v")],
        },
        {(1, 2): _flip(("b0", "b1"), ("r0", "r1"))},
    )


def t0_graph() -> KGraph:
    return KGraph(
        2,
        ["v"],
        {1: [("b", "v", "v")], 2: [("r", "v", "v")]},
        {(1, 2): {("b", "r"): ("r", "b")}},
    )


def f3_graph() -> KGraph:
    return KGraph(
        3,
        ["v"],
        {1: [("x1", "v", "v")], 2: [("x2", "v", "v")], 3: [("x3", "v", "v")]},
        {
            (1, 2): {("x1", "x2"): ("x2", "x1")},
            (1, 3): {("x1", "x3"): ("x3", "x1")},
            (2, 3): {("x2", "x3"): ("x3", "x2")},
        },
    )


TRIANGLE = ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0))


def sierpinski() -> MWSystem:
    half = [[0.5, 0.0], [0.0, 0.5]]
    gens = {
        f"a{i}": AffineMap.of(half, (p[0] / 2.0, p[1] / 2.0), "v", "v")
        for i, p in enumerate(TRIANGLE)
    }
    return MWSystem(
        s1_graph(),
        {"v": MetricFiber("v", Polygon(TRIANGLE), EUCLIDEAN)},
        gens,
        ratio=0.5,
        mode=STRICT,
        name="s1",
    )


def half_product() -> MWSystem:
    gens = {}
    for i in range(2):
        gens[f"b{i}"] = AffineMap.of([[0.5, 0.0], [0.0, 1.0]], (i / 2.0, 0.0), "v", "v")
        gens[f"r{i}"] = AffineMap.of([[1.0, 0.0], [0.0, 0.5]], (0.0, i / 2.0), "v", "v")
    return MWSystem(
        p2_graph(),
        {"v": MetricFiber("v", Box((0.0, 0.0), (1.0, 1.0)), MAX)},
        gens,
        ratio=0.5,
        mode=RELAXED,
        name="p2",
    )


def cantor_product() -> MWSystem:
    third = 1.0 / 3.0
    gens = {}
    for i in range(2):
        gens[f"b{i}"] = AffineMap.of(
            [[third, 0.0], [0.0, 1.0]], (2.0 * i / 3.0, 0.0), "v", "v"
        )
        gens[f"r{i}"] = AffineMap.of(
            [[1.0, 0.0], [0.0, third]], (0.0, 2.0 * i / 3.0), "v", "v"
        )
    return MWSystem(
        p2_graph(),
        {"v": MetricFiber("v", Box((0.0, 0.0), (1.0, 1.0)), MAX)},
        gens,
        ratio=third,
        mode=RELAXED,
        name="p2c",
    )


def point_product() -> MWSystem:
    gens = {
        "b": AffineMap.of([[0.5]], (0.0,), "v", "v"),
        "r": AffineMap.of([[0.5]], (0.0,), "v", "v"),
    }
    return MWSystem(
        t0_graph(),
        {"v": MetricFiber("v", Box((0.0,), (1.0,)), EUCLIDEAN)},
        gens,
        ratio=0.5,
        mode=STRICT,
        name="t0",
    )


def rank3_loops() -> MWSystem:
    gens = {
        f"x{i}": AffineMap.of([[0.5]], (0.0,), "v", "v") for i in (1, 2, 3)
    }
    return MWSystem(
        f3_graph(),
        {"v": MetricFiber("v", Box((0.0,), (1.0,)), EUCLIDEAN)},
        gens,
        ratio=0.5,
        mode=STRICT,
        name="f3",
    )


SYSTEMS = {
    "s1": sierpinski,
    "p2": half_product,
    "p2c": cantor_product,
    "t0": point_product,
    "f3": rank3_loops,
}


# ---------------------------------------------------------------------------
# discrete fixtures (on the p2-shaped template)


def discrete_singleton() -> DiscreteSystem:
    g = p2_graph()
    tab = {"t": "t"}
    return DiscreteSystem(
        g, {"v": ("t",)}, {e: dict(tab) for e in g.edges}, name="d1"
    )


def discrete_covering() -> DiscreteSystem:
    g = p2_graph()
    ident = {"0": "0", "1": "1"}
    swap = {"0": "1", "1": "0"}
    return DiscreteSystem(
        g,
        {"v": ("0", "1")},
        {"b0": dict(ident), "b1": dict(swap), "r0": dict(ident), "r1": dict(swap)},
        name="d2",
    )


def discrete_constant() -> DiscreteSystem:
    g = p2_graph()
    const = {"0": "0", "1": "0"}
    ident = {"0": "0", "1": "1"}
    return DiscreteSystem(
        g,
        {"v": ("0", "1")},
        {"b0": dict(const), "b1": dict(ident), "r0": dict(const), "r1": dict(ident)},
        name="d3",
    )


DISCRETE = {
    "d1": discrete_singleton,
    "d2": discrete_covering,
    "d3": discrete_constant,
}
