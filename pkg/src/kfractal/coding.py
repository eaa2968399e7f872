"""Evaluating the path-space coding on finite prefixes, with error bars.

A long enough prefix pins an attractor point down to the image of the whole
source fiber under the prefix map, whose diameter the Lipschitz data bounds.
Everything here works with that certified radius; no infinite object is ever
materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attractor import SetTuple, directed_distance, hausdorff_distance
from .kgraph import (
    KGraph,
    KGraphError,
    Path,
    compose,
    count_paths,
    enumerate_paths,
    factorize,
)
from .systems import EUCLIDEAN, RELAXED, MWSystem, extend_map, lipschitz_bound


@dataclass(frozen=True)
class PathPrefix:
    """A finite truncation of an infinite path, tagged with its depth."""

    path: Path
    depth: tuple[int, ...]

    def __post_init__(self):
        if self.path.degree != tuple(self.depth):
            raise KGraphError(
                f"declared depth {self.depth} != path degree {self.path.degree}"
            )

    @classmethod
    def of(cls, path: Path) -> "PathPrefix":
        return cls(path, path.degree)

    def truncate(self, m) -> "PathPrefix":
        head, _ = factorize(self.path, tuple(m))
        return PathPrefix.of(head)


@dataclass(frozen=True)
class CodedPoint:
    point: np.ndarray
    error_radius: float
    vertex: str


def _metric_dist(a, b, metric):
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if metric == EUCLIDEAN:
        return float(np.linalg.norm(diff))
    return float(np.abs(diff).max())


def _require_codable(sys: MWSystem, depth) -> None:
    if sys.mode == RELAXED and any(c != depth[0] for c in depth):
        raise ValueError(
            f"relaxed mode codes only diagonal depths, got {tuple(depth)} "
            "(no contraction certificate off the diagonal)"
        )


def _basepoint(sys: MWSystem, vertex: str, rule):
    if rule == "centroid":
        return sys.fibers[vertex].basepoint()
    if callable(rule):
        return np.asarray(rule(vertex), dtype=float)
    return np.asarray(rule[vertex], dtype=float)


def code_point(sys: MWSystem, prefix: PathPrefix, basepoint="centroid") -> CodedPoint:
    """Image of the source fiber's basepoint under the prefix map.

    The returned error radius (prefix Lipschitz bound times source fiber
    diameter) covers the whole image, so any two basepoint rules give points
    within twice that radius of each other.
    """
    _require_codable(sys, prefix.depth)
    path = prefix.path
    m = extend_map(sys, path)
    b = _basepoint(sys, path.source_vertex, basepoint)
    err = lipschitz_bound(m, sys.metric) * sys.fibers[path.source_vertex].diameter()
    return CodedPoint(m.apply(b), err, path.range_vertex)


# ---------------------------------------------------------------------------
# prefix sampling


def sample_prefixes(
    g: KGraph,
    v: str,
    depth,
    count: int,
    seed: int = 0,
    exhaustive: bool = False,
    replace: bool = False,
) -> list[PathPrefix]:
    """Prefixes with range v and the given depth.

    ``exhaustive`` returns them all.  Otherwise ``count`` paths are drawn
    uniformly from vΛ^depth by weighting every edge choice with the number
    of completions (integer arithmetic, so the draw is exactly uniform and
    reproducible from the seed).  Asking for more samples than exist
    requires ``replace=True``.
    """
    depth = tuple(depth)
    if exhaustive:
        return [PathPrefix.of(p) for p in enumerate_paths(g, v, depth)]
    size = count_paths(g, v, depth)
    if count > size and not replace:
        raise ValueError(
            f"requested {count} samples from {size} paths; pass replace=True"
        )
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        at = v
        word: list[str] = []
        rem = list(depth)
        for color in range(1, g.k + 1):
            for _ in range(depth[color - 1]):
                rem[color - 1] -= 1
                cands = g.edges_with_range(color, at)
                weights = [
                    count_paths(g, g.edge(e).source_vertex, tuple(rem)) for e in cands
                ]
                total = sum(weights)
                r = int(rng.integers(0, total))
                acc = 0
                for e, w in zip(cands, weights):
                    acc += w
                    if r < acc:
                        word.append(e)
                        at = g.edge(e).source_vertex
                        break
        out.append(PathPrefix.of(Path(g, v, tuple(word))))
    return out


# ---------------------------------------------------------------------------
# intertwining


@dataclass
class IntertwiningReport:
    path: Path
    tol: float
    samples: int = 0
    failures: list = field(default_factory=list)
    max_distance: float = 0.0
    insufficient_depth: bool = False
    required_total_depth: int | None = None

    @property
    def passed(self) -> bool:
        return self.samples > 0 and not self.insufficient_depth and not self.failures


def required_depth(sys: MWSystem, target_error: float) -> int:
    """Smallest total degree whose coded error certifiably undershoots the
    target (via ratio^total * max fiber diameter)."""
    diam = max(f.diameter() for f in sys.fibers.values())
    if target_error >= diam:
        return 0
    return max(0, math.ceil(math.log(target_error / diam) / math.log(sys.ratio)))


def check_intertwining(
    sys: MWSystem, lam: Path, prefixes, tol: float, basepoint="centroid"
) -> IntertwiningReport:
    """Compare coding-then-mapping against prepend-then-coding.

    For each prefix x rooted at s(lam), code_point(lam x) and
    sigma_lam(code_point(x)) must land within tol plus the certified error
    radii.  Insufficient prefix depth (coded error > tol/4) is reported
    together with the depth that would suffice.
    """
    rep = IntertwiningReport(lam, tol)
    sig = extend_map(sys, lam)
    sig_lip = lipschitz_bound(sig, sys.metric)
    for prefix in prefixes:
        if prefix.path.range_vertex != lam.source_vertex:
            raise KGraphError("prefix not rooted at the path's source")
        base = code_point(sys, prefix, basepoint)
        if base.error_radius > tol / 4.0:
            rep.insufficient_depth = True
            rep.required_total_depth = required_depth(sys, tol / 4.0)
            return rep
        joined = PathPrefix.of(compose(lam, prefix.path))
        lhs = code_point(sys, joined, basepoint)
        rhs = sig.apply(base.point)
        dist = _metric_dist(lhs.point, rhs, sys.metric)
        allowed = tol + lhs.error_radius + sig_lip * base.error_radius
        rep.samples += 1
        rep.max_distance = max(rep.max_distance, dist)
        if dist > allowed:
            rep.failures.append((prefix.path, dist, allowed))
    return rep


# ---------------------------------------------------------------------------
# the coded cloud


def coded_cloud(
    sys: MWSystem,
    depth,
    pitch: float,
    origin=None,
    count: int | None = None,
    seed: int = 0,
    exhaustive: bool | None = None,
    basepoint="centroid",
) -> tuple[SetTuple, float]:
    """Per vertex, the snapped cloud of coded points over vΛ^depth, plus the
    uniform error radius valid for every point.

    Exhaustive enumeration is used whenever the path count stays below 10^6
    (and no explicit ``count`` was given); it runs as a leaf-to-root sweep
    applying one edge color at a time, which touches each composite exactly
    once.  Sampling is seeded and uniform.
    """
    from .attractor import contraction_factor

    depth = tuple(depth)
    _require_codable(sys, depth)
    g = sys.graph
    origin = np.zeros(sys.dim) if origin is None else np.asarray(origin, dtype=float)
    max_diam = max(f.diameter() for f in sys.fibers.values())
    err = contraction_factor(sys, depth) * max_diam

    sizes = {v: count_paths(g, v, depth) for v in g.vertices}
    if exhaustive is None:
        exhaustive = count is None and all(s <= 1_000_000 for s in sizes.values())

    if exhaustive:
        clouds = {
            v: np.atleast_2d(_basepoint(sys, v, basepoint)) for v in g.vertices
        }
        for color in range(g.k, 0, -1):
            for _ in range(depth[color - 1]):
                nxt = {}
                for v in g.vertices:
                    pieces = [
                        sys.generators[e].apply(clouds[g.edge(e).source_vertex])
                        for e in g.edges_with_range(color, v)
                    ]
                    nxt[v] = np.concatenate(pieces)
                clouds = nxt
        return SetTuple.from_points(origin, pitch, clouds), err

    if count is None:
        raise ValueError("non-exhaustive coding needs a sample count")
    clouds = {}
    for v in g.vertices:
        prefixes = sample_prefixes(
            g, v, depth, count, seed=seed, replace=count > sizes[v]
        )
        pts = [code_point(sys, x, basepoint).point for x in prefixes]
        clouds[v] = np.array(pts)
    return SetTuple.from_points(origin, pitch, clouds), err


def compare_attractor_coding(
    sys: MWSystem, attractor_sets: SetTuple, coded_sets: SetTuple, tol: float
) -> bool:
    """Whether the two constructions agree within tol at every vertex."""
    if not attractor_sets.same_grid(coded_sets):
        raise ValueError("grid mismatch between the two clouds")
    return all(
        hausdorff_distance(
            attractor_sets.points(v), coded_sets.points(v), sys.metric
        )
        <= tol
        for v in sys.graph.vertices
    )


@dataclass
class SubsystemReport:
    tol: float
    edge_distances: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(d <= self.tol for d in self.edge_distances.values())


def check_subsystem(sys: MWSystem, sets: SetTuple, tol: float) -> SubsystemReport:
    """One-sided containment of every generator image in the range cloud."""
    dists = {}
    for ident in sorted(sys.generators):
        e = sys.graph.edge(ident)
        src = sets.points(e.source_vertex)
        if len(src) == 0:
            raise ValueError(f"empty cloud at {e.source_vertex!r}")
        image = sys.generators[ident].apply(src)
        dists[ident] = directed_distance(
            image, sets.points(e.range_vertex), sys.metric
        )
    return SubsystemReport(tol, dists)
