"""Vertex fibers, affine edge contractions, and system validation.

A system attaches a compact region in R^d to every vertex and an affine map
to every edge of the underlying graph; maps extend to all paths by
composition.  Because the maps are affine, the consistency demanded by the
factorization squares is a matrix identity, checked here in exact rational
arithmetic over the stored float entries (every float is a rational, so the
check has no tolerance).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .kgraph import KGraph, Path, enumerate_paths
from .report import AXIOM, STRUCTURAL, ValidationReport

EUCLIDEAN = "euclidean"
MAX = "max"

# slack for geometric containment tests; boundary-touching images are legal
CONTAINMENT_EPS = 1e-9


# ---------------------------------------------------------------------------
# regions


class Box:
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or np.any(self.hi < self.lo):
            raise ValueError("degenerate box")

    @property
    def dim(self):
        return self.lo.size

    def diameter(self, metric=EUCLIDEAN):
        side = self.hi - self.lo
        return float(np.linalg.norm(side)) if metric == EUCLIDEAN else float(side.max())

    def centroid(self):
        return (self.lo + self.hi) / 2.0

    def contains(self, pts, tol=CONTAINMENT_EPS):
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def contains_ball(self, center, radius, tol=CONTAINMENT_EPS):
        center = np.asarray(center, dtype=float)
        return bool(
            np.all(center - self.lo >= radius - tol)
            and np.all(self.hi - center >= radius - tol)
        )

    def corner_points(self):
        axes = [(float(a), float(b)) for a, b in zip(self.lo, self.hi)]
        return np.array(list(itertools.product(*axes)))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


class Ball:
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return self.center.size

    def diameter(self, metric=EUCLIDEAN):
        return 2.0 * self.radius

    def centroid(self):
        return self.center.copy()

    def contains(self, pts, tol=CONTAINMENT_EPS):
        pts = np.atleast_2d(pts)
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol

    def contains_ball(self, center, radius, tol=CONTAINMENT_EPS):
        center = np.asarray(center, dtype=float)
        return bool(
            np.linalg.norm(center - self.center) + radius <= self.radius + tol
        )

    def corner_points(self):
        return None  # handled through contains_ball

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


class Polygon:
    """Convex polygon in the plane; corners are normalized to CCW order."""

    def __init__(self, corners):
        pts = np.asarray(corners, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ValueError("polygon needs >= 3 planar corners")
        area2 = 0.0
        for i in range(len(pts)):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % len(pts)]
            area2 += x0 * y1 - x1 * y0
        if area2 < 0:
            pts = pts[::-1].copy()
        self.corners = pts
        edges = np.roll(pts, -1, axis=0) - pts
        nxt = np.roll(edges, -1, axis=0)
        cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        if np.any(cross < -1e-12 * np.abs(cross).max()):
            raise ValueError("polygon is not convex")

    @property
    def dim(self):
        return 2

    def diameter(self, metric=EUCLIDEAN):
        diff = self.corners[:, None, :] - self.corners[None, :, :]
        if metric == EUCLIDEAN:
            return float(np.sqrt((diff ** 2).sum(-1)).max())
        return float(np.abs(diff).max())

    def centroid(self):
        return self.corners.mean(axis=0)

    def _edge_normals(self):
        edges = np.roll(self.corners, -1, axis=0) - self.corners
        # inward normals for CCW orientation
        normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
        lengths = np.linalg.norm(normals, axis=1)
        return normals / lengths[:, None]

    def contains(self, pts, tol=CONTAINMENT_EPS):
        pts = np.atleast_2d(pts)
        normals = self._edge_normals()
        diff = pts[:, None, :] - self.corners[None, :, :]
        signed = np.einsum("ijd,jd->ij", diff, normals)
        return np.all(signed >= -tol, axis=1)

    def contains_ball(self, center, radius, tol=CONTAINMENT_EPS):
        center = np.asarray(center, dtype=float)
        normals = self._edge_normals()
        signed = ((center[None, :] - self.corners) * normals).sum(axis=1)
        return bool(np.all(signed >= radius - tol))

    def corner_points(self):
        return self.corners.copy()

    def bounding_box(self):
        return self.corners.min(axis=0), self.corners.max(axis=0)


class PointSet:
    """Explicit finite region; containment is membership up to tol."""

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))

    @property
    def dim(self):
        return self.points.shape[1]

    def diameter(self, metric=EUCLIDEAN):
        pts = self.points
        if len(pts) > 4096:  # upper bound via the bounding box
            lo, hi = self.bounding_box()
            return Box(lo, hi).diameter(metric)
        diff = pts[:, None, :] - pts[None, :, :]
        if metric == EUCLIDEAN:
            return float(np.sqrt((diff ** 2).sum(-1)).max())
        return float(np.abs(diff).max())

    def centroid(self):
        return self.points.mean(axis=0)

    def contains(self, pts, tol=CONTAINMENT_EPS):
        pts = np.atleast_2d(pts)
        diff = pts[:, None, :] - self.points[None, :, :]
        dmin = np.sqrt((diff ** 2).sum(-1)).min(axis=1)
        return dmin <= tol

    def contains_ball(self, center, radius, tol=CONTAINMENT_EPS):
        return bool(self.contains(center, tol=tol + radius)[0]) and radius <= tol

    def corner_points(self):
        return self.points.copy()

    def bounding_box(self):
        return self.points.min(axis=0), self.points.max(axis=0)


def grid_points(region, pitch, origin=None):
    """Grid-aligned sample of a region: all lattice points of the given pitch
    inside it (with boundary slack)."""
    lo, hi = region.bounding_box()
    d = lo.size
    origin = np.zeros(d) if origin is None else np.asarray(origin, dtype=float)
    start = np.floor((lo - origin) / pitch).astype(int)
    stop = np.ceil((hi - origin) / pitch).astype(int)
    axes = [np.arange(a, b + 1) for a, b in zip(start, stop)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    pts = origin + pitch * mesh
    keep = region.contains(pts, tol=pitch * 1e-6)
    return pts[keep]


@dataclass(frozen=True)
class MetricFiber:
    vertex: str
    region: object
    metric: str = EUCLIDEAN

    @property
    def dim(self):
        return self.region.dim

    def diameter(self):
        return self.region.diameter(self.metric)

    def basepoint(self):
        return self.region.centroid()


# ---------------------------------------------------------------------------
# affine maps


@dataclass(frozen=True)
class AffineMap:
    matrix: np.ndarray
    shift: np.ndarray
    domain: str    # source vertex
    codomain: str  # range vertex

    @classmethod
    def identity(cls, vertex, dim):
        return cls(np.eye(dim), np.zeros(dim), vertex, vertex)

    @classmethod
    def of(cls, matrix, shift, domain, codomain):
        return cls(
            np.asarray(matrix, dtype=float),
            np.asarray(shift, dtype=float),
            domain,
            codomain,
        )

    def apply(self, pts):
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            return self.matrix @ pts + self.shift
        return pts @ self.matrix.T + self.shift

    def after(self, other: "AffineMap") -> "AffineMap":
        """self o other (apply other first)."""
        if other.codomain != self.domain:
            raise ValueError("maps not composable")
        return AffineMap(
            self.matrix @ other.matrix,
            self.matrix @ other.shift + self.shift,
            other.domain,
            self.codomain,
        )

    def exact(self):
        """Entries lifted to exact rationals (floats are rationals)."""
        mat = tuple(tuple(Fraction(x) for x in row) for row in self.matrix.tolist())
        sh = tuple(Fraction(x) for x in self.shift.tolist())
        return mat, sh


def exact_after(a, b):
    """Exact-rational composite a o b of two ``AffineMap.exact()`` values."""
    (ma, ta), (mb, tb) = a, b
    n = len(ma)
    mat = tuple(
        tuple(sum(ma[i][k] * mb[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )
    sh = tuple(sum(ma[i][k] * tb[k] for k in range(n)) + ta[i] for i in range(n))
    return mat, sh


def lipschitz_bound(m: AffineMap, metric: str = EUCLIDEAN) -> float:
    """Operator norm of the linear part: spectral norm for the Euclidean
    metric, maximum absolute row sum for the max metric."""
    if metric == EUCLIDEAN:
        return float(np.linalg.norm(m.matrix, 2))
    if metric == MAX:
        return float(np.abs(m.matrix).sum(axis=1).max())
    raise ValueError(f"unknown metric {metric!r}")


# ---------------------------------------------------------------------------
# systems


STRICT = "strict"
RELAXED = "relaxed"


@dataclass
class MWSystem:
    """Graph + fibers + one affine contraction per edge.

    ``mode`` declares where the contraction ratio is enforced: ``strict``
    means every generator has Lipschitz bound <= ratio; ``relaxed`` only
    requires it of every degree-(1,..,1) composite, which is what genuinely
    two-dimensional product systems can offer.
    """

    graph: KGraph
    fibers: dict[str, MetricFiber]
    generators: dict[str, AffineMap]
    ratio: float
    mode: str = STRICT
    name: str = ""

    @property
    def dim(self):
        return next(iter(self.fibers.values())).dim

    @property
    def metric(self):
        return next(iter(self.fibers.values())).metric

    @property
    def diagonal_degree(self):
        return (1,) * self.graph.k

    def fiber(self, v: str) -> MetricFiber:
        return self.fibers[v]


def extend_map(sys: MWSystem, p: Path) -> AffineMap:
    """The affine map of a path: composite of the generators along its
    normal form (identity for a vertex).  Any other decomposition gives the
    same map when the system validates; the normal form fixes the float
    evaluation order so equal paths always produce bitwise equal maps."""
    if p.is_vertex:
        return AffineMap.identity(p.range_vertex, sys.dim)
    out = sys.generators[p.edges[0]]
    for ident in p.edges[1:]:
        out = out.after(sys.generators[ident])
    return out


def exact_path_map(sys: MWSystem, p: Path):
    """The path's affine map composed entirely in rational arithmetic.

    Unlike ``extend_map`` (float, canonical order), this is exactly
    associative, so it is the right object for decomposition-independence
    identities."""
    if p.is_vertex:
        one, zero = Fraction(1), Fraction(0)
        mat = tuple(
            tuple(one if i == j else zero for j in range(sys.dim))
            for i in range(sys.dim)
        )
        return mat, (zero,) * sys.dim
    out = sys.generators[p.edges[0]].exact()
    for ident in p.edges[1:]:
        out = exact_after(out, sys.generators[ident].exact())
    return out


def degree_maps(sys: MWSystem, n) -> dict[str, list[tuple[AffineMap, str]]]:
    """Per vertex, the composite map and source vertex of every path of
    degree n with that range."""
    out = {}
    for v in sys.graph.vertices:
        rows = []
        for lam in enumerate_paths(sys.graph, v, n):
            rows.append((extend_map(sys, lam), lam.source_vertex))
        out[v] = rows
    return out


def _image_inside(m: AffineMap, src: MetricFiber, dst: MetricFiber, pitch=None) -> bool:
    """Whether m maps src's region into dst's region.

    Exact for box/polygon/point sources into convex targets (corner images);
    balls use the center image plus an operator-norm radius bound; a coarse
    grid sample backs all cases up.
    """
    region = src.region
    corners = region.corner_points()
    if corners is not None:
        if not np.all(dst.region.contains(m.apply(corners))):
            return False
    else:
        center = m.apply(region.centroid())
        radius = region.radius * float(np.linalg.norm(m.matrix, 2))
        if not dst.region.contains_ball(center, radius):
            return False
    pitch = pitch or max(region.diameter(EUCLIDEAN) / 64.0, 1e-9)
    sample = grid_points(region, pitch)
    if len(sample):
        if not np.all(dst.region.contains(m.apply(sample))):
            return False
    return True


def validate_system(sys: MWSystem) -> ValidationReport:
    """Check fiber/generator tables, exact square consistency, domain
    containment, and the mode's Lipschitz requirement."""
    rep = ValidationReport()
    g = sys.graph

    for v in g.vertices:
        if v not in sys.fibers:
            rep.add(STRUCTURAL, "missing-fiber", v, "vertex has no fiber")
    for ident in g.edges:
        if ident not in sys.generators:
            rep.add(STRUCTURAL, "missing-map", ident, "edge has no generator map")
    for ident in sys.generators:
        if ident not in g.edges:
            rep.add(STRUCTURAL, "unknown-edge", ident, "generator for unknown edge")
    dims = {f.dim for f in sys.fibers.values()}
    if len(dims) > 1:
        rep.add(STRUCTURAL, "mixed-dimension", "fibers",
                f"fibers have ambient dimensions {sorted(dims)}")
    metrics = {f.metric for f in sys.fibers.values()}
    if len(metrics) > 1:
        rep.add(STRUCTURAL, "mixed-metric", "fibers",
                f"fibers declare metrics {sorted(metrics)}")
    if not (0 < sys.ratio < 1):
        rep.add(STRUCTURAL, "bad-ratio", str(sys.ratio),
                "contraction ratio must lie in (0, 1)")
    if sys.mode not in (STRICT, RELAXED):
        rep.add(STRUCTURAL, "bad-mode", sys.mode, "mode must be strict or relaxed")
    if rep.findings:
        return rep

    for ident, m in sys.generators.items():
        e = g.edge(ident)
        if m.domain != e.source_vertex or m.codomain != e.range_vertex:
            rep.add(STRUCTURAL, "endpoint-mismatch", ident,
                    "map endpoints disagree with the edge")
        if m.matrix.shape != (sys.dim, sys.dim) or m.shift.shape != (sys.dim,):
            rep.add(STRUCTURAL, "bad-shape", ident, "matrix/translation shape")
    if rep.findings:
        return rep

    # exact square consistency: the two factorizations of a mixed-color word
    # must yield the same affine map
    for pair, table in g.squares.items():
        for (e, f), (f2, e2) in table.items():
            left = exact_after(sys.generators[e].exact(), sys.generators[f].exact())
            right = exact_after(sys.generators[f2].exact(), sys.generators[e2].exact())
            if left != right:
                lm = sys.generators[e].after(sys.generators[f])
                rm = sys.generators[f2].after(sys.generators[e2])
                res = float(
                    np.linalg.norm(lm.matrix - rm.matrix)
                    + np.linalg.norm(lm.shift - rm.shift)
                )
                rep.add(AXIOM, "square-consistency", f"({e},{f})=({f2},{e2})",
                        f"composite maps differ, residual {res:.3e}")

    for ident, m in sys.generators.items():
        e = g.edge(ident)
        if not _image_inside(m, sys.fibers[e.source_vertex], sys.fibers[e.range_vertex]):
            rep.add(AXIOM, "domain-containment", ident,
                    "image of the source fiber leaves the target fiber")

    metric = sys.metric
    if sys.mode == STRICT:
        for ident, m in sys.generators.items():
            lip = lipschitz_bound(m, metric)
            if lip > sys.ratio + 1e-12:
                rep.add(AXIOM, "lipschitz", ident,
                        f"generator Lipschitz {lip:.6g} > {sys.ratio:.6g}")
    else:
        for v in g.vertices:
            for lam in enumerate_paths(g, v, sys.diagonal_degree):
                lip = lipschitz_bound(extend_map(sys, lam), metric)
                if lip > sys.ratio + 1e-12:
                    rep.add(AXIOM, "lipschitz", ".".join(lam.edges),
                            f"diagonal composite Lipschitz {lip:.6g} > {sys.ratio:.6g}")
    return rep


# ---------------------------------------------------------------------------
# coverage checks (resolution-level surjectivity / density)


@dataclass
class CoverageReport:
    degree: tuple
    tol: float
    distances: dict[str, float]
    empty_vertices: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.empty_vertices and all(
            d <= self.tol for d in self.distances.values()
        )


def check_k_surjective(sys: MWSystem, n, sets, tol: float) -> CoverageReport:
    """One-sided distance from each fiber cloud to the union of its
    degree-n images; a vertex passes when that distance is <= tol."""
    from .attractor import directed_distance  # local import to avoid a cycle

    maps = degree_maps(sys, n)
    distances = {}
    empty = []
    for v in sys.graph.vertices:
        target = sets.points(v)
        if len(target) == 0:
            empty.append(v)
            continue
        pieces = [m.apply(sets.points(src)) for m, src in maps[v]]
        pieces = [p for p in pieces if len(p)]
        if not pieces:
            empty.append(v)
            distances[v] = float("inf")
            continue
        distances[v] = directed_distance(target, np.concatenate(pieces), sys.metric)
    return CoverageReport(tuple(n), tol, distances, empty)


def check_k_dense(sys: MWSystem, n, sets, tol: float) -> CoverageReport:
    """Identical computation to ``check_k_surjective``: at a fixed grid
    resolution, image density and image equality cannot be told apart."""
    return check_k_surjective(sys, n, sets, tol)


@dataclass
class ProperDenseReport:
    proper: bool
    proper_reason: str
    dense: bool
    tol: float
    edge_distances: dict[str, float]


def check_proper_dense(sys: MWSystem, pitch: float | None = None,
                       tol: float | None = None) -> ProperDenseReport:
    """Properness is automatic for continuous maps between compact fibers;
    density asks each single generator image to be tol-dense in its codomain
    fiber, which genuine contractions fail."""
    from .attractor import directed_distance

    if pitch is None:
        pitch = max(f.diameter() for f in sys.fibers.values()) / 128.0
    if tol is None:
        tol = 4.0 * pitch
    clouds = {v: grid_points(f.region, pitch) for v, f in sys.fibers.items()}
    edge_distances = {}
    for ident, m in sorted(sys.generators.items()):
        e = sys.graph.edge(ident)
        image = m.apply(clouds[e.source_vertex])
        edge_distances[ident] = directed_distance(
            clouds[e.range_vertex], image, sys.metric
        )
    dense = all(d <= tol for d in edge_distances.values())
    return ProperDenseReport(
        proper=True,
        proper_reason="continuous maps between compact fibers: preimages of "
                      "compact sets are compact",
        dense=dense,
        tol=tol,
        edge_distances=edge_distances,
    )
