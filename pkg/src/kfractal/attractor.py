"""Set-valued iteration: per-vertex unions of affine images, to a fixed point.

Compact sets are represented by finite point clouds snapped to a regular
grid.  Snapping keeps unions idempotent and memory bounded; storing lattice
coordinates as integers makes equality and canonical ordering exact.  The
iteration stops on a Banach a-posteriori estimate: once consecutive tuples
are within delta, the limit is within delta*c/(1-c), plus grid slack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .kgraph import enumerate_paths
from .systems import EUCLIDEAN, MWSystem, degree_maps, extend_map, grid_points, lipschitz_bound


# ---------------------------------------------------------------------------
# distances


def directed_distance(a, b, metric=EUCLIDEAN, method="auto"):
    """One-sided (sup-min) distance from cloud a to cloud b.

    ``method``: "direct" runs the O(|a|*|b|) kernel (compiled when built,
    numpy otherwise), "indexed" queries a KD-tree, "auto" picks the index for
    large products.  The index is a pure optimization: all methods compute
    the same exact value.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if len(a) == 0:
        return 0.0
    if len(b) == 0:
        raise ValueError("empty target cloud")
    if method == "auto":
        method = "indexed" if len(a) * len(b) > 2_000_000 else "direct"
    if method == "direct":
        return _kernels.directed_max_min(a, b, metric)
    if method == "indexed":
        from scipy.spatial import cKDTree

        dist, _ = cKDTree(b).query(a, k=1, p=2 if metric == EUCLIDEAN else np.inf)
        return float(np.max(dist))
    raise ValueError(f"unknown method {method!r}")


def hausdorff_distance(a, b, metric=EUCLIDEAN, method="auto"):
    """Symmetric Hausdorff distance between two nonempty point clouds."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty cloud")
    return max(
        directed_distance(a, b, metric, method),
        directed_distance(b, a, metric, method),
    )


# ---------------------------------------------------------------------------
# grid-snapped set tuples


def _canonical(idx: np.ndarray) -> np.ndarray:
    """Sorted duplicate-free rows, lexicographically.

    Low-dimensional lattices are packed into one integer per row first,
    which sorts in the same order as np.unique(axis=0) but far faster; wide
    coordinate ranges fall back to the row-wise path.
    """
    d = idx.shape[1]
    if d == 1:
        return np.unique(idx[:, 0])[:, None]
    if d <= 3:
        lo = idx.min(axis=0)
        span = (idx.max(axis=0) - lo + 1).astype(np.int64)
        if float(np.prod(span.astype(float))) < 2**62:
            shifted = idx - lo
            packed = shifted[:, 0]
            for t in range(1, d):
                packed = packed * span[t] + shifted[:, t]
            packed = np.unique(packed)
            out = np.empty((len(packed), d), dtype=np.int64)
            for t in range(d - 1, 0, -1):
                out[:, t] = packed % span[t] + lo[t]
                packed //= span[t]
            out[:, 0] = packed + lo[0]
            return out
    return np.unique(idx, axis=0)


class SetTuple:
    """One finite grid cloud per vertex.

    Clouds are stored as lexicographically sorted, duplicate-free int64
    lattice coordinates relative to (origin, pitch); real coordinates are
    origin + pitch * index.  Construction canonicalizes, so equal sets have
    equal representations regardless of input order.
    """

    def __init__(self, origin, pitch: float, clouds: dict[str, np.ndarray]):
        self.origin = np.asarray(origin, dtype=float)
        self.pitch = float(pitch)
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        canon = {}
        for v, idx in clouds.items():
            idx = np.asarray(idx, dtype=np.int64)
            if idx.ndim != 2:
                raise ValueError("lattice cloud must be 2-d")
            canon[v] = _canonical(idx) if len(idx) else idx.reshape(0, self.origin.size)
        self.clouds = canon

    @classmethod
    def from_points(cls, origin, pitch, point_clouds):
        origin = np.asarray(origin, dtype=float)
        snapped = {}
        for v, pts in point_clouds.items():
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            if pts.size == 0:
                snapped[v] = np.empty((0, origin.size), dtype=np.int64)
                continue
            snapped[v] = np.rint((pts - origin) / pitch).astype(np.int64)
        return cls(origin, pitch, snapped)

    @classmethod
    def from_fibers(cls, sys: MWSystem, pitch: float, origin=None):
        """Full fiber regions sampled on the grid (one cloud per vertex)."""
        origin = np.zeros(sys.dim) if origin is None else origin
        return cls.from_points(
            origin,
            pitch,
            {v: grid_points(f.region, pitch, origin) for v, f in sys.fibers.items()},
        )

    @classmethod
    def from_point(cls, sys: MWSystem, pitch: float, point_per_vertex, origin=None):
        """Singleton clouds (e.g. one corner point per vertex)."""
        origin = np.zeros(sys.dim) if origin is None else origin
        return cls.from_points(
            origin, pitch, {v: np.atleast_2d(p) for v, p in point_per_vertex.items()}
        )

    def points(self, v: str) -> np.ndarray:
        return self.origin + self.pitch * self.clouds[v].astype(float)

    def vertices(self):
        return sorted(self.clouds)

    def same_grid(self, other: "SetTuple") -> bool:
        return (
            self.pitch == other.pitch
            and self.origin.shape == other.origin.shape
            and bool(np.all(self.origin == other.origin))
        )

    def __eq__(self, other):
        if not isinstance(other, SetTuple) or not self.same_grid(other):
            return False
        if set(self.clouds) != set(other.clouds):
            return False
        return all(np.array_equal(self.clouds[v], other.clouds[v]) for v in self.clouds)

    def __repr__(self):
        sizes = {v: len(c) for v, c in sorted(self.clouds.items())}
        return f"SetTuple(pitch={self.pitch:g}, sizes={sizes})"


def tuple_distance(a: SetTuple, b: SetTuple, metric=EUCLIDEAN, method="auto") -> float:
    """sup over vertices of the per-vertex Hausdorff distance.

    Equal lattice clouds short-circuit to 0 (canonical form makes the array
    comparison conclusive), which keeps fixed-point detection cheap."""
    if not a.same_grid(b):
        raise ValueError("grid mismatch")
    if set(a.clouds) != set(b.clouds):
        raise ValueError("vertex sets differ")
    worst = 0.0
    for v in a.clouds:
        if np.array_equal(a.clouds[v], b.clouds[v]):
            continue
        worst = max(worst, hausdorff_distance(a.points(v), b.points(v), metric, method))
    return worst


# ---------------------------------------------------------------------------
# the set-valued operator


def hutchinson_step(sys: MWSystem, n, C: SetTuple, _maps=None) -> SetTuple:
    """One application of the degree-n operator: per vertex, the snapped
    union of the path images of the current clouds.

    The union is computed from exact affine images of all points and snapped
    once, then canonicalized, so the result does not depend on evaluation
    order (degree 0 returns C unchanged).
    """
    if all(c == 0 for c in n):
        return C
    maps = _maps if _maps is not None else degree_maps(sys, n)
    out = {}
    for v in sys.graph.vertices:
        pieces = [m.apply(C.points(src)) for m, src in maps[v]]
        pieces = [p for p in pieces if len(p)]
        if not pieces:
            raise ValueError(f"no images at vertex {v!r} (empty input clouds)")
        pts = np.concatenate(pieces)
        out[v] = np.rint((pts - C.origin) / C.pitch).astype(np.int64)
    return SetTuple(C.origin, C.pitch, out)


def contraction_factor(sys: MWSystem, n) -> float:
    """Largest Lipschitz bound among the degree-n path maps."""
    worst = 0.0
    for v in sys.graph.vertices:
        for lam in enumerate_paths(sys.graph, v, n):
            worst = max(worst, lipschitz_bound(extend_map(sys, lam), sys.metric))
    return worst


@dataclass(frozen=True)
class ConvergenceCertificate:
    iterations: int
    displacement: float        # Hausdorff gap between the last two iterates
    contraction: float         # Lipschitz bound of the iterated operator
    pitch: float
    tol: float
    converged: bool

    @property
    def error_bound(self) -> float:
        """A-posteriori distance to the true fixed point: the Banach
        estimate for the returned iterate plus grid slack."""
        return self.displacement * self.contraction / (1.0 - self.contraction) + 2.0 * self.pitch

    def summary(self) -> str:
        status = "converged" if self.converged else "NOT converged"
        return (
            f"{status}: iterations={self.iterations} displacement={self.displacement:.6g} "
            f"contraction={self.contraction:.6g} pitch={self.pitch:.6g} "
            f"tol={self.tol:.6g} error_bound={self.error_bound:.6g}"
        )


def compute_attractor(
    sys: MWSystem,
    n,
    C0: SetTuple,
    tol: float | None = None,
    max_iter: int = 64,
) -> tuple[SetTuple, ConvergenceCertificate]:
    """Iterate the degree-n operator from C0 until certified within tol.

    The contraction factor of the operator is measured from the composite
    maps; a factor >= 1 is rejected (in relaxed mode only diagonal degrees
    contract, so pass a multiple of (1,..,1) there).  Returns the final
    tuple and its certificate; non-convergence within max_iter is reported
    on the certificate, not raised.
    """
    if tol is None:
        tol = 4.0 * C0.pitch
    for v in sys.graph.vertices:
        if len(C0.clouds.get(v, ())) == 0:
            raise ValueError(f"empty initial cloud at vertex {v!r}")
    c_n = contraction_factor(sys, n)
    if c_n >= 1.0:
        raise ValueError(
            f"degree {tuple(n)} operator is not a contraction (factor {c_n:.6g})"
        )
    maps = degree_maps(sys, n)
    current = C0
    delta = float("inf")
    for it in range(1, max_iter + 1):
        nxt = hutchinson_step(sys, n, current, _maps=maps)
        delta = tuple_distance(current, nxt, sys.metric)
        current = nxt
        if delta * c_n / (1.0 - c_n) <= tol:
            return current, ConvergenceCertificate(it, delta, c_n, C0.pitch, tol, True)
    return current, ConvergenceCertificate(max_iter, delta, c_n, C0.pitch, tol, False)


def check_commutation(sys: MWSystem, n, m, C: SetTuple, tol: float) -> bool:
    """Whether applying degrees n and m in either order lands within tol.

    The underlying composite maps commute exactly; only the intermediate
    snapping differs, which stays within grid slack.
    """
    nm = hutchinson_step(sys, m, hutchinson_step(sys, n, C))
    mn = hutchinson_step(sys, n, hutchinson_step(sys, m, C))
    return tuple_distance(nm, mn, sys.metric) <= tol
