"""Instance files and artifact writers.

One JSON document describes a graph, a metric system (graph + fibers +
affine maps), or a discrete system (graph + element lists + tables); the
`kind` field disambiguates, the schema is documented in
docs/instance_format.md.  Writers are deterministic byte for byte: sorted
keys, repr floats, fixed row order.
"""

from __future__ import annotations

import json
from pathlib import Path as FsPath

import numpy as np

from .attractor import SetTuple
from .duality import DiscreteSystem
from .kgraph import KGraph
from .systems import (
    AffineMap,
    Ball,
    Box,
    MetricFiber,
    MWSystem,
    PointSet,
    Polygon,
)


class InstanceFormatError(Exception):
    """Unparseable or structurally impossible instance document."""


def _need(doc: dict, key: str, context: str):
    if key not in doc:
        raise InstanceFormatError(f"{context}: missing field {key!r}")
    return doc[key]


# ---------------------------------------------------------------------------
# graphs


def kgraph_to_dict(g: KGraph) -> dict:
    edges = []
    for color in range(1, g.k + 1):
        edges.append(
            [
                {"id": e.ident, "r": e.range_vertex, "s": e.source_vertex}
                for e in g.edges_of_color(color)
            ]
        )
    squares = {}
    for (i, j), table in sorted(g.squares.items()):
        squares[f"{i},{j}"] = [
            [[e, f], [f2, e2]] for (e, f), (f2, e2) in sorted(table.items())
        ]
    return {"k": g.k, "vertices": list(g.vertices), "edges": edges, "squares": squares}


def kgraph_from_dict(doc: dict) -> KGraph:
    k = int(_need(doc, "k", "graph"))
    vertices = _need(doc, "vertices", "graph")
    raw_edges = _need(doc, "edges", "graph")
    if not isinstance(raw_edges, list) or len(raw_edges) != k:
        raise InstanceFormatError(f"graph: 'edges' must list {k} per-color groups")
    edges = {}
    for color, group in enumerate(raw_edges, start=1):
        rows = []
        for item in group:
            rows.append(
                (
                    _need(item, "id", f"edges[{color}]"),
                    _need(item, "r", f"edges[{color}]"),
                    _need(item, "s", f"edges[{color}]"),
                )
            )
        edges[color] = rows
    squares = {}
    for key, pairs in (doc.get("squares") or {}).items():
        try:
            i, j = (int(part) for part in key.split(","))
        except ValueError as exc:
            raise InstanceFormatError(f"squares: bad color pair key {key!r}") from exc
        table = {}
        for entry in pairs:
            (e, f), (f2, e2) = entry
            table[(e, f)] = (f2, e2)
        squares[(i, j)] = table
    return KGraph(k, vertices, edges, squares)


# ---------------------------------------------------------------------------
# regions and fibers


def region_to_dict(region) -> dict:
    if isinstance(region, Box):
        return {"type": "box", "min": region.lo.tolist(), "max": region.hi.tolist()}
    if isinstance(region, Ball):
        return {"type": "ball", "center": region.center.tolist(), "radius": region.radius}
    if isinstance(region, Polygon):
        return {"type": "polygon", "corners": region.corners.tolist()}
    if isinstance(region, PointSet):
        return {"type": "points", "points": region.points.tolist()}
    raise InstanceFormatError(f"unknown region {type(region).__name__}")


def region_from_dict(doc: dict):
    rtype = _need(doc, "type", "region")
    if rtype == "box":
        return Box(_need(doc, "min", "box"), _need(doc, "max", "box"))
    if rtype == "ball":
        return Ball(_need(doc, "center", "ball"), _need(doc, "radius", "ball"))
    if rtype == "polygon":
        return Polygon(_need(doc, "corners", "polygon"))
    if rtype == "points":
        return PointSet(_need(doc, "points", "points"))
    raise InstanceFormatError(f"region: unknown type {rtype!r}")


# ---------------------------------------------------------------------------
# systems


def system_to_dict(sys: MWSystem) -> dict:
    doc = kgraph_to_dict(sys.graph)
    doc["kind"] = "mw"
    doc["name"] = sys.name
    doc["fibers"] = {
        v: {"region": region_to_dict(f.region), "metric": f.metric}
        for v, f in sorted(sys.fibers.items())
    }
    doc["maps"] = {
        e: {"matrix": m.matrix.tolist(), "translation": m.shift.tolist()}
        for e, m in sorted(sys.generators.items())
    }
    doc["c"] = sys.ratio
    doc["mode"] = sys.mode
    return doc


def system_from_dict(doc: dict) -> MWSystem:
    g = kgraph_from_dict(doc)
    fibers = {}
    for v, spec in _need(doc, "fibers", "system").items():
        fibers[v] = MetricFiber(
            v,
            region_from_dict(_need(spec, "region", f"fiber {v}")),
            spec.get("metric", "euclidean"),
        )
    gens = {}
    for ident, spec in _need(doc, "maps", "system").items():
        if ident not in g.edges:
            raise InstanceFormatError(f"maps: unknown edge {ident!r}")
        e = g.edges[ident]
        gens[ident] = AffineMap.of(
            _need(spec, "matrix", f"map {ident}"),
            _need(spec, "translation", f"map {ident}"),
            e.source_vertex,
            e.range_vertex,
        )
    return MWSystem(
        g,
        fibers,
        gens,
        ratio=float(_need(doc, "c", "system")),
        mode=doc.get("mode", "strict"),
        name=doc.get("name", ""),
    )


def discrete_to_dict(dsys: DiscreteSystem) -> dict:
    doc = kgraph_to_dict(dsys.graph)
    doc["kind"] = "discrete"
    doc["name"] = dsys.name
    doc["fibers"] = {v: {"elements": list(t)} for v, t in sorted(dsys.fibers.items())}
    doc["maps"] = {e: {"table": dict(sorted(t.items()))} for e, t in sorted(dsys.tables.items())}
    return doc


def discrete_from_dict(doc: dict) -> DiscreteSystem:
    g = kgraph_from_dict(doc)
    fibers = {}
    for v, spec in _need(doc, "fibers", "discrete system").items():
        fibers[v] = tuple(_need(spec, "elements", f"fiber {v}"))
    tables = {}
    for ident, spec in _need(doc, "maps", "discrete system").items():
        tables[ident] = dict(_need(spec, "table", f"map {ident}"))
    return DiscreteSystem(g, fibers, tables, name=doc.get("name", ""))


def load_instance(source) -> tuple[str, object]:
    """Parse a JSON document (path or dict) into (kind, object).

    kind is "graph", "mw", or "discrete"; raises InstanceFormatError with
    the failing location for anything unusable.
    """
    if isinstance(source, (str, FsPath)):
        path = FsPath(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise InstanceFormatError(f"{path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}"
            ) from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance document must be a JSON object")
    kind = doc.get("kind")
    if kind is None:
        if "maps" in doc and "fibers" in doc:
            sample = next(iter(doc["fibers"].values()), {})
            kind = "discrete" if "elements" in sample else "mw"
        else:
            kind = "graph"
    try:
        if kind == "graph":
            return "graph", kgraph_from_dict(doc)
        if kind == "mw":
            return "mw", system_from_dict(doc)
        if kind == "discrete":
            return "discrete", discrete_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed instance: {exc}") from exc
    raise InstanceFormatError(f"unknown instance kind {kind!r}")


def dump_instance(obj, path) -> None:
    if isinstance(obj, MWSystem):
        doc = system_to_dict(obj)
    elif isinstance(obj, DiscreteSystem):
        doc = discrete_to_dict(obj)
    elif isinstance(obj, KGraph):
        doc = kgraph_to_dict(obj)
    else:
        raise InstanceFormatError(f"cannot serialize {type(obj).__name__}")
    FsPath(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def packaged_instance(name: str) -> FsPath:
    """Path of a shipped instance by name (s1, p2, p2c, t0, f3, d1, d2, d3)."""
    from importlib.resources import files

    path = files("kfractal").joinpath("data").joinpath(f"{name}.json")
    return FsPath(str(path))


# ---------------------------------------------------------------------------
# artifact writers (all byte-deterministic)


def write_clouds_csv(sets: SetTuple, path) -> None:
    dim = sets.origin.size
    header = "vertex," + ",".join(f"x{i}" for i in range(dim))
    lines = [header]
    for v in sets.vertices():
        for row in sets.points(v):
            coords = ",".join(repr(float(x)) for x in row)
            lines.append(f"{v},{coords}")
    FsPath(path).write_text("\n".join(lines) + "\n")


def write_certificate(text: str, path) -> None:
    FsPath(path).write_text(text if text.endswith("\n") else text + "\n")


def write_pgm(sets: SetTuple, vertex: str, path) -> None:
    """Binary 8-bit raster of a planar cloud at grid resolution (0 = point)."""
    lattice = sets.clouds[vertex]
    if lattice.shape[1] != 2:
        raise ValueError("rasters are only defined for planar clouds")
    if len(lattice) == 0:
        raise ValueError("empty cloud")
    lo = lattice.min(axis=0)
    hi = lattice.max(axis=0)
    width = int(hi[0] - lo[0]) + 1
    height = int(hi[1] - lo[1]) + 1
    img = np.full((height, width), 255, dtype=np.uint8)
    cols = lattice[:, 0] - lo[0]
    rows = hi[1] - lattice[:, 1]  # y axis points up in the plane, down in the file
    img[rows, cols] = 0
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def write_diff_pgm(a: SetTuple, b: SetTuple, vertex: str, path) -> None:
    """Raster comparing two clouds: black = both, grays = one-sided."""
    if not a.same_grid(b):
        raise ValueError("grid mismatch")
    one = {tuple(r) for r in a.clouds[vertex].tolist()}
    two = {tuple(r) for r in b.clouds[vertex].tolist()}
    both = one | two
    if not both:
        raise ValueError("empty clouds")
    arr = np.array(sorted(both), dtype=np.int64)
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    img = np.full((int(hi[1] - lo[1]) + 1, int(hi[0] - lo[0]) + 1), 255, dtype=np.uint8)
    for cell in both:
        col = cell[0] - lo[0]
        row = hi[1] - cell[1]
        if cell in one and cell in two:
            img[row, col] = 0
        elif cell in one:
            img[row, col] = 90
        else:
            img[row, col] = 170
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
