"""Finite k-colored graphs with factorization squares, and their paths.

A rank-k graph is presented by its skeleton (one finite edge set per color,
each edge with a range and a source vertex) together with, for every pair of
colors i < j, a bijection between the two-edge words of colors (i, j) and
those of colors (j, i) that start and end at the same vertices.  Paths of
arbitrary multidegree are generated from this presentation; each morphism is
stored in color-sorted normal form, so path equality is plain tuple equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .report import AXIOM, STRUCTURAL, ValidationReport


class KGraphError(Exception):
    """Malformed input or an operation applied to non-composable data."""


Degree = tuple[int, ...]


def degree_add(n: Degree, m: Degree) -> Degree:
    return tuple(a + b for a, b in zip(n, m))

def degree_sub(n: Degree, m: Degree) -> Degree:
    return tuple(a - b for a, b in zip(n, m))

def degree_leq(n: Degree, m: Degree) -> bool:
    return all(a <= b for a, b in zip(n, m))

def degree_total(n: Degree) -> int:
    return sum(n)


@dataclass(frozen=True)
class Edge:
    ident: str
    color: int  # 1-based color index
    range_vertex: str
    source_vertex: str


class KGraph:
    """Skeleton-plus-squares presentation of a finite rank-k graph.

    Parameters
    ----------
    k:
        Number of colors (the rank).
    vertices:
        Vertex identifiers.
    edges:
        Mapping color -> iterable of (ident, range_vertex, source_vertex).
    squares:
        Mapping (i, j) with i < j -> mapping (e, f) -> (f2, e2), meaning the
        word e f (colors i then j) and the word f2 e2 (colors j then i) are
        the two factorizations of the same two-edge morphism.

    Construction is tolerant of malformed tables: problems are reported by
    ``validate_kgraph`` rather than raised here, so broken instances can be
    loaded and diagnosed.
    """

    def __init__(self, k, vertices, edges, squares=None):
        if k < 1:
            raise KGraphError(f"rank must be >= 1, got {k}")
        self.k = int(k)
        self.vertices: tuple[str, ...] = tuple(str(v) for v in vertices)
        self.vertex_set = frozenset(self.vertices)

        self.edges: dict[str, Edge] = {}
        self.duplicate_edge_ids: list[str] = []
        for color in range(1, self.k + 1):
            for ident, r, s in (edges.get(color) or []):
                ident = str(ident)
                if ident in self.edges:
                    self.duplicate_edge_ids.append(ident)
                    continue
                self.edges[ident] = Edge(ident, color, str(r), str(s))

        self._by_range: dict[tuple[int, str], tuple[str, ...]] = {}
        for color in range(1, self.k + 1):
            for v in self.vertices:
                ids = sorted(
                    e.ident
                    for e in self.edges.values()
                    if e.color == color and e.range_vertex == v
                )
                self._by_range[(color, v)] = tuple(ids)

        # squares[(i, j)][(e, f)] = (f2, e2): the ascending word e f equals
        # the descending word f2 e2.  The inverse table may lose entries when
        # the forward table is not injective; validation reports that.
        self.squares: dict[tuple[int, int], dict[tuple[str, str], tuple[str, str]]] = {}
        self.squares_inv: dict[tuple[int, int], dict[tuple[str, str], tuple[str, str]]] = {}
        for pair, table in (squares or {}).items():
            i, j = int(pair[0]), int(pair[1])
            fwd = {
                (str(e), str(f)): (str(f2), str(e2))
                for (e, f), (f2, e2) in table.items()
            }
            self.squares[(i, j)] = fwd
            self.squares_inv[(i, j)] = {v: k_ for k_, v in fwd.items()}

    def edges_of_color(self, color: int) -> list[Edge]:
        return sorted(
            (e for e in self.edges.values() if e.color == color),
            key=lambda e: e.ident,
        )

    def edges_with_range(self, color: int, vertex: str) -> tuple[str, ...]:
        return self._by_range.get((color, vertex), ())

    def edge(self, ident: str) -> Edge:
        try:
            return self.edges[ident]
        except KeyError:
            raise KGraphError(f"unknown edge id {ident!r}") from None

    def __repr__(self) -> str:
        return (
            f"KGraph(k={self.k}, |V|={len(self.vertices)}, "
            f"|E|={len(self.edges)})"
        )


class Path:
    """A morphism in color-sorted normal form.

    ``edges`` lists edge ids with colors non-decreasing left to right; the
    leftmost edge starts at ``range_vertex``.  Two Path values represent the
    same morphism exactly when they are equal.
    """

    __slots__ = ("graph", "range_vertex", "edges")

    def __init__(self, graph: KGraph, range_vertex: str, edges: tuple[str, ...] = ()):
        if range_vertex not in graph.vertex_set:
            raise KGraphError(f"unknown vertex {range_vertex!r}")
        at = range_vertex
        last_color = 0
        for ident in edges:
            e = graph.edge(ident)
            if e.color < last_color:
                raise KGraphError(f"edge list not color-sorted at {ident!r}")
            if e.range_vertex != at:
                raise KGraphError(f"edges not composable at {ident!r}")
            last_color = e.color
            at = e.source_vertex
        self.graph = graph
        self.range_vertex = range_vertex
        self.edges = tuple(edges)

    @property
    def source_vertex(self) -> str:
        if not self.edges:
            return self.range_vertex
        return self.graph.edge(self.edges[-1]).source_vertex

    @property
    def degree(self) -> Degree:
        counts = [0] * self.graph.k
        for ident in self.edges:
            counts[self.graph.edge(ident).color - 1] += 1
        return tuple(counts)

    @property
    def is_vertex(self) -> bool:
        return not self.edges

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Path)
            and self.graph is other.graph
            and self.range_vertex == other.range_vertex
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((id(self.graph), self.range_vertex, self.edges))

    def __repr__(self) -> str:
        if not self.edges:
            return f"Path({self.range_vertex!r})"
        return f"Path({'.'.join(self.edges)})"


def vertex_path(g: KGraph, v: str) -> Path:
    """The degree-0 path at a vertex."""
    return Path(g, v)


def _check_raw_word(g: KGraph, range_vertex: str, word) -> None:
    at = range_vertex
    for ident in word:
        e = g.edge(ident)
        if e.range_vertex != at:
            raise KGraphError(f"word not composable at {ident!r}")
        at = e.source_vertex


def _normalize(g: KGraph, word) -> tuple[str, ...]:
    """Sort a composable word by color using the square bijections.

    Each swap rewrites a descending adjacent pair through the inverse square
    table; the inversion count drops by one per swap, so this terminates.
    Uniqueness of the result is the normal-form property certified by
    ``validate_kgraph``.
    """
    w = list(word)
    i = 0
    while i < len(w) - 1:
        a, b = g.edge(w[i]), g.edge(w[i + 1])
        if a.color > b.color:
            table = g.squares_inv.get((b.color, a.color), {})
            try:
                e, f = table[(w[i], w[i + 1])]
            except KeyError:
                raise KGraphError(
                    f"no square entry for descending pair ({w[i]}, {w[i + 1]})"
                ) from None
            w[i], w[i + 1] = e, f
            i = max(i - 1, 0)
        else:
            i += 1
    return tuple(w)


def path_from_word(g: KGraph, range_vertex: str, word) -> Path:
    """Build the normal-form path represented by an arbitrary composable word."""
    _check_raw_word(g, range_vertex, word)
    return Path(g, range_vertex, _normalize(g, word))


def compose(p: Path, q: Path) -> Path:
    """The product path p·q, renormalized to color-sorted form.

    Requires s(p) = r(q); the degree of the result is d(p) + d(q).
    """
    if p.graph is not q.graph:
        raise KGraphError("paths live in different graphs")
    if p.source_vertex != q.range_vertex:
        raise KGraphError(
            f"not composable: source {p.source_vertex!r} != range {q.range_vertex!r}"
        )
    return Path(p.graph, p.range_vertex, _normalize(p.graph, p.edges + q.edges))


def _pull_color_to_front(g: KGraph, word: list[str], color: int) -> str:
    """Rewrite ``word`` in place so its head is its unique leading edge of
    the given color, and return that edge id.

    The first color-``color`` edge is moved left through the lower-color
    prefix with forward square applications.
    """
    idx = None
    for t, ident in enumerate(word):
        if g.edge(ident).color == color:
            idx = t
            break
    if idx is None:
        raise KGraphError(f"no color-{color} edge to extract")
    for t in range(idx - 1, -1, -1):
        a = word[t]
        x = word[t + 1]
        ca = g.edge(a).color
        table = g.squares.get((ca, color), {})
        try:
            x2, a2 = table[(a, x)]
        except KeyError:
            raise KGraphError(
                f"no square entry for ascending pair ({a}, {x})"
            ) from None
        word[t], word[t + 1] = x2, a2
    return word.pop(0)


def factorize(p: Path, m: Degree) -> tuple[Path, Path]:
    """Split p as (head, tail) with d(head) = m.

    The splitting is the unique one guaranteed by the factorization property;
    uniqueness is exercised exhaustively by the test suite rather than
    assumed here.
    """
    d = p.degree
    if len(m) != p.graph.k or any(c < 0 for c in m):
        raise KGraphError(f"bad degree vector {m!r}")
    if not degree_leq(m, d):
        raise KGraphError(f"degree {m} not dominated by d(p)={d}")
    g = p.graph
    rest = list(p.edges)
    head: list[str] = []
    for color in range(1, g.k + 1):
        for _ in range(m[color - 1]):
            head.append(_pull_color_to_front(g, rest, color))
    mu = Path(g, p.range_vertex, tuple(head))
    nu = Path(g, mu.source_vertex, tuple(rest))
    return mu, nu


def segment(p: Path, m: Degree, n: Degree) -> Path:
    """The sub-path between degrees m and n, i.e. the middle of the unique
    splitting p = a b c with d(a) = m, d(ab) = n."""
    if not degree_leq(m, n):
        raise KGraphError(f"segment bounds out of order: {m} > {n}")
    _, tail = factorize(p, m)
    mid, _ = factorize(tail, degree_sub(n, m))
    return mid


def enumerate_paths(g: KGraph, v: str, n: Degree) -> list[Path]:
    """All normal-form paths with range v and degree n, in lexicographic
    order of their edge-id tuples."""
    if len(n) != g.k or any(c < 0 for c in n):
        raise KGraphError(f"bad degree vector {n!r}")
    if v not in g.vertex_set:
        raise KGraphError(f"unknown vertex {v!r}")
    frontier: list[tuple[str, tuple[str, ...]]] = [(v, ())]
    for color in range(1, g.k + 1):
        for _ in range(n[color - 1]):
            nxt = []
            for src, word in frontier:
                for ident in g.edges_with_range(color, src):
                    nxt.append((g.edge(ident).source_vertex, word + (ident,)))
            frontier = nxt
    paths = [Path(g, v, word) for _, word in frontier]
    paths.sort(key=lambda p: p.edges)
    return paths


def count_paths(g: KGraph, v: str, n: Degree) -> int:
    """|vΛ^n| without materializing the paths (dynamic programming)."""
    counts = {u: 1 for u in g.vertices}
    for color in range(g.k, 0, -1):
        for _ in range(n[color - 1]):
            nxt = {}
            for u in g.vertices:
                nxt[u] = sum(
                    counts[g.edge(e).source_vertex]
                    for e in g.edges_with_range(color, u)
                )
            counts = nxt
    return counts[v]


# ---------------------------------------------------------------------------
# validation


def validate_kgraph(g: KGraph) -> ValidationReport:
    """Check the presentation axioms; an empty report means valid.

    Structural findings (dangling ids, duplicate ids, badly-typed square
    entries) are distinguished from axiom violations (squares not bijective,
    range/source not preserved, sources present, failed associativity).
    """
    rep = ValidationReport()

    for ident in g.duplicate_edge_ids:
        rep.add(STRUCTURAL, "duplicate-edge-id", ident, "edge id defined twice")
    for e in g.edges.values():
        if e.range_vertex not in g.vertex_set:
            rep.add(STRUCTURAL, "dangling-vertex", e.ident,
                    f"range vertex {e.range_vertex!r} not declared")
        if e.source_vertex not in g.vertex_set:
            rep.add(STRUCTURAL, "dangling-vertex", e.ident,
                    f"source vertex {e.source_vertex!r} not declared")

    for pair in g.squares:
        i, j = pair
        if not (1 <= i < j <= g.k):
            rep.add(STRUCTURAL, "bad-color-pair", str(pair),
                    "square table color pair out of range or unordered")

    squares_usable = True
    for pair, table in g.squares.items():
        i, j = pair
        for (e, f), (f2, e2) in table.items():
            for ident, color in ((e, i), (f, j), (f2, j), (e2, i)):
                if ident not in g.edges:
                    rep.add(STRUCTURAL, "dangling-edge", ident,
                            f"square {pair} references unknown edge")
                    squares_usable = False
                elif g.edges[ident].color != color:
                    rep.add(STRUCTURAL, "wrong-color", ident,
                            f"square {pair} entry has color "
                            f"{g.edges[ident].color}, expected {color}")
                    squares_usable = False

    if not squares_usable:
        return rep

    # no sources: every vertex receives an edge of every color
    for v in g.vertices:
        for color in range(1, g.k + 1):
            if not g.edges_with_range(color, v):
                rep.add(AXIOM, "source-vertex", v,
                        f"no color-{color} edge with range {v!r}")

    # square tables: defined exactly on the composable ascending pairs,
    # injective, surjective onto the composable descending pairs, and
    # range/source preserving
    for i, j in itertools.combinations(range(1, g.k + 1), 2):
        table = g.squares.get((i, j), {})
        asc = {
            (e.ident, f.ident)
            for e in g.edges_of_color(i)
            for f in g.edges_of_color(j)
            if e.source_vertex == f.range_vertex
        }
        desc = {
            (f.ident, e.ident)
            for f in g.edges_of_color(j)
            for e in g.edges_of_color(i)
            if f.source_vertex == e.range_vertex
        }
        missing = asc - set(table)
        for key in sorted(missing):
            rep.add(AXIOM, "square-incomplete", str(key),
                    f"no square for composable pair of colors ({i},{j})")
        extra = set(table) - asc
        for key in sorted(extra):
            rep.add(AXIOM, "square-domain", str(key),
                    "square key is not a composable ascending pair")

        seen: dict[tuple[str, str], tuple[str, str]] = {}
        for key, val in table.items():
            if val in seen:
                rep.add(AXIOM, "square-not-injective", str(val),
                        f"pairs {seen[val]} and {key} map to the same word")
            seen[val] = key
        if set(seen) != desc:
            for val in sorted(desc - set(seen)):
                rep.add(AXIOM, "square-not-surjective", str(val),
                        "descending composable pair not reached")
            for val in sorted(set(seen) - desc):
                rep.add(AXIOM, "square-range", str(val),
                        "square value is not a composable descending pair")

        for (e, f), (f2, e2) in table.items():
            if {e, f, f2, e2} - set(g.edges):
                continue
            if g.edges[f2].range_vertex != g.edges[e].range_vertex:
                rep.add(AXIOM, "square-endpoint", f"({e},{f})",
                        "rewritten word changes the range vertex")
            if g.edges[e2].source_vertex != g.edges[f].source_vertex:
                rep.add(AXIOM, "square-endpoint", f"({e},{f})",
                        "rewritten word changes the source vertex")

    # associativity for triples of distinct colors: sorting a descending
    # 3-color word by the two possible swap schedules must agree; needs the
    # square tables to be intact, but tolerates unrelated findings
    squares_ok = not any(f.code.startswith("square") for f in rep.findings)
    if g.k >= 3 and squares_ok:
        for i, j, l in itertools.combinations(range(1, g.k + 1), 3):
            for a in g.edges_of_color(l):
                for b in g.edges_of_color(j):
                    if a.source_vertex != b.range_vertex:
                        continue
                    for c in g.edges_of_color(i):
                        if b.source_vertex != c.range_vertex:
                            continue
                        word = (a.ident, b.ident, c.ident)
                        one = _swap_schedule(g, word, (0, 1, 0))
                        two = _swap_schedule(g, word, (1, 0, 1))
                        if one != two:
                            rep.add(AXIOM, "associativity", str(word),
                                    f"schedules disagree: {one} vs {two}")
    return rep


def _swap_schedule(g: KGraph, word: tuple[str, ...], junctions) -> tuple[str, ...]:
    w = list(word)
    for t in junctions:
        a, b = g.edge(w[t]), g.edge(w[t + 1])
        e, f = g.squares_inv[(b.color, a.color)][(w[t], w[t + 1])]
        w[t], w[t + 1] = e, f
    return tuple(w)


def cylinder_partition_check(g: KGraph, u: str, n: Degree, m: Degree) -> bool:
    """True iff truncation to degree n partitions the degree-(n+m) paths at u.

    Every path must have exactly one degree-n head, the head must lie in
    uΛ^n, and every element of uΛ^n must occur as a head (so the fibers are
    nonempty and cover).
    """
    total = enumerate_paths(g, u, degree_add(n, m))
    fibers: dict[Path, int] = {p: 0 for p in enumerate_paths(g, u, n)}
    for a in total:
        head, tail = factorize(a, n)
        if compose(head, tail) != a:
            return False
        if head not in fibers:
            return False
        fibers[head] += 1
    if sum(fibers.values()) != len(total):
        return False
    return all(c >= 1 for c in fibers.values())


# ---------------------------------------------------------------------------
# the rank-1 graph of diagonal-degree paths


@dataclass
class DiagonalGraph:
    """Rank-1 graph with one edge per degree-(1,..,1) path of a source graph."""

    graph: KGraph
    source: KGraph
    edge_to_path: dict[str, Path]
    path_to_edge: dict[Path, str]

    @property
    def diagonal_degree(self) -> Degree:
        return (1,) * self.source.k


def diagonal_edge_id(p: Path) -> str:
    return "e[" + ".".join(p.edges) + "]"


def diagonal_graph(g: KGraph) -> DiagonalGraph:
    """Collapse each degree-(1,..,1) path to a single edge of a rank-1 graph."""
    p_vec = (1,) * g.k
    edge_rows = []
    edge_to_path: dict[str, Path] = {}
    path_to_edge: dict[Path, str] = {}
    for v in g.vertices:
        for lam in enumerate_paths(g, v, p_vec):
            ident = diagonal_edge_id(lam)
            edge_rows.append((ident, lam.range_vertex, lam.source_vertex))
            edge_to_path[ident] = lam
            path_to_edge[lam] = ident
    dg = KGraph(1, g.vertices, {1: edge_rows})
    return DiagonalGraph(dg, g, edge_to_path, path_to_edge)


def word_to_path(dg: DiagonalGraph, word, range_vertex: str | None = None) -> Path:
    """Expand a composable word of diagonal edges to the source-graph path it
    spells (the empty word needs an explicit vertex)."""
    if not word:
        if range_vertex is None:
            raise KGraphError("empty word needs a range vertex")
        return vertex_path(dg.source, range_vertex)
    out = dg.edge_to_path[word[0]]
    if range_vertex is not None and out.range_vertex != range_vertex:
        raise KGraphError("word does not start at the stated vertex")
    for ident in word[1:]:
        out = compose(out, dg.edge_to_path[ident])
    return out


def path_to_word(dg: DiagonalGraph, p: Path) -> list[str]:
    """Split a path of degree n·(1,..,1) into its unique chain of diagonal
    edges.  Inverse of ``word_to_path``."""
    if p.graph is not dg.source:
        raise KGraphError("path does not live in the source graph")
    d = p.degree
    if any(c != d[0] for c in d):
        raise KGraphError(f"degree {d} is not a multiple of the diagonal degree")
    word: list[str] = []
    rest = p
    for _ in range(d[0]):
        head, rest = factorize(rest, dg.diagonal_degree)
        word.append(dg.path_to_edge[head])
    return word
