"""Undirected bounded-degree graphs and node-subset (bag) arithmetic.

Bags are canonically encoded as integer bitmasks (bit v set = node v is a
member).  Python integers are arbitrary precision, so the same encoding
serves every graph size; full-lattice tables elsewhere in the package are
what carry size caps, not the encoding.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator

import numpy as np

from .errors import GenerationError, GraphParseError, InvalidBagError

GENERATOR_KINDS = (
    "line",
    "cycle",
    "star",
    "complete",
    "hypercube",
    "grid",
    "random_regular",
)


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


class Bag:
    """Immutable subset of nodes, stored as a bitmask."""

    __slots__ = ("mask",)

    def __init__(self, nodes: Iterable[int] = ()):
        mask = 0
        for v in nodes:
            if v < 0:
                raise InvalidBagError(f"negative node id {v}")
            mask |= 1 << v
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_mask(cls, mask: int) -> "Bag":
        if mask < 0:
            raise InvalidBagError("negative bitmask")
        bag = cls.__new__(cls)
        object.__setattr__(bag, "mask", mask)
        return bag

    def __setattr__(self, name, value):
        raise AttributeError("Bag is immutable")

    def __reduce__(self):
        return (Bag.from_mask, (self.mask,))

    def nodes(self) -> tuple[int, ...]:
        return tuple(self)

    def __iter__(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, v: int) -> bool:
        return v >= 0 and (self.mask >> v) & 1 == 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Bag) and self.mask == other.mask

    def __hash__(self) -> int:
        return hash(self.mask)

    def __repr__(self) -> str:
        return f"Bag({{{', '.join(map(str, self))}}})"

    def __or__(self, other: "Bag") -> "Bag":
        return Bag.from_mask(self.mask | other.mask)

    def __and__(self, other: "Bag") -> "Bag":
        return Bag.from_mask(self.mask & other.mask)

    def __sub__(self, other: "Bag") -> "Bag":
        return Bag.from_mask(self.mask & ~other.mask)

    def __xor__(self, other: "Bag") -> "Bag":
        return Bag.from_mask(self.mask ^ other.mask)

    def add(self, v: int) -> "Bag":
        return Bag.from_mask(self.mask | (1 << v))

    def remove(self, v: int) -> "Bag":
        return Bag.from_mask(self.mask & ~(1 << v))

    def issubset(self, other: "Bag") -> bool:
        return self.mask & ~other.mask == 0


EMPTY_BAG = Bag.from_mask(0)


class Graph:
    """Immutable undirected graph on nodes 0..n-1 with a declared degree bound.

    ``degree_bound`` defaults to the exact maximum degree; a larger value may
    be declared (never a smaller one) because size-sensitive inequalities are
    stated in terms of the declared bound.
    """

    __slots__ = ("node_count", "edges", "adjacency", "degree_bound", "full_mask")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]],
                 degree_bound: int | None = None):
        if node_count < 1:
            raise GenerationError("graph needs at least one node")
        adj: list[list[int]] = [[] for _ in range(node_count)]
        edge_set: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise GraphParseError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphParseError(f"edge ({u}, {v}) out of range 0..{node_count - 1}")
            e = (u, v) if u < v else (v, u)
            if e in edge_set:
                raise GraphParseError(f"duplicate edge ({e[0]}, {e[1]})")
            edge_set.add(e)
            adj[u].append(v)
            adj[v].append(u)
        max_degree = max((len(a) for a in adj), default=0)
        if degree_bound is None:
            degree_bound = max_degree
        elif degree_bound < max_degree:
            raise GraphParseError(
                f"declared degree bound {degree_bound} below actual maximum {max_degree}")
        object.__setattr__(self, "node_count", node_count)
        object.__setattr__(self, "edges", frozenset(edge_set))
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "degree_bound", degree_bound)
        object.__setattr__(self, "full_mask", (1 << node_count) - 1)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __reduce__(self):
        return (Graph, (self.node_count, sorted(self.edges), self.degree_bound))

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def all_nodes(self) -> Bag:
        return Bag.from_mask(self.full_mask)

    def check_bag(self, a: Bag) -> None:
        if a.mask >> self.node_count:
            raise InvalidBagError(
                f"bag {a!r} has members outside 0..{self.node_count - 1}")

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph)
                and self.node_count == other.node_count
                and self.edges == other.edges
                and self.degree_bound == other.degree_bound)

    def __hash__(self) -> int:
        return hash((self.node_count, self.edges, self.degree_bound))

    def __repr__(self) -> str:
        return (f"Graph(n={self.node_count}, edges={len(self.edges)}, "
                f"degree_bound={self.degree_bound})")


def cut(g: Graph, a: Bag) -> int:
    """Number of edges with exactly one endpoint in ``a``."""
    g.check_bag(a)
    mask = a.mask
    total = 0
    for v in a:
        for u in g.adjacency[v]:
            if not (mask >> u) & 1:
                total += 1
    return total


def cut_of_mask(g: Graph, mask: int) -> int:
    """Cut of a bag given directly as a bitmask."""
    return cut(g, Bag.from_mask(mask))


def cut_after_toggle(g: Graph, a: Bag, v: int, current_cut: int) -> int:
    """Cut of ``a`` with node ``v`` toggled, updated in O(deg(v)).

    ``current_cut`` must equal ``cut(g, a)``; a stale value silently
    propagates (this is the caller's contract).
    """
    if not 0 <= v < g.node_count:
        raise InvalidBagError(f"node {v} out of range")
    g.check_bag(a)
    inside = 0
    for u in g.adjacency[v]:
        if u in a:
            inside += 1
    outside = g.degree(v) - inside
    if v in a:
        return current_cut - outside + inside
    return current_cut + outside - inside


def cut_table(g: Graph) -> np.ndarray:
    """Cuts of all 2^n bags as a uint16 array indexed by bag bitmask."""
    n = g.node_count
    masks = np.arange(1 << n, dtype=np.uint32)
    table = np.zeros(1 << n, dtype=np.uint16)
    for u, v in sorted(g.edges):
        table += (((masks >> u) ^ (masks >> v)) & 1).astype(np.uint16)
    return table


def _pairing_attempt(n: int, d: int, rng: np.random.Generator):
    stubs = np.repeat(np.arange(n), d)
    rng.shuffle(stubs)
    edges = set()
    for i in range(0, len(stubs), 2):
        u, v = int(stubs[i]), int(stubs[i + 1])
        if u == v:
            return None
        e = (u, v) if u < v else (v, u)
        if e in edges:
            return None
        edges.add(e)
    return edges


def generate(kind: str, params: tuple[int, ...] = (), seed: int = 0) -> Graph:
    """Build a named graph family member; deterministic for a given seed."""
    if kind == "line":
        (n,) = params
        if n < 1:
            raise GenerationError("line needs n >= 1")
        return Graph(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "cycle":
        (n,) = params
        if n < 3:
            raise GenerationError("cycle needs n >= 3")
        return Graph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "star":
        (leaves,) = params
        if leaves < 0:
            raise GenerationError("star needs a nonnegative leaf count")
        return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])
    if kind == "complete":
        (n,) = params
        if n < 1:
            raise GenerationError("complete needs n >= 1")
        return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    if kind == "hypercube":
        (d,) = params
        if d < 0:
            raise GenerationError("hypercube needs d >= 0")
        n = 1 << d
        return Graph(n, [(x, x | (1 << b))
                         for x in range(n) for b in range(d) if not (x >> b) & 1])
    if kind == "grid":
        rows, cols = params
        if rows < 1 or cols < 1:
            raise GenerationError("grid needs positive dimensions")
        edges = []
        for i in range(rows):
            for j in range(cols):
                v = i * cols + j
                if j + 1 < cols:
                    edges.append((v, v + 1))
                if i + 1 < rows:
                    edges.append((v, v + cols))
        return Graph(rows * cols, edges)
    if kind == "random_regular":
        n, d = params
        if d < 0 or d > n - 1 or (n * d) % 2 != 0:
            raise GenerationError(
                f"random_regular needs 0 <= d <= n-1 and even n*d, got n={n}, d={d}")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        for _ in range(10000):
            edges = _pairing_attempt(n, d, rng)
            if edges is not None:
                return Graph(n, edges)
        raise GenerationError(f"pairing model failed for n={n}, d={d}, seed={seed}")
    raise GenerationError(f"unknown graph kind {kind!r}")


def parse_graph(text: str) -> Graph:
    """Parse either the edge-list text format or the JSON format.

    Edge list: first line is n, then one ``u v`` pair per line, 0-based;
    ``#`` starts a comment.  JSON: ``{"n": int, "edges": [[u, v], ...],
    "degree_bound": int?}``.
    """
    if text.lstrip().startswith("{"):
        return _parse_graph_json(text)
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 1:
                raise GraphParseError("expected node count", line=lineno)
            try:
                n = int(fields[0])
            except ValueError:
                raise GraphParseError(f"bad node count {fields[0]!r}", line=lineno)
            if n < 1:
                raise GraphParseError("node count must be positive", line=lineno)
            continue
        if len(fields) != 2:
            raise GraphParseError(f"expected 'u v', got {line!r}", line=lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphParseError(f"non-integer node id in {line!r}", line=lineno)
        if u == v:
            raise GraphParseError(f"self-loop at node {u}", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"edge ({u}, {v}) out of range 0..{n - 1}", line=lineno)
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise GraphParseError(f"duplicate edge ({e[0]}, {e[1]})", line=lineno)
        seen.add(e)
        edges.append(e)
    if n is None:
        raise GraphParseError("empty input")
    return Graph(n, edges)


def _parse_graph_json(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"bad JSON: {exc}", line=exc.lineno)
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise GraphParseError('JSON graph needs "n" and "edges"')
    edges = [tuple(e) for e in doc["edges"]]
    for e in edges:
        if len(e) != 2 or not all(isinstance(x, int) for x in e):
            raise GraphParseError(f"bad edge {list(e)!r}")
    return Graph(doc["n"], edges, degree_bound=doc.get("degree_bound"))


def serialize_graph(g: Graph, fmt: str = "edgelist") -> str:
    """Canonical text form; ``parse_graph`` round-trips it exactly."""
    if fmt == "edgelist":
        lines = [str(g.node_count)]
        lines += [f"{u} {v}" for u, v in sorted(g.edges)]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps(
            {"n": g.node_count,
             "edges": [list(e) for e in sorted(g.edges)],
             "degree_bound": g.degree_bound},
            separators=(",", ":")) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
