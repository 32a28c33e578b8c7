"""Exact resistance tables, CutWidth, and independent brute-force oracles.

The resistance of a bag is the minimum, over all crusades from the bag to
the empty set, of the maximum cut entered along the way (the starting bag's
own cut does not count).  The resistance of the full node set is the
CutWidth of the graph.

The main algorithm is value iteration on the bottleneck fixed-point
equation

    gamma(A) = min over {B : |A \\ B| <= 1} of max(cut(B), gamma(B))

with the exponentially large successor set collapsed to n+1 lookups per bag
by a superset-minimum lattice transform.  Entries only decrease and are
bounded below by zero, so iteration from the all-unreached start terminates
at the greatest fixed point, which is the crusade-definition value.
"""

from __future__ import annotations

import heapq
import io
import struct

import numpy as np

from .crusade import Crusade
from .errors import CapacityError, ErlError
from .graph import Bag, Graph, cut_table

LATTICE_CAP = 20    # full 2^n tables
ORACLE_CAP = 10     # literal state-graph search
UNREACHED = int(np.iinfo(np.uint16).max)

MAGIC = b"RGT1"


def _require_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapacityError(
            f"{what} is capped at n <= {cap}, got n = {n}; "
            "use brute_force_resistance for single-source queries on small graphs")


def superset_min(values: np.ndarray, n: int) -> np.ndarray:
    """m[C] = min over D ⊇ C of values[D], via the n-pass lattice sweep."""
    m = values.copy()
    for v in range(n):
        step = 1 << v
        r = m.reshape(-1, 2, step)
        np.minimum(r[:, 0, :], r[:, 1, :], out=r[:, 0, :])
    return m


def _bellman_rhs(values: np.ndarray, cut_t: np.ndarray, n: int) -> np.ndarray:
    """One application of the fixed-point operator to ``values``."""
    f = np.maximum(cut_t, values)
    m = superset_min(f, n)
    rhs = m.copy()
    masks = np.arange(1 << n, dtype=np.int64)
    for v in range(n):
        np.minimum(rhs, m[masks & ~(1 << v)], out=rhs)
    return rhs


class ResistanceTable:
    """gamma(A) for every bag of a graph, indexed by bag bitmask."""

    def __init__(self, graph: Graph | None, values: np.ndarray, converged_rounds: int):
        self.graph = graph
        self.values = values
        self.converged_rounds = converged_rounds

    @property
    def node_count(self) -> int:
        return int(np.log2(len(self.values)) + 0.5)

    def gamma(self, bag) -> int:
        mask = bag.mask if isinstance(bag, Bag) else int(bag)
        return int(self.values[mask])

    @property
    def cutwidth(self) -> int:
        return int(self.values[-1])

    def dump_binary(self) -> bytes:
        return MAGIC + struct.pack("<I", self.node_count) + \
            self.values.astype("<u2").tobytes()

    @classmethod
    def load_binary(cls, data: bytes, graph: Graph | None = None) -> "ResistanceTable":
        if data[:4] != MAGIC:
            raise ErlError("bad magic bytes in table dump")
        (n,) = struct.unpack("<I", data[4:8])
        body = data[8:]
        if len(body) != 2 << n:
            raise ErlError(f"table dump for n={n} has wrong length {len(body)}")
        values = np.frombuffer(body, dtype="<u2").astype(np.uint16)
        return cls(graph, values, converged_rounds=0)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("bag_bitmask,gamma\n")
        for mask, g in enumerate(self.values):
            out.write(f"{mask},{g}\n")
        return out.getvalue()


class MonotoneResistanceTable(ResistanceTable):
    """Resistance restricted to crusades that only remove nodes."""


def resistance_table(g: Graph) -> ResistanceTable:
    """gamma(A) for all 2^n bags by value iteration (n <= 20)."""
    n = g.node_count
    _require_cap(n, LATTICE_CAP, "resistance_table")
    cut_t = cut_table(g)
    gamma = np.full(1 << n, UNREACHED, dtype=np.uint16)
    gamma[0] = 0
    rounds = 0
    while True:
        rounds += 1
        new = np.minimum(gamma, _bellman_rhs(gamma, cut_t, n))
        if np.array_equal(new, gamma):
            break
        gamma = new
    return ResistanceTable(g, gamma, converged_rounds=rounds)


def _popcount_layers(n: int) -> list[np.ndarray]:
    masks = np.arange(1 << n, dtype=np.int64)
    pops = np.bitwise_count(masks).astype(np.int64)
    order = np.argsort(pops, kind="stable")
    counts = np.bincount(pops, minlength=n + 1)
    layers, start = [], 0
    for k in range(n + 1):
        layers.append(order[start:start + counts[k]])
        start += counts[k]
    return layers


def monotone_resistance_table(g: Graph) -> MonotoneResistanceTable:
    """DP over subsets in increasing size order; removal-only crusades.

    The full-set entry is the classical deletion-ordering CutWidth.
    """
    n = g.node_count
    _require_cap(n, LATTICE_CAP, "monotone_resistance_table")
    cut_t = cut_table(g)
    mg = np.full(1 << n, UNREACHED, dtype=np.uint16)
    mg[0] = 0
    for layer in _popcount_layers(n)[1:]:
        best = np.full(layer.shape, UNREACHED, dtype=np.uint16)
        for v in range(n):
            bit = 1 << v
            hasv = (layer & bit) != 0
            if not hasv.any():
                continue
            sub = layer[hasv] ^ bit
            cand = np.maximum(cut_t[sub], mg[sub])
            best[hasv] = np.minimum(best[hasv], cand)
        mg[layer] = best
    return MonotoneResistanceTable(g, mg, converged_rounds=1)


def cutwidth(g: Graph) -> int:
    """Resistance of the full node set; cross-checked against the
    removal-only DP, which computes the same number by a theorem of the
    underlying theory."""
    w = resistance_table(g).cutwidth
    w_mono = monotone_resistance_table(g).cutwidth
    if w != w_mono:
        raise ErlError(
            f"cutwidth mismatch: nonmonotone {w} vs monotone {w_mono} "
            "(implementation bug)")
    return w


def brute_force_resistance(g: Graph, a: Bag) -> int:
    """Independent single-source oracle (n <= 10).

    Literal minimax search on the full state digraph: from bag A, drop one
    member (or none), then extend by every superset; edge cost is the cut of
    the entered bag; label-setting in increasing bottleneck value.
    """
    n = g.node_count
    _require_cap(n, ORACLE_CAP, "brute_force_resistance")
    g.check_bag(a)
    cut_t = cut_table(g)
    full = (1 << n) - 1
    src = a.mask
    dist = {src: 0}
    heap = [(0, src)]
    settled = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in settled:
            continue
        settled.add(x)
        if x == 0:
            return d
        bases = [x] + [x & ~(1 << v) for v in range(n) if (x >> v) & 1]
        for base in bases:
            free = full & ~base
            s = free
            while True:
                b = base | s
                nd = max(d, int(cut_t[b]))
                if nd < dist.get(b, UNREACHED):
                    dist[b] = nd
                    heapq.heappush(heap, (nd, b))
                if s == 0:
                    break
                s = (s - 1) & free
    raise ErlError("unreachable: the empty bag is reachable from every bag")


def brute_force_resistance_all(g: Graph) -> np.ndarray:
    """Oracle distances from every bag at once (n <= 10).

    Label-setting outward from the empty bag over reversed steps, with
    in-neighbors enumerated literally (every subset of the settled bag,
    optionally plus one outside node).
    """
    n = g.node_count
    _require_cap(n, ORACLE_CAP, "brute_force_resistance_all")
    cut_t = cut_table(g)
    dist = np.full(1 << n, UNREACHED, dtype=np.int64)
    dist[0] = 0
    settled = np.zeros(1 << n, dtype=bool)
    heap = [(0, 0)]
    while heap:
        d, y = heapq.heappop(heap)
        if settled[y]:
            continue
        settled[y] = True
        cand = max(d, int(cut_t[y]))
        outside = [1 << w for w in range(n) if not (y >> w) & 1]
        s = y
        while True:
            if cand < dist[s]:
                dist[s] = cand
                heapq.heappush(heap, (cand, s))
            for wbit in outside:
                z = s | wbit
                if cand < dist[z]:
                    dist[z] = cand
                    heapq.heappush(heap, (cand, z))
            if s == 0:
                break
            s = (s - 1) & y
    return dist


class BellmanCheck:
    def __init__(self, passed: bool, witness_mask: int | None = None,
                 lhs: int | None = None, rhs: int | None = None):
        self.passed = passed
        self.witness_mask = witness_mask
        self.lhs = lhs
        self.rhs = rhs

    def __repr__(self) -> str:
        if self.passed:
            return "BellmanCheck(passed)"
        return (f"BellmanCheck(failed at bag {self.witness_mask:#x}: "
                f"table {self.lhs} vs operator {self.rhs})")


def check_bellman(g: Graph, table: ResistanceTable) -> BellmanCheck:
    """Verify the bottleneck fixed-point equation at every bag.

    The right-hand side is recomputed with the superset-min transform, so
    the whole check is O(n 2^n).  Returns the first violating bag (in mask
    order) with both sides on failure.

    The equation is a necessary condition only: the true table is its
    greatest fixed point, but smaller fixed points exist (the identically
    zero table is one, since every bag may step to the zero-cut full set).
    A passing check therefore certifies a table from above; equality with
    the crusade definition is what the brute-force oracle tests establish.
    """
    n = g.node_count
    gamma = table.values
    if gamma[0] != 0:
        return BellmanCheck(False, 0, int(gamma[0]), 0)
    rhs = _bellman_rhs(gamma, cut_table(g), n)
    bad = np.nonzero(rhs != gamma)[0]
    if bad.size:
        first = int(bad[0])
        return BellmanCheck(False, first, int(gamma[first]), int(rhs[first]))
    return BellmanCheck(True)


def witness_crusade(g: Graph, table: ResistanceTable, a: Bag) -> Crusade:
    """A concrete optimal crusade from ``a`` to the empty bag.

    Walks a shortest crusade among those of optimal width: every entered bag
    has cut at most gamma(a).  Ties prefer fewer remaining steps, then
    smaller bags, then smaller bitmask, so output is deterministic.
    """
    n = g.node_count
    _require_cap(n, LATTICE_CAP, "witness_crusade")
    g.check_bag(a)
    if a.mask == 0:
        return Crusade((a,))
    t = table.gamma(a)
    size = 1 << n
    cut_t = cut_table(g)
    allowed = cut_t <= t
    masks = np.arange(size, dtype=np.int64)
    pops = np.bitwise_count(masks).astype(np.int64)
    inf = np.int64(1) << 62

    steps = np.full(size, inf, dtype=np.int64)
    steps[0] = 0
    src = a.mask
    for _ in range(size + 1):
        if steps[src] < inf:
            break
        f = np.where(allowed, steps, inf)
        m = superset_min(f, n)
        new = m.copy()
        for v in range(n):
            np.minimum(new, m[masks & ~(1 << v)], out=new)
        np.minimum(steps, new + 1, out=steps)
    else:
        raise ErlError("no crusade within the optimal width reached the source "
                       "(implementation bug)")

    # Composite key packs (steps, popcount, mask) so one superset-min gives
    # the lexicographic argmin over supersets.
    key = np.where(allowed & (steps < inf),
                   (steps << (n + 5)) | (pops << n) | masks,
                   inf)
    km = superset_min(key, n)

    bags = [a]
    cur = src
    while cur:
        best = km[cur]
        for v in range(n):
            if (cur >> v) & 1:
                best = min(best, km[cur & ~(1 << v)])
        if best >= inf:
            raise ErlError("witness walk stuck (implementation bug)")
        nxt = int(best & (size - 1))
        if int(best >> (n + 5)) != int(steps[cur]) - 1:
            raise ErlError("witness walk did not shorten (implementation bug)")
        bags.append(Bag.from_mask(nxt))
        cur = nxt
    return Crusade(tuple(bags))


class CompleteGraphResistance:
    """Closed-form resistance lookup for complete graphs, any size.

    On a complete graph every bag of a given size has the same cut, a
    crusade's size sequence steps down by at most one per step, and growing
    the bag never helps, so gamma depends only on bag size:
    gamma(|A| = k) = max over 1 <= j <= k-1 of j(n-j).  Cross-checked
    against the dense table for small n in the test suite.
    """

    def __init__(self, graph: Graph):
        n = graph.node_count
        if len(graph.edges) != n * (n - 1) // 2:
            raise ErlError("CompleteGraphResistance needs a complete graph")
        self.graph = graph
        by_size = [0] * (n + 1)
        best = 0
        for k in range(2, n + 1):
            j = k - 1
            best = max(best, j * (n - j))
            by_size[k] = best
        self.by_size = by_size

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    def gamma(self, bag) -> int:
        mask = bag.mask if isinstance(bag, Bag) else int(bag)
        return self.by_size[mask.bit_count()]

    @property
    def cutwidth(self) -> int:
        return self.by_size[self.node_count]
