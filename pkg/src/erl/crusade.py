"""Crusade validity, width, and the bottleneck sequence of a trajectory.

A crusade is a sequence of bags in which each step may add arbitrarily many
nodes but remove at most one.  The bottleneck sequence of a unit-step bag
sequence is its running intersection: it tracks removals and ignores
additions, which is what lets recovery counts be read off cut growth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ErlError
from .graph import Bag, Graph, cut


@dataclass(frozen=True)
class Crusade:
    """Ordered bag sequence obeying the remove-at-most-one-per-step rule."""

    bags: tuple[Bag, ...]

    def __post_init__(self):
        if not self.bags:
            raise ErlError("a crusade has at least one bag")
        for i in range(len(self.bags) - 1):
            if len(self.bags[i] - self.bags[i + 1]) > 1:
                raise ErlError(f"step {i} removes more than one node")

    def __len__(self) -> int:
        return len(self.bags)


@dataclass(frozen=True)
class BottleneckSequence:
    """Running intersection of a unit-step bag sequence."""

    bags: tuple[Bag, ...]

    def __len__(self) -> int:
        return len(self.bags)


@dataclass(frozen=True)
class CrusadeCheck:
    valid: bool
    violation_index: int | None
    reason: str | None


@dataclass(frozen=True)
class BottleneckAudit:
    passed: bool
    steps_checked: int
    violation_index: int | None
    reason: str | None


def validate_crusade(seq: Sequence[Bag], a: Bag, b: Bag) -> CrusadeCheck:
    """Check that ``seq`` is a crusade from ``a`` to ``b``.

    The violation index is the position of the first offending bag (for the
    step rule, the index of the step's first bag).
    """
    if len(seq) == 0:
        raise ErlError("empty sequence is not a crusade")
    if seq[0] != a:
        return CrusadeCheck(False, 0, f"starts at {seq[0]!r}, expected {a!r}")
    if seq[-1] != b:
        return CrusadeCheck(False, len(seq) - 1,
                            f"ends at {seq[-1]!r}, expected {b!r}")
    for i in range(len(seq) - 1):
        removed = len(seq[i] - seq[i + 1])
        if removed > 1:
            return CrusadeCheck(False, i, f"step {i} removes {removed} nodes")
    return CrusadeCheck(True, None, None)


def width(g: Graph, c: Crusade) -> int:
    """Maximum cut over the crusade's bags, excluding the initial bag.

    A single-bag crusade has width 0 (maximum over an empty index set).
    """
    return max((cut(g, w) for w in c.bags[1:]), default=0)


def _check_unit_step(prev: Bag, cur: Bag, i: int) -> None:
    if len(prev ^ cur) != 1:
        raise ErlError(
            f"step {i} is not a unit step (symmetric difference size "
            f"{len(prev ^ cur)})")


def iter_bottleneck(seq: Iterable[Bag]) -> Iterator[Bag]:
    """Yield the running-intersection sequence without materializing it.

    Equivalent to intersecting all prefixes: on a removal of v, drop v from
    the running bag if present; on an addition, leave it unchanged.  Holds
    only the previous bag and the running intersection, so trajectory-length
    inputs stream through.
    """
    it = iter(seq)
    try:
        prev = next(it)
    except StopIteration:
        raise ErlError("empty sequence has no bottleneck sequence")
    theta = prev.mask
    yield Bag.from_mask(theta)
    for i, cur in enumerate(it, start=1):
        _check_unit_step(prev, cur, i)
        theta &= cur.mask
        prev = cur
        yield Bag.from_mask(theta)


def bottleneck_sequence(seq: Sequence[Bag]) -> BottleneckSequence:
    """Materialized form of :func:`iter_bottleneck`."""
    return BottleneckSequence(tuple(iter_bottleneck(seq)))


def audit_bottleneck(g: Graph, seq: Sequence[Bag],
                     theta: Sequence[Bag] | None = None) -> BottleneckAudit:
    """Audit the bottleneck sequence of a unit-step bag sequence.

    Checks, index by index: the bottleneck bag stays inside the source bag;
    its cut grows only on removal steps; and it grows by at most the degree
    bound per step.  ``theta`` overrides the computed sequence so that
    corrupted inputs can be fed in deliberately.
    """
    thetas = list(theta) if theta is not None else list(iter_bottleneck(seq))
    if len(thetas) != len(seq):
        return BottleneckAudit(False, 0, 0, "length mismatch with source sequence")
    prev_cut = cut(g, thetas[0])
    if not thetas[0].issubset(seq[0]):
        return BottleneckAudit(False, 0, 0, "bottleneck bag not inside source bag")
    for i in range(1, len(seq)):
        _check_unit_step(seq[i - 1], seq[i], i)
        cur_cut = cut(g, thetas[i])
        if not thetas[i].issubset(seq[i]):
            return BottleneckAudit(False, i, i, "bottleneck bag not inside source bag")
        if not thetas[i].issubset(thetas[i - 1]):
            return BottleneckAudit(False, i, i, "bottleneck bag grew")
        if cur_cut > prev_cut and not (seq[i].issubset(seq[i - 1]) and seq[i] != seq[i - 1]):
            return BottleneckAudit(False, i, i, "cut increased on a non-removal step")
        if cur_cut - prev_cut > g.degree_bound:
            return BottleneckAudit(
                False, i, i,
                f"cut increased by {cur_cut - prev_cut} > degree bound {g.degree_bound}")
        prev_cut = cur_cut
    return BottleneckAudit(True, len(seq) - 1, None, None)


def crusade_to_json(c: Crusade | BottleneckSequence) -> str:
    """Debug serialization: a JSON array of sorted node-id arrays."""
    return json.dumps([list(b.nodes()) for b in c.bags], separators=(",", ":"))


def crusade_from_json(text: str) -> Crusade:
    return Crusade(tuple(Bag(nodes) for nodes in json.loads(text)))
