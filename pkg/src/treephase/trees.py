"""Implicit rooted trees: regular trees and Cayley trees of free groups.

Vertices are paths from the root, never materialized as a graph.  The
breadth-first vertex index defined here doubles as the canonical id used
to key oriented-edge coordinates everywhere else in the package.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import DegenerateWindow, Overflow, ParameterOutOfRange, SpecMismatch

INT64_MAX = 2**63 - 1

REGULAR = "regular"
CAYLEY = "cayley"


@dataclass(frozen=True)
class TreeSpec:
    """Either the q-regular tree (q >= 3) or the Cayley tree of a rank-d
    free group (d >= 2), which is the 2d-regular tree with edge labels."""

    kind: str
    degree: int  # q for regular, d for cayley

    @staticmethod
    def regular(q: int) -> "TreeSpec":
        if q < 3:
            raise ParameterOutOfRange(f"regular tree needs q >= 3, got {q}")
        return TreeSpec(REGULAR, q)

    @staticmethod
    def cayley(d: int) -> "TreeSpec":
        if d < 2:
            raise ParameterOutOfRange(f"cayley tree needs d >= 2, got {d}")
        return TreeSpec(CAYLEY, d)

    @staticmethod
    def parse(text: str) -> "TreeSpec":
        kind, sep, num = text.partition(":")
        if not sep or kind not in (REGULAR, CAYLEY):
            raise ParameterOutOfRange(
                f"tree spec {text!r} not of the form regular:q or cayley:d"
            )
        try:
            value = int(num)
        except ValueError:
            raise ParameterOutOfRange(f"tree spec {text!r} has a non-integer degree")
        return TreeSpec.regular(value) if kind == REGULAR else TreeSpec.cayley(value)

    @property
    def root_degree(self) -> int:
        """Number of children of the root."""
        return self.degree if self.kind == REGULAR else 2 * self.degree

    @property
    def branching(self) -> int:
        """Number of children of every non-root vertex."""
        return self.degree - 1 if self.kind == REGULAR else 2 * self.degree - 1

    def encode(self) -> str:
        return f"{self.kind}:{self.degree}"


class EdgeDirection(Enum):
    TOWARD_ROOT = "TowardRoot"
    AWAY_FROM_ROOT = "AwayFromRoot"


@dataclass(frozen=True)
class Vertex:
    """Path from the root: child indices (regular) or reduced letters (cayley).

    Cayley letters are integers in [0, 2d): letter 2k is the k-th generator
    and letter 2k+1 its inverse, so ``letter ^ 1`` is the inverse letter.
    """

    path: tuple

    @property
    def depth(self) -> int:
        return len(self.path)

    def parent(self) -> "Vertex":
        if not self.path:
            raise ParameterOutOfRange("the root has no parent")
        return Vertex(self.path[:-1])


ROOT = Vertex(())


def _letter_to_char(letter: int) -> str:
    gen, inv = divmod(letter, 2)
    return string.ascii_uppercase[gen] if inv else string.ascii_lowercase[gen]


def _char_to_letter(ch: str) -> int:
    if ch in string.ascii_lowercase:
        return 2 * string.ascii_lowercase.index(ch)
    if ch in string.ascii_uppercase:
        return 2 * string.ascii_uppercase.index(ch) + 1
    raise ParameterOutOfRange(f"invalid word character {ch!r}")


def validate_vertex(spec: TreeSpec, v: Vertex) -> None:
    if spec.kind == REGULAR:
        q = spec.degree
        for i, step in enumerate(v.path):
            limit = q if i == 0 else q - 1
            if not 0 <= step < limit:
                raise ParameterOutOfRange(
                    f"step {step} at position {i} out of range for regular:{q}"
                )
    else:
        d = spec.degree
        prev = None
        for letter in v.path:
            if not 0 <= letter < 2 * d:
                raise ParameterOutOfRange(f"letter {letter} out of range for cayley:{d}")
            if prev is not None and letter == prev ^ 1:
                raise ParameterOutOfRange("word is not reduced")
            prev = letter


def encode_vertex(spec: TreeSpec, v: Vertex) -> str:
    if spec.kind == REGULAR:
        return ".".join(str(s) for s in v.path)
    return "".join(_letter_to_char(letter) for letter in v.path)


def parse_vertex(spec: TreeSpec, text: str) -> Vertex:
    if text == "":
        return ROOT
    if spec.kind == REGULAR:
        path = tuple(int(part) for part in text.split("."))
    else:
        path = tuple(_char_to_letter(ch) for ch in text)
    v = Vertex(path)
    validate_vertex(spec, v)
    return v


def sphere_size(spec: TreeSpec, n: int) -> int:
    """Number of vertices at distance n from the root."""
    if n < 0:
        raise ParameterOutOfRange(f"sphere radius {n} is negative")
    if n == 0:
        return 1
    size = spec.root_degree * spec.branching ** (n - 1)
    if size > INT64_MAX:
        raise Overflow(f"sphere at radius {n} holds {size} vertices, beyond int64")
    return size


def ball_size(spec: TreeSpec, n: int) -> int:
    """Number of vertices at distance at most n from the root."""
    if n < 0:
        raise ParameterOutOfRange(f"ball radius {n} is negative")
    b = spec.branching
    # 1 + root_degree * (b^n - 1) / (b - 1)
    size = 1 + spec.root_degree * (b**n - 1) // (b - 1)
    if size > INT64_MAX:
        raise Overflow(f"ball of radius {n} holds {size} vertices, beyond int64")
    return size


def level_offset(spec: TreeSpec, n: int) -> int:
    """Breadth-first index of the first vertex at depth n."""
    return 0 if n == 0 else ball_size(spec, n - 1)


def _child_rank(spec: TreeSpec, prev_letter: int, letter: int) -> int:
    # Rank of a non-first step among the branching() allowed continuations.
    if spec.kind == REGULAR:
        return letter
    forbidden = prev_letter ^ 1
    return letter - 1 if letter > forbidden else letter


def vertex_index(spec: TreeSpec, v: Vertex) -> int:
    """Breadth-first index; the root is 0, depth-n vertices are contiguous."""
    validate_vertex(spec, v)
    if not v.path:
        return 0
    j = v.path[0]
    for prev, letter in zip(v.path, v.path[1:]):
        j = j * spec.branching + _child_rank(spec, prev, letter)
    return level_offset(spec, v.depth) + j


@dataclass(frozen=True)
class OrientedEdge:
    """One orientation of a tree edge; ``parent`` is the endpoint nearer
    the root and ``child`` extends it by one step."""

    parent: Vertex
    child: Vertex
    direction: EdgeDirection

    def __post_init__(self):
        if self.child.path[: len(self.parent.path)] != self.parent.path or (
            self.child.depth != self.parent.depth + 1
        ):
            raise ParameterOutOfRange("child must extend parent by exactly one step")


def edge_counter(spec: TreeSpec, edge: OrientedEdge) -> int:
    """Canonical coordinate id: 2*vid(child) for TowardRoot, +1 for Away."""
    vid = vertex_index(spec, edge.child)
    base = 2 * vid
    return base if edge.direction is EdgeDirection.TOWARD_ROOT else base + 1


def tree_distance(spec: TreeSpec, v: Vertex, w: Vertex) -> int:
    validate_vertex(spec, v)
    validate_vertex(spec, w)
    common = 0
    for a, b in zip(v.path, w.path):
        if a != b:
            break
        common += 1
    return (v.depth - common) + (w.depth - common)


def path_edges(spec: TreeSpec, v: Vertex, w: Vertex) -> list:
    """Both orientations of every edge on the geodesic from v to w.

    Returns 2*d(v, w) oriented edges, walking from v up to the common
    ancestor and then down to w.
    """
    validate_vertex(spec, v)
    validate_vertex(spec, w)
    common = 0
    for a, b in zip(v.path, w.path):
        if a != b:
            break
        common += 1

    edges: list = []

    def both(child: Vertex) -> None:
        parent = child.parent()
        edges.append(OrientedEdge(parent, child, EdgeDirection.TOWARD_ROOT))
        edges.append(OrientedEdge(parent, child, EdgeDirection.AWAY_FROM_ROOT))

    cur = v
    while cur.depth > common:
        both(cur)
        cur = cur.parent()
    for depth in range(common + 1, w.depth + 1):
        both(Vertex(w.path[:depth]))
    return edges


def iter_children(spec: TreeSpec, v: Vertex) -> Iterator[Vertex]:
    """Children of a vertex in canonical (index) order."""
    if not v.path:
        for step in range(spec.root_degree):
            yield Vertex((step,))
        return
    prev = v.path[-1]
    if spec.kind == REGULAR:
        for step in range(spec.degree - 1):
            yield Vertex(v.path + (step,))
    else:
        for letter in range(2 * spec.degree):
            if letter != prev ^ 1:
                yield Vertex(v.path + (letter,))


def iter_sphere(spec: TreeSpec, n: int) -> Iterator[Vertex]:
    """Depth-n vertices in breadth-first (index) order."""
    if n == 0:
        yield ROOT
        return

    def extend(v: Vertex, remaining: int) -> Iterator[Vertex]:
        if remaining == 0:
            yield v
            return
        for child in iter_children(spec, v):
            yield from extend(child, remaining - 1)

    yield from extend(ROOT, n)


def poincare_exponent(spec: TreeSpec) -> float:
    """Critical exponent of the orbital series for the full vertex orbit."""
    return math.log(spec.branching)


def estimate_exponent(sphere_counts: Sequence[int], window: tuple) -> float:
    """Least-squares slope of log(count) against radius over a window.

    Exact geometric growth gives back the growth log exactly; the operation
    exists so that externally measured orbit counts can be turned into an
    exponent estimate without the package knowing the group.
    """
    counts = list(sphere_counts)
    n0, n1 = window
    if not (0 <= n0 < n1 < len(counts)):
        raise DegenerateWindow(f"window {window!r} invalid for {len(counts)} counts")
    if any(c <= 0 for c in counts):
        raise ParameterOutOfRange("sphere counts must be positive")
    xs = np.arange(n0, n1 + 1, dtype=np.float64)
    ys = np.log(np.asarray(counts[n0 : n1 + 1], dtype=np.float64))
    xc = xs - xs.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise DegenerateWindow("window has no spread")
    return float(np.dot(xc, ys - ys.mean()) / denom)
