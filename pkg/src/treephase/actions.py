"""Free-group words acting on the Cayley tree.

A reduced word both names a group element and, applied to the root, the
vertex it moves the root to.  Translating an edge family by a word flips
the root-relative orientation of exactly the edges on the geodesic between
the root and its image, which is what every closed-form correlation and
nonsingularity sum below rests on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ParameterOutOfRange, SpecMismatch
from .measures import DiscreteMeasure, MeasurePair, affinity, hellinger_sq, mix
from .trees import (
    CAYLEY,
    EdgeDirection,
    OrientedEdge,
    TreeSpec,
    Vertex,
    validate_vertex,
)


@dataclass(frozen=True)
class FreeWord:
    """Reduced word; letters use the Cayley vertex letter encoding."""

    letters: tuple

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(letter ^ 1 for letter in reversed(self.letters)))


IDENTITY = FreeWord(())


def reduce_letters(letters: Sequence[int]) -> tuple:
    out: list = []
    for letter in letters:
        if out and out[-1] == letter ^ 1:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def make_word(letters: Sequence[int], d: int) -> FreeWord:
    for letter in letters:
        if not 0 <= letter < 2 * d:
            raise ParameterOutOfRange(f"letter {letter} out of range for rank {d}")
    return FreeWord(reduce_letters(letters))


def parse_word(text: str, d: int) -> FreeWord:
    from .trees import _char_to_letter

    return make_word([_char_to_letter(ch) for ch in text], d)


def compose(g: FreeWord, h: FreeWord) -> FreeWord:
    return FreeWord(reduce_letters(g.letters + h.letters))


def _require_cayley(spec: TreeSpec, g: FreeWord) -> None:
    if spec.kind != CAYLEY:
        raise SpecMismatch("free-group words act on cayley trees only")
    for letter in g.letters:
        if not 0 <= letter < 2 * spec.degree:
            raise SpecMismatch(f"letter {letter} out of range for {spec.encode()}")


def act_on_vertex(spec: TreeSpec, g: FreeWord, v: Vertex) -> Vertex:
    """Left translation: reduced concatenation of g with the vertex word."""
    _require_cayley(spec, g)
    validate_vertex(spec, v)
    return Vertex(reduce_letters(g.letters + v.path))


def act_on_edge(spec: TreeSpec, g: FreeWord, e: OrientedEdge) -> OrientedEdge:
    """Translate an oriented edge and re-derive its root-relative direction."""
    a = act_on_vertex(spec, g, e.parent)
    b = act_on_vertex(spec, g, e.child)
    # The image pair is adjacent; the deeper endpoint is the new child.
    if a.depth < b.depth:
        parent, child = a, b
        flipped = False
    else:
        parent, child = b, a
        flipped = True
    direction = e.direction
    if flipped:
        direction = (
            EdgeDirection.AWAY_FROM_ROOT
            if direction is EdgeDirection.TOWARD_ROOT
            else EdgeDirection.TOWARD_ROOT
        )
    return OrientedEdge(parent, child, direction)


def flipped_edge_count(g: FreeWord) -> int:
    """Oriented edges whose orientation label differs after translating by g."""
    return 2 * len(g)


def kakutani_sum(
    g: FreeWord, pair: MeasurePair, nu: DiscreteMeasure, t: float
) -> float:
    """Total squared Hellinger discrepancy between the edge family and its
    g-translate, for the interpolated family at parameter t.

    Only the 2*|g| orientation-flipped edges contribute, each the full
    H^2 of the interpolated pair, so the sum is finite by construction and
    certifies nonsingularity of the translated product measure.
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"t={t!r} not in [0, 1]")
    h2 = hellinger_sq(mix(nu, pair.mu0, t), mix(nu, pair.mu1, t))
    return flipped_edge_count(g) * h2


def koopman_correlation(
    g: FreeWord, pair: MeasurePair, nu: DiscreteMeasure, t: float
) -> float:
    """Correlation of the constant vector with its Koopman translate.

    Equals the interpolated affinity raised to the number of flipped
    oriented edges; always in (0, 1] and tending to 1 as t tends to 0.
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"t={t!r} not in [0, 1]")
    aff = affinity(mix(nu, pair.mu0, t), mix(nu, pair.mu1, t))
    return aff ** flipped_edge_count(g)
