"""Signaled functions, represented by partitions of the four (y, b) pairs.

A hidden channel from Bob's box to Alice's box carries some function
f(y, b) of Bob's input and output. Two functions are physically
equivalent when they induce the same grouping of the domain {0,1}^2:
only which pairs are told apart matters, never the values on the target
set. A grouping of a 4-element set is one of 15 partitions, so there are
exactly 15 physically distinct signals, one of which (the constant
function) carries nothing.

Partitions are stored canonically: walking the domain in the fixed order
(0,0), (0,1), (1,0), (1,1), the first pair seen gets class label 0, the
next unseen class gets 1, and so on. Equality of canonical labels is
then equality of groupings. The 4-character string form used in CLI
flags ("0110" for y XOR b) lists the labels in the same domain order.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from itertools import product

from .errors import RangeError

#: Domain of a signaled function, in canonical order.
CELLS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


def _canonicalize(raw: tuple) -> tuple[int, int, int, int]:
    seen: dict = {}
    labels = []
    for value in raw:
        if value not in seen:
            seen[value] = len(seen)
        labels.append(seen[value])
    return tuple(labels)


@dataclass(frozen=True)
class Partition:
    """Canonical grouping of the four (y, b) pairs.

    ``labels[i]`` is the class of ``CELLS[i]``; labels follow the
    first-seen convention, which makes equality a plain tuple
    comparison.
    """

    labels: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.labels) != 4:
            raise ValueError("a partition labels exactly 4 cells")
        if self.labels != _canonicalize(self.labels):
            raise ValueError(
                f"labels {self.labels} are not in canonical first-seen order"
            )

    @classmethod
    def from_labels(cls, raw) -> "Partition":
        """Build from any 4 labels, canonicalizing the class names."""
        values = tuple(raw)
        if len(values) != 4:
            raise ValueError("expected 4 labels")
        return cls(_canonicalize(values))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse the 4-character string form, e.g. "0110"."""
        if len(text) != 4 or not all(c in "0123" for c in text):
            raise ValueError(f"not a partition string: {text!r}")
        return cls.from_labels(int(c) for c in text)

    @property
    def string(self) -> str:
        return "".join(str(v) for v in self.labels)

    @property
    def num_classes(self) -> int:
        return max(self.labels) + 1

    def is_constant(self) -> bool:
        return self.num_classes == 1

    def apply(self, y: int, b: int) -> int:
        """Class label signaled for Bob's pair (y, b)."""
        return self.labels[2 * y + b]

    def classes(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """The grouping itself: one tuple of (y, b) cells per class."""
        groups: list[list[tuple[int, int]]] = [[] for _ in range(self.num_classes)]
        for cell, label in zip(CELLS, self.labels):
            groups[label].append(cell)
        return tuple(tuple(g) for g in groups)

    def refines(self, other: "Partition") -> bool:
        """True when every class of self lies inside a class of other."""
        mapping: dict[int, int] = {}
        for mine, theirs in zip(self.labels, other.labels):
            if mapping.setdefault(mine, theirs) != theirs:
                return False
        return True

    def __str__(self) -> str:
        return self.string


def enumerate_partitions() -> list[Partition]:
    """All 15 partitions of the 4-cell domain, in lexicographic label order.

    Enumerates restricted-growth strings: labels[0] = 0 and each later
    label is at most one above the running maximum, which yields each
    canonical partition exactly once.
    """
    found: list[Partition] = []

    def grow(prefix: list[int]):
        if len(prefix) == 4:
            found.append(Partition(tuple(prefix)))
            return
        top = max(prefix)
        for nxt in range(top + 2):
            grow(prefix + [nxt])

    grow([0])
    return found


def from_function(f: Callable[[int, int], object] | Mapping) -> Partition:
    """Partition induced by a total function on {0,1}^2.

    Accepts a callable f(y, b) or a mapping keyed by (y, b); the values
    may be anything hashable, since only the induced grouping survives.
    """
    if callable(f):
        raw = tuple(f(y, b) for (y, b) in CELLS)
    else:
        raw = tuple(f[cell] for cell in CELLS)
    return Partition(_canonicalize(raw))


def coarse_grainings(p: Partition) -> list[Partition]:
    """All two-class partitions that p refines.

    Merging the k classes of p into two nonempty groups gives
    2^(k-1) - 1 distinct coarse versions; a two-class p returns itself
    and the constant partition returns nothing.
    """
    k = p.num_classes
    out = []
    # Pin the class of the first cell to group 0 so each split appears
    # once and the result is already canonical.
    for tail in product((0, 1), repeat=k - 1):
        assignment = (0,) + tail
        if 1 not in assignment:
            continue
        out.append(Partition(tuple(assignment[label] for label in p.labels)))
    return out


def label_under(coarse: Partition, fine: Partition, fine_label: int) -> int:
    """Coarse class of a fine class, for coarse refined by fine.

    Raises RangeError when fine_label does not name a class of fine.
    """
    for cell, label in zip(CELLS, fine.labels):
        if label == fine_label:
            return coarse.apply(*cell)
    raise RangeError(f"partition {fine.string} has no class {fine_label}")


#: The signal is Bob's input y.
INPUT_PARTITION = from_function(lambda y, b: y)
#: The signal is Bob's output b.
OUTPUT_PARTITION = from_function(lambda y, b: b)
#: The signal tells whether input and output coincide.
XOR_PARTITION = from_function(lambda y, b: y ^ b)
#: The signal is the conjunction y AND b.
AND_PARTITION = from_function(lambda y, b: y & b)
#: The signal carries nothing.
CONSTANT_PARTITION = from_function(lambda y, b: 0)
#: The signal is the full pair (y, b).
FULL_PARTITION = from_function(lambda y, b: (y, b))
