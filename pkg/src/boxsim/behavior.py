"""Behaviors of the two-party scenario with binary inputs and outputs.

A behavior is the 16-entry conditional table p(a, b | x, y): Alice picks
input x and sees output a, Bob picks y and sees b. The non-signaling
set is a polytope with 24 vertices: 16 deterministic local behaviors
plus the 8 relabelings of the PR box, the extremal box satisfying
a XOR b = x AND y with unbiased marginals.

CHSH facet enumeration order (stable across the package):
the four correlators are ordered E(0,0), E(0,1), E(1,0), E(1,1), where
E(x,y) = sum_{a,b} (-1)^(a+b) p(a,b|x,y). Facet i in 0..3 puts a minus
sign on correlator i and plus on the rest; facet i in 4..7 puts a plus
sign on correlator i-4 and minus on the rest. Local behaviors satisfy
S <= 2 on every facet; the canonical PR box reaches 4 on facet 3.

Quantum membership is approximated by the Tsirelson proxy
(chsh_value <= 2*sqrt(2) on all facets). That is a necessary condition,
not a certificate; it is all the simulation needs.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    GeometryError,
    InvalidBehaviorError,
    InvalidMixtureError,
    RangeError,
    SignalingBehaviorError,
)

NORMALIZATION_TOL = 1e-12

#: Sign patterns of the 8 CHSH facets, indexed per the module docstring.
FACET_SIGNS: tuple[tuple[int, int, int, int], ...] = tuple(
    [tuple(-1 if j == i else 1 for j in range(4)) for i in range(4)]
    + [tuple(1 if j == i else -1 for j in range(4)) for i in range(4)]
)


@dataclass(frozen=True, eq=False)
class Behavior:
    """Immutable conditional table p(a, b | x, y), indexed [a, b, x, y]."""

    probs: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.probs, dtype=np.float64).copy()
        if table.shape != (2, 2, 2, 2):
            raise InvalidBehaviorError(f"expected shape (2,2,2,2), got {table.shape}")
        if np.any(table < 0.0) or np.any(table > 1.0):
            raise InvalidBehaviorError("probabilities must lie in [0, 1]")
        sums = table.sum(axis=(0, 1))
        if np.any(np.abs(sums - 1.0) > NORMALIZATION_TOL):
            raise InvalidBehaviorError(
                f"each input pair must be normalized within {NORMALIZATION_TOL}"
            )
        table.setflags(write=False)
        object.__setattr__(self, "probs", table)

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.probs[a, b, x, y])

    def __eq__(self, other) -> bool:
        return isinstance(other, Behavior) and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def allclose(self, other: "Behavior", tol: float = NORMALIZATION_TOL) -> bool:
        return bool(np.all(np.abs(self.probs - other.probs) <= tol))


@dataclass(frozen=True)
class Marginal:
    """One party's conditional output table p(o | i), rows indexed by input."""

    side: str
    probs: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        if self.side not in ("alice", "bob"):
            raise ValueError(f"side must be 'alice' or 'bob', got {self.side!r}")
        for row in self.probs:
            if abs(sum(row) - 1.0) > NORMALIZATION_TOL:
                raise InvalidBehaviorError("marginal rows must sum to 1")

    def prob(self, o: int, i: int) -> float:
        return self.probs[i][o]


def _as_bit_table(fn, name: str) -> tuple[int, int]:
    """Normalize a response table {0,1} -> {0,1} given as mapping,
    sequence, or callable."""
    if callable(fn):
        values = (fn(0), fn(1))
    elif isinstance(fn, Mapping):
        values = (fn[0], fn[1])
    elif isinstance(fn, Sequence):
        if len(fn) != 2:
            raise ValueError(f"{name} must assign both inputs")
        values = (fn[0], fn[1])
    else:
        raise TypeError(f"{name} must be a mapping, sequence, or callable")
    if any(v not in (0, 1) for v in values):
        raise ValueError(f"{name} must produce bits, got {values}")
    return (int(values[0]), int(values[1]))


def deterministic_vertex(a_fn, b_fn) -> Behavior:
    """Local deterministic behavior with a = a_fn(x) and b = b_fn(y)."""
    af = _as_bit_table(a_fn, "a_fn")
    bf = _as_bit_table(b_fn, "b_fn")
    table = np.zeros((2, 2, 2, 2))
    for x, y in product((0, 1), repeat=2):
        table[af[x], bf[y], x, y] = 1.0
    return Behavior(table)


def pr_box(flip_x: bool = False, flip_y: bool = False, flip_output: bool = False) -> Behavior:
    """A PR box, optionally relabeled.

    The canonical box puts weight 1/2 on every (a, b) with
    a XOR b = x AND y. flip_x / flip_y relabel the inputs before the
    condition; flip_output relabels Alice's output. The 8 flag
    combinations give the 8 non-local vertices.
    """
    table = np.zeros((2, 2, 2, 2))
    for a, b, x, y in product((0, 1), repeat=4):
        if a ^ b ^ int(flip_output) == ((x ^ int(flip_x)) & (y ^ int(flip_y))):
            table[a, b, x, y] = 0.5
    return Behavior(table)


def all_deterministic_vertices() -> list[Behavior]:
    """The 16 local deterministic vertices, in response-table order."""
    tables = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return [deterministic_vertex(af, bf) for af in tables for bf in tables]


def all_pr_boxes() -> list[Behavior]:
    """The 8 PR relabelings, in flag order (flip_x, flip_y, flip_output)."""
    return [
        pr_box(bool(fx), bool(fy), bool(fo))
        for fx, fy, fo in product((0, 1), repeat=3)
    ]


def mix(behaviors: Sequence[Behavior], weights: Sequence[float]) -> Behavior:
    """Entrywise convex combination of behaviors."""
    if len(behaviors) != len(weights):
        raise InvalidMixtureError(
            f"{len(behaviors)} behaviors but {len(weights)} weights"
        )
    if len(behaviors) == 0:
        raise InvalidMixtureError("cannot mix zero behaviors")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0.0):
        raise InvalidMixtureError("weights must be nonnegative")
    if abs(float(w.sum()) - 1.0) > NORMALIZATION_TOL:
        raise InvalidMixtureError(f"weights sum to {w.sum()!r}, expected 1")
    table = np.zeros((2, 2, 2, 2))
    for behavior, weight in zip(behaviors, w):
        table += weight * behavior.probs
    return Behavior(np.clip(table, 0.0, 1.0))


def _side_tables(behavior: Behavior, side: str) -> tuple[np.ndarray, np.ndarray]:
    """The two candidate marginal tables, one per value of the far input."""
    if side == "alice":
        # p(a|x) summed over b, for y = 0 and y = 1
        return behavior.probs[:, :, :, 0].sum(axis=1), behavior.probs[:, :, :, 1].sum(axis=1)
    if side == "bob":
        return behavior.probs[:, :, 0, :].sum(axis=0), behavior.probs[:, :, 1, :].sum(axis=0)
    raise ValueError(f"side must be 'alice' or 'bob', got {side!r}")


def marginal(behavior: Behavior, side: str, tol: float = 1e-9) -> Marginal:
    """One party's output distribution p(o | i).

    Only defined for non-signaling behaviors: if the candidate tables
    computed from the two values of the far input differ by more than
    tol, raises SignalingBehaviorError.
    """
    first, second = _side_tables(behavior, side)
    if np.max(np.abs(first - second)) > tol:
        raise SignalingBehaviorError(
            f"{side} marginal depends on the far input beyond tol={tol}"
        )
    avg = (first + second) / 2.0  # [o, i]
    rows = tuple(tuple(float(avg[o, i]) for o in (0, 1)) for i in (0, 1))
    return Marginal(side, rows)


def is_nonsignaling(behavior: Behavior, tol: float) -> bool:
    """True when both marginals are independent of the far input within tol."""
    if tol < 0:
        raise RangeError("tol must be nonnegative")
    for side in ("alice", "bob"):
        first, second = _side_tables(behavior, side)
        if np.max(np.abs(first - second)) > tol:
            return False
    return True


def correlators(behavior: Behavior) -> tuple[float, float, float, float]:
    """E(x,y) = sum (-1)^(a+b) p(a,b|x,y), ordered (0,0),(0,1),(1,0),(1,1)."""
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])  # (-1)^(a+b)
    e = np.einsum("ab,abxy->xy", signs, behavior.probs)
    return (float(e[0, 0]), float(e[0, 1]), float(e[1, 0]), float(e[1, 1]))


def chsh_value(behavior: Behavior, facet_index: int) -> float:
    """CHSH combination for one of the 8 facets (see module docstring)."""
    if not 0 <= facet_index <= 7:
        raise RangeError(f"facet_index must be in 0..7, got {facet_index}")
    e = correlators(behavior)
    return float(sum(s * v for s, v in zip(FACET_SIGNS[facet_index], e)))


MAX_NEAR_VERTEX_EPSILON = math.sqrt(2.0) - 1.0


def near_vertex(vertex: Behavior, epsilon: float) -> Behavior:
    """Non-local behavior at distance epsilon from a facet vertex.

    Mixes the vertex with the PR box maximizing the same facet, giving
    chsh_value 2 + 2*epsilon there. Capping epsilon at sqrt(2) - 1 keeps
    the result inside the Tsirelson proxy bound of 2*sqrt(2).
    """
    if not 0.0 < epsilon <= MAX_NEAR_VERTEX_EPSILON:
        raise RangeError(
            f"epsilon must lie in (0, {MAX_NEAR_VERTEX_EPSILON:.6f}], got {epsilon}"
        )
    facet = None
    for i in range(8):
        if abs(chsh_value(vertex, i) - 2.0) <= 1e-9:
            facet = i
            break
    if facet is None:
        raise GeometryError("behavior does not lie on a CHSH facet")
    aligned = None
    for candidate in all_pr_boxes():
        if abs(chsh_value(candidate, facet) - 4.0) <= 1e-9:
            aligned = candidate
            break
    assert aligned is not None, "every facet is maximized by one PR relabeling"
    return mix([vertex, aligned], [1.0 - epsilon, epsilon])


def behavior_to_json(behavior: Behavior) -> str:
    """Flat JSON form with keys "a,b|x,y"."""
    entries = {
        f"{a},{b}|{x},{y}": behavior.prob(a, b, x, y)
        for a, b, x, y in product((0, 1), repeat=4)
    }
    return json.dumps(entries, sort_keys=True, indent=2)


def behavior_from_json(text: str) -> Behavior:
    """Parse the flat JSON form; Behavior validation rejects bad tables."""
    entries = json.loads(text)
    table = np.zeros((2, 2, 2, 2))
    for a, b, x, y in product((0, 1), repeat=4):
        key = f"{a},{b}|{x},{y}"
        if key not in entries:
            raise InvalidBehaviorError(f"missing entry {key}")
        table[a, b, x, y] = float(entries[key])
    return Behavior(table)
