"""Deterministic memoryless box strategies with a hidden one-way signal.

A strategy fixes, per round: a shared hidden symbol lambda drawn
uniformly from {0..L-1}, Bob's deterministic response b = bob(y, lambda),
a hidden signal s = partition(y, b) carried from Bob's box to Alice's,
and Alice's deterministic response a = alice(x, s, lambda).

Three named constructions reproduce the canonical PR box exactly:

* input signaling: the channel carries y; b = y + lambda,
  a = x*y + y + lambda (mod 2).
* output signaling: the channel carries b; b = y + lambda,
  a = x*(b + lambda) + b.
* XOR signaling: the channel carries y + b; b = lambda,
  a = x*(lambda + s) + lambda.

`feasibility_search` answers the converse question: given a target
behavior, a signal partition, and a hidden-alphabet size, does any
deterministic strategy reproduce the target exactly? The search is
exhaustive over Bob's tables with constraint propagation on Alice's
cells, so an empty answer is a proof of impossibility for that space.
All table probabilities are multiples of 1/L, so matching is done in
exact integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .behavior import Behavior
from .errors import RangeError, StructureError
from .sigfun import (
    INPUT_PARTITION,
    OUTPUT_PARTITION,
    XOR_PARTITION,
    Partition,
)

MAX_SEARCH_LAMBDA = 4


@dataclass(frozen=True)
class Strategy:
    """Deterministic response tables over a uniform hidden alphabet.

    bob[y][lam] is Bob's output; alice[x][s][lam] is Alice's output for
    signal label s. The signal axis must match the partition's classes.
    """

    lambda_card: int
    partition: Partition
    bob: tuple[tuple[int, ...], ...]
    alice: tuple[tuple[tuple[int, ...], ...], ...]
    label: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.lambda_card < 1:
            raise RangeError("lambda_card must be at least 1")
        if len(self.bob) != 2 or any(len(row) != self.lambda_card for row in self.bob):
            raise StructureError("bob table must be 2 x lambda_card")
        labels = self.partition.num_classes
        if len(self.alice) != 2 or any(len(block) != labels for block in self.alice):
            raise StructureError("alice table must be 2 x num_classes x lambda_card")
        for block in self.alice:
            for row in block:
                if len(row) != self.lambda_card:
                    raise StructureError("alice table must be 2 x num_classes x lambda_card")
        values = [v for row in self.bob for v in row]
        values += [v for block in self.alice for row in block for v in row]
        if any(v not in (0, 1) for v in values):
            raise StructureError("response tables must contain bits")

    def bob_output(self, y: int, lam: int) -> int:
        return self.bob[y][lam]

    def alice_output(self, x: int, signal: int, lam: int) -> int:
        return self.alice[x][signal][lam]


def _strategy_from_rules(lambda_card, partition, bob_rule, alice_rule, label):
    bob = tuple(
        tuple(bob_rule(y, lam) for lam in range(lambda_card)) for y in (0, 1)
    )
    alice = tuple(
        tuple(
            tuple(alice_rule(x, s, lam) for lam in range(lambda_card))
            for s in range(partition.num_classes)
        )
        for x in (0, 1)
    )
    return Strategy(lambda_card, partition, bob, alice, label)


def input_signaling_strategy() -> Strategy:
    """PR box from hidden signaling of Bob's input."""
    return _strategy_from_rules(
        2,
        INPUT_PARTITION,
        lambda y, lam: y ^ lam,
        lambda x, s, lam: (x & s) ^ s ^ lam,
        "input-signaling",
    )


def output_signaling_strategy() -> Strategy:
    """PR box from hidden signaling of Bob's output."""
    return _strategy_from_rules(
        2,
        OUTPUT_PARTITION,
        lambda y, lam: y ^ lam,
        lambda x, s, lam: (x & (s ^ lam)) ^ s,
        "output-signaling",
    )


def xor_signaling_strategy() -> Strategy:
    """PR box from hidden signaling of y XOR b."""
    return _strategy_from_rules(
        2,
        XOR_PARTITION,
        lambda y, lam: lam,
        lambda x, s, lam: (x & (lam ^ s)) ^ lam,
        "xor-signaling",
    )


def induced_counts(strategy: Strategy) -> np.ndarray:
    """Integer outcome counts over the hidden alphabet, indexed [a,b,x,y].

    induced probability = count / lambda_card, exactly.
    """
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for x, y, lam in product((0, 1), (0, 1), range(strategy.lambda_card)):
        b = strategy.bob_output(y, lam)
        s = strategy.partition.apply(y, b)
        a = strategy.alice_output(x, s, lam)
        counts[a, b, x, y] += 1
    return counts


def induced_behavior(strategy: Strategy) -> Behavior:
    """The round-to-round behavior the strategy produces."""
    return Behavior(induced_counts(strategy) / strategy.lambda_card)


def _target_counts(target: Behavior, lambda_card: int) -> np.ndarray | None:
    """Exact integer counts a strategy would need, or None when some
    target entry is not a multiple of 1/lambda_card."""
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for a, b, x, y in product((0, 1), repeat=4):
        c = Fraction(target.prob(a, b, x, y)) * lambda_card
        if c.denominator != 1:
            return None
        counts[a, b, x, y] = int(c)
    return counts


def reproduces_exactly(strategy: Strategy, target: Behavior) -> bool:
    """Exact (rational) equality of the induced behavior and the target."""
    needed = _target_counts(target, strategy.lambda_card)
    if needed is None:
        return False
    return bool(np.array_equal(induced_counts(strategy), needed))


def _solve_alice_side(x, bob, partition, needed, lambda_card):
    """First consistent alice table for one value of x, or None.

    Cells (s, lam) are filled in fixed order by depth-first search,
    bounding the running per-(y, b, a) counts by the exact targets; the
    bounds force equality on completion because they sum to the number
    of hits per (y, b).
    """
    hits: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for y in (0, 1):
        for lam in range(lambda_card):
            b = bob[y][lam]
            s = partition.apply(y, b)
            hits.setdefault((s, lam), []).append((y, b))
    cells = sorted(hits)
    counts = np.zeros((2, 2, 2), dtype=np.int64)  # [y, b, a]
    assignment: dict[tuple[int, int], int] = {}

    def fill(i: int) -> bool:
        if i == len(cells):
            return True
        cell = cells[i]
        for a in (0, 1):
            ok = all(
                counts[y, b, a] < needed[a, b, x, y] for (y, b) in hits[cell]
            )
            if not ok:
                continue
            for (y, b) in hits[cell]:
                counts[y, b, a] += 1
            assignment[cell] = a
            if fill(i + 1):
                return True
            del assignment[cell]
            for (y, b) in hits[cell]:
                counts[y, b, a] -= 1
        return False

    if not fill(0):
        return None
    return tuple(
        tuple(assignment.get((s, lam), 0) for lam in range(lambda_card))
        for s in range(partition.num_classes)
    )


def feasibility_search(
    target: Behavior, partition: Partition, lambda_card: int
) -> Strategy | None:
    """Exhaustive search for a strategy reproducing the target exactly.

    Enumerates Bob's tables (2^(2L) of them) in ascending code order;
    for each, Alice's table exists iff a per-x constraint system has a
    solution, found by the pruned search above. Returns the first
    witness, so the result is deterministic; None is a completeness
    statement for the whole (bob, alice) space at this alphabet size.
    """
    if not 1 <= lambda_card <= MAX_SEARCH_LAMBDA:
        raise RangeError(
            f"lambda_card must be in 1..{MAX_SEARCH_LAMBDA}, got {lambda_card}"
        )
    needed = _target_counts(target, lambda_card)
    if needed is None:
        return None
    # Bob's per-input output counts are fixed by the target marginal and
    # must not depend on x.
    bob_needed = needed.sum(axis=0)  # [b, x, y]
    if not np.array_equal(bob_needed[:, 0, :], bob_needed[:, 1, :]):
        return None
    bob_needed = bob_needed[:, 0, :]  # [b, y]

    n_cells = 2 * lambda_card
    for code in range(2 ** n_cells):
        bits = [(code >> i) & 1 for i in range(n_cells)]
        bob = tuple(
            tuple(bits[y * lambda_card + lam] for lam in range(lambda_card))
            for y in (0, 1)
        )
        if any(
            sum(1 for lam in range(lambda_card) if bob[y][lam] == b)
            != bob_needed[b, y]
            for y in (0, 1)
            for b in (0, 1)
        ):
            continue
        alice_sides = []
        for x in (0, 1):
            side = _solve_alice_side(x, bob, partition, needed, lambda_card)
            if side is None:
                break
            alice_sides.append(side)
        if len(alice_sides) == 2:
            return Strategy(
                lambda_card,
                partition,
                bob,
                tuple(alice_sides),
                f"search:{partition.string}:l{lambda_card}",
            )
    return None


def strategy_to_json(strategy: Strategy) -> str:
    doc = {
        "lambda_card": strategy.lambda_card,
        "partition": strategy.partition.string,
        "label": strategy.label,
        "bob": {
            f"{y},{lam}": strategy.bob_output(y, lam)
            for y in (0, 1)
            for lam in range(strategy.lambda_card)
        },
        "alice": {
            f"{x},{s},{lam}": strategy.alice_output(x, s, lam)
            for x in (0, 1)
            for s in range(strategy.partition.num_classes)
            for lam in range(strategy.lambda_card)
        },
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def strategy_from_json(text: str) -> Strategy:
    doc = json.loads(text)
    lam_card = int(doc["lambda_card"])
    partition = Partition.parse(doc["partition"])
    bob = tuple(
        tuple(int(doc["bob"][f"{y},{lam}"]) for lam in range(lam_card))
        for y in (0, 1)
    )
    alice = tuple(
        tuple(
            tuple(int(doc["alice"][f"{x},{s},{lam}"]) for lam in range(lam_card))
            for s in range(partition.num_classes)
        )
        for x in (0, 1)
    )
    return Strategy(lam_card, partition, bob, alice, str(doc.get("label", "custom")))


NAMED_STRATEGIES = {
    "input-signaling": input_signaling_strategy,
    "output-signaling": output_signaling_strategy,
    "xor-signaling": xor_signaling_strategy,
}
