"""Memory kernels: Alice's output distribution conditioned on history.

A kernel of depth k gives the probability that Alice outputs 0 as a
function of the window (x_n, ..., x_{n-k}) of her inputs and the window
(s_n, ..., s_{n-k}) of signal labels her box received; index 0 is the
current round, index j is j rounds ago. Memory in the relevant sense
means the value changes when only a past signal label changes.

Kernels are stored as a memoryless base table p(a=0 | x, s) plus sparse
window overrides. Cells without an override fall back to the
deterministic strategy output in the round engine, so the memoryless
part of a run stays exact; only overridden cells are coin flips.

`biased_kernel` plants the minimal memory: one current cell
(x, previous x, s) whose zero-probability swings to base - delta or
base + delta according to the two-class coarse label of the previous
signal. The symmetric swing keeps the round-averaged statistics at the
base value when the coarse label is equidistributed, so the planted
memory is invisible in single-round frequencies under random inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

from .boxworld import Strategy
from .errors import RangeError, StructureError
from .sigfun import Partition, label_under


@dataclass(frozen=True, eq=False)
class MemoryKernel:
    depth: int
    partition: Partition
    base: tuple[tuple[float, ...], ...]  # [x][s] -> p(a=0)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.depth < 1:
            raise RangeError("depth must be at least 1")
        labels = self.partition.num_classes
        if len(self.base) != 2 or any(len(row) != labels for row in self.base):
            raise StructureError("base table must be 2 x num_classes")
        for value in list(self.overrides.values()) + [
            v for row in self.base for v in row
        ]:
            if not 0.0 <= value <= 1.0:
                raise RangeError(f"kernel probabilities must lie in [0,1], got {value}")
        for x_window, s_window in self.overrides:
            self._check_window(x_window, s_window)

    def _check_window(self, x_window, s_window):
        if len(x_window) != self.depth + 1 or len(s_window) != self.depth + 1:
            raise StructureError(
                f"windows must have length depth+1 = {self.depth + 1}"
            )
        if any(x not in (0, 1) for x in x_window):
            raise StructureError("x window entries must be bits")
        if any(not 0 <= s < self.partition.num_classes for s in s_window):
            raise StructureError("signal window entries must be partition labels")

    def prob_zero(self, x_window, s_window) -> float:
        """P(a = 0) for a full history window (current round first)."""
        x_window = tuple(x_window)
        s_window = tuple(s_window)
        self._check_window(x_window, s_window)
        key = (x_window, s_window)
        if key in self.overrides:
            return self.overrides[key]
        return self.base[x_window[0]][s_window[0]]

    def is_overridden(self, x_window, s_window) -> bool:
        return (tuple(x_window), tuple(s_window)) in self.overrides


def memoryless_kernel(strategy: Strategy, depth: int = 1) -> MemoryKernel:
    """Kernel matching the strategy's own statistics, with no history
    dependence: each entry is the hidden-alphabet average of Alice
    outputting 0 at (x, s)."""
    card = strategy.lambda_card
    base = tuple(
        tuple(
            sum(
                1 for lam in range(card) if strategy.alice_output(x, s, lam) == 0
            )
            / card
            for s in range(strategy.partition.num_classes)
        )
        for x in (0, 1)
    )
    return MemoryKernel(depth, strategy.partition, base, {})


def biased_kernel(
    strategy: Strategy,
    cell: tuple[int, int, int],
    coarse: Partition,
    delta: float,
    base: float | None = None,
) -> MemoryKernel:
    """Depth-1 kernel with a planted two-sided memory bias.

    cell = (x_now, x_prev, s_now) selects the current window; for every
    previous signal label, the zero-probability there becomes
    p0 - delta when the label's coarse class is 0 and p0 + delta when it
    is 1. p0 defaults to the strategy's own memoryless value at
    (x_now, s_now); pass base to plant an arbitrary rate pair, e.g.
    (0.4, 0.5) via base=0.45, delta=0.05.
    """
    x_now, x_prev, s_now = cell
    kernel = memoryless_kernel(strategy)
    if x_now not in (0, 1) or x_prev not in (0, 1):
        raise StructureError("cell inputs must be bits")
    if not 0 <= s_now < strategy.partition.num_classes:
        raise StructureError(f"no signal label {s_now} in {strategy.partition.string}")
    if coarse.num_classes != 2 or not strategy.partition.refines(coarse):
        raise StructureError(
            f"{coarse.string} is not a two-class coarse-graining of "
            f"{strategy.partition.string}"
        )
    if delta <= 0:
        raise RangeError("delta must be positive")
    p0 = kernel.base[x_now][s_now] if base is None else float(base)
    if p0 - delta < 0.0 or p0 + delta > 1.0:
        raise RangeError(
            f"bias pair ({p0 - delta}, {p0 + delta}) leaves the probability range"
        )
    overrides = {}
    for s_prev in range(strategy.partition.num_classes):
        side = label_under(coarse, strategy.partition, s_prev)
        value = p0 - delta if side == 0 else p0 + delta
        overrides[((x_now, x_prev), (s_now, s_prev))] = value
    return MemoryKernel(1, strategy.partition, kernel.base, overrides)


def has_memory_dependence(kernel: MemoryKernel, tol: float) -> bool:
    """True when two windows differing in a single past signal label
    have zero-probabilities more than tol apart."""
    if tol < 0:
        raise RangeError("tol must be nonnegative")
    labels = range(kernel.partition.num_classes)
    width = kernel.depth + 1
    for x_window in product((0, 1), repeat=width):
        for s_window in product(labels, repeat=width):
            value = kernel.prob_zero(x_window, s_window)
            for j in range(1, width):
                for alt in labels:
                    if alt == s_window[j]:
                        continue
                    other = s_window[:j] + (alt,) + s_window[j + 1:]
                    if abs(value - kernel.prob_zero(x_window, other)) > tol:
                        return True
    return False


def kernel_to_json(kernel: MemoryKernel) -> str:
    doc = {
        "depth": kernel.depth,
        "partition": kernel.partition.string,
        "base": {
            f"{x},{s}": kernel.base[x][s]
            for x in (0, 1)
            for s in range(kernel.partition.num_classes)
        },
        "overrides": [
            {"x": list(xw), "s": list(sw), "p": p}
            for (xw, sw), p in sorted(kernel.overrides.items())
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def kernel_from_json(text: str) -> MemoryKernel:
    doc = json.loads(text)
    partition = Partition.parse(doc["partition"])
    base = tuple(
        tuple(float(doc["base"][f"{x},{s}"]) for s in range(partition.num_classes))
        for x in (0, 1)
    )
    overrides = {
        (tuple(entry["x"]), tuple(entry["s"])): float(entry["p"])
        for entry in doc["overrides"]
    }
    return MemoryKernel(int(doc["depth"]), partition, base, overrides)
