"""Round engine: wires inputs, the shared hidden symbol, Bob's box, the
hidden channel, and Alice's (possibly memoryful) box into transcripts.

Per round n: draw lambda uniformly, read the inputs x_n and y_n, set
b_n = bob(y_n, lambda_n), send the signal s_n = partition(y_n, b_n),
and produce a_n. Without a kernel, a_n = alice(x_n, s_n, lambda_n).
With a kernel, rounds whose history window carries an override draw
a_n as a coin flip with the override probability; every other round
(including the first k rounds, which have no full window) keeps the
deterministic strategy output, so the memoryless part of the run is
bit-exact.

Randomness is reproducible: a run seed derives four fixed sub-streams
(hidden symbol, Alice inputs, Bob inputs, kernel coins), so swapping
one input source for a scripted one does not shift the others. Since
outputs never feed back into inputs, the whole run is computed on
arrays; transcripts store columns and expose row views.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from .behavior import Behavior
from .boxworld import Strategy
from .errors import InsufficientDataError, RangeError, StructureError
from .memory import MemoryKernel
from .sigfun import Partition

_LAMBDA_STREAM, _ALICE_STREAM, _BOB_STREAM, _COIN_STREAM = 0, 1, 2, 3


def _stream(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


@dataclass(frozen=True)
class RandomBits:
    """I.i.d. unbiased input bits; seed=None derives from the run seed."""

    seed: int | None = None


@dataclass(frozen=True)
class Scripted:
    """A fixed input sequence; must cover the whole run."""

    bits: tuple[int, ...]


@dataclass(frozen=True)
class AlternatingPair:
    """odd on rounds 1, 3, ... and even on rounds 0, 2, ... (0-indexed)."""

    odd: int
    even: int


InputSource = Union[RandomBits, Scripted, AlternatingPair]


def _input_bits(source: InputSource, rounds: int, seed: int, key: int) -> np.ndarray:
    if isinstance(source, RandomBits):
        rng = (
            np.random.default_rng(source.seed)
            if source.seed is not None
            else _stream(seed, key)
        )
        return rng.integers(0, 2, size=rounds, dtype=np.int8)
    if isinstance(source, Scripted):
        if len(source.bits) < rounds:
            raise RangeError(
                f"scripted source has {len(source.bits)} bits, run needs {rounds}"
            )
        bits = np.asarray(source.bits[:rounds], dtype=np.int8)
        if np.any((bits != 0) & (bits != 1)):
            raise RangeError("scripted bits must be 0 or 1")
        return bits
    if isinstance(source, AlternatingPair):
        if source.odd not in (0, 1) or source.even not in (0, 1):
            raise RangeError("alternating values must be bits")
        bits = np.full(rounds, source.even, dtype=np.int8)
        bits[1::2] = source.odd
        return bits
    raise TypeError(f"unknown input source {source!r}")


@dataclass(frozen=True)
class RoundRecord:
    n: int
    x: int
    y: int
    a: int
    b: int
    lam: int
    signal: int


class _RoundsView(Sequence):
    def __init__(self, transcript: "Transcript"):
        self._t = transcript

    def __len__(self) -> int:
        return len(self._t)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return self._t.round(i)


class Transcript:
    """Columnar record of one run; rows are exposed as RoundRecords."""

    def __init__(self, partition: Partition, seed: int, strategy: str, columns):
        self.partition = partition
        self.seed = seed
        self.strategy = strategy
        x, y, a, b, lam, signal = (np.asarray(c, dtype=np.int8) for c in columns)
        if not (len(x) == len(y) == len(a) == len(b) == len(lam) == len(signal)):
            raise StructureError("transcript columns must have equal length")
        self.x, self.y, self.a, self.b, self.lam, self.signal = x, y, a, b, lam, signal

    def __len__(self) -> int:
        return len(self.x)

    def round(self, i: int) -> RoundRecord:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        i = i % len(self)
        return RoundRecord(
            i,
            int(self.x[i]),
            int(self.y[i]),
            int(self.a[i]),
            int(self.b[i]),
            int(self.lam[i]),
            int(self.signal[i]),
        )

    @property
    def rounds(self) -> Sequence:
        return _RoundsView(self)


def run(
    strategy: Strategy,
    kernel: MemoryKernel | None,
    alice: InputSource,
    bob: InputSource,
    rounds: int,
    seed: int,
) -> Transcript:
    """Simulate one run; fully determined by the arguments."""
    if rounds < 1:
        raise RangeError("rounds must be at least 1")
    if kernel is not None and kernel.partition != strategy.partition:
        raise StructureError(
            f"kernel partition {kernel.partition.string} does not match "
            f"strategy partition {strategy.partition.string}"
        )
    card = strategy.lambda_card
    lam = _stream(seed, _LAMBDA_STREAM).integers(0, card, size=rounds, dtype=np.int8)
    x = _input_bits(alice, rounds, seed, _ALICE_STREAM)
    y = _input_bits(bob, rounds, seed, _BOB_STREAM)

    bob_arr = np.array(strategy.bob, dtype=np.int8)
    part_arr = np.array(
        [[strategy.partition.apply(yy, bb) for bb in (0, 1)] for yy in (0, 1)],
        dtype=np.int8,
    )
    alice_arr = np.array(strategy.alice, dtype=np.int8)

    b = bob_arr[y, lam]
    signal = part_arr[y, b]
    a = alice_arr[x, signal, lam]

    if kernel is not None and kernel.overrides:
        coins = _stream(seed, _COIN_STREAM).random(rounds)
        depth = kernel.depth
        if rounds > depth:
            idx = np.arange(depth, rounds)
            for (xw, sw), prob in kernel.overrides.items():
                mask = np.ones(len(idx), dtype=bool)
                for j in range(depth + 1):
                    mask &= x[idx - j] == xw[j]
                    mask &= signal[idx - j] == sw[j]
                hit = idx[mask]
                a[hit] = np.where(coins[hit] < prob, 0, 1).astype(np.int8)
    return Transcript(
        strategy.partition, seed, strategy.label, (x, y, a, b, lam, signal)
    )


def empirical_behavior(transcript: Transcript) -> Behavior:
    """Conditional relative frequencies observed in a transcript.

    Every input pair must occur at least once; otherwise the table has
    an undefined column and InsufficientDataError is raised.
    """
    t = transcript
    cell = ((t.a.astype(np.int64) * 2 + t.b) * 2 + t.x) * 2 + t.y
    counts = np.bincount(cell, minlength=16).reshape(2, 2, 2, 2).astype(np.float64)
    totals = counts.sum(axis=(0, 1))
    if np.any(totals == 0):
        missing = [(xx, yy) for xx in (0, 1) for yy in (0, 1) if totals[xx, yy] == 0]
        raise InsufficientDataError(f"input pairs never observed: {missing}")
    return Behavior(counts / totals)


_HEADER_FORMAT = "boxsim-transcript"


def transcript_to_jsonl(transcript: Transcript) -> str:
    """JSON Lines form: a header line, then one record per round."""
    header = {
        "format": _HEADER_FORMAT,
        "partition": transcript.partition.string,
        "rounds": len(transcript),
        "seed": transcript.seed,
        "strategy": transcript.strategy,
    }
    lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
    for i in range(len(transcript)):
        record = {
            "n": i,
            "x": int(transcript.x[i]),
            "y": int(transcript.y[i]),
            "a": int(transcript.a[i]),
            "b": int(transcript.b[i]),
            "lambda": int(transcript.lam[i]),
            "signal": int(transcript.signal[i]),
        }
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def transcript_from_jsonl(text: str) -> Transcript:
    lines = text.strip().splitlines()
    if not lines:
        raise StructureError("empty transcript file")
    header = json.loads(lines[0])
    if header.get("format") != _HEADER_FORMAT:
        raise StructureError("not a transcript file")
    rows = [json.loads(line) for line in lines[1:]]
    if len(rows) != header["rounds"]:
        raise StructureError(
            f"header says {header['rounds']} rounds, file has {len(rows)}"
        )
    columns = tuple(
        [row[k] for row in rows] for k in ("x", "y", "a", "b", "lambda", "signal")
    )
    return Transcript(
        Partition.parse(header["partition"]),
        int(header["seed"]),
        str(header["strategy"]),
        columns,
    )
