"""Learning and signalization stages built on top of the round engine.

Learning: with random inputs on both sides, consecutive round pairs
populate the 64-cell table G[(y', b')](x, x', y, b) of empirical
probabilities that Alice outputs 0 given the current round (x, y, b)
and the previous round (x', y', b'). Without memory, every cell equals
p(a=0 | x, y, b), so cells that differ only in the previous pair
(y', b') estimate the same number; a separation certified by Hoeffding
bands is evidence of memory and reveals the two-class grouping of
{0,1}^2 the memory responds to.

Signalization: over 2N rounds, Alice fixes her inputs to x_now on odd
rounds and x_prev on even rounds; Bob enters y_odd on odd rounds and
the message bit on even rounds. Alice's odd-round outputs are then N
tosses of a coin whose zero-rate is alpha (message 0) or beta
(message 1). The block length

    N > k^2 * (sqrt(alpha(1-alpha)) + sqrt(beta(1-beta)))^2 / (beta-alpha)^2

is the smallest integer separating the two binomials by k standard
deviations on each side; the decision threshold is the midpoint of the
gap. Decoding confidence is reported from exact binomial tails (the
normal approximation is included for comparison only). One decoded bit
in 2N rounds beats light once d/c > 2*N*tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.stats import binom, norm

from .behavior import Behavior, Marginal, marginal
from .boxworld import Strategy
from .errors import (
    ConfigurationError,
    DegenerateBiasError,
    FineTunedBehaviorError,
    InsufficientDataError,
    RangeError,
    StructureError,
)
from .harness import AlternatingPair, MemoryKernel, RandomBits, Transcript, run
from .memory import biased_kernel
from .sigfun import Partition, label_under

_MESSAGE_STREAM, _TRIAL_STREAM = 101, 102

LIGHT_SPEED = 299792458.0


def hoeffding_band(count: int, delta: float) -> float:
    """Two-sided Hoeffding deviation bound sqrt(ln(2/delta) / (2 n))."""
    if not 0 < delta < 1:
        raise RangeError("delta must lie in (0, 1)")
    if count <= 0:
        return math.inf
    return math.sqrt(math.log(2.0 / delta) / (2.0 * count))


# ---------------------------------------------------------------------------
# G table estimation


def encode_cell(x: int, x_prev: int, y: int, b: int, y_prev: int, b_prev: int) -> int:
    """Flat index of a G cell; bit order (x, x', y, b, y', b')."""
    return (((((x * 2 + x_prev) * 2 + y) * 2 + b) * 2 + y_prev) * 2) + b_prev


def decode_cell(index: int) -> tuple[int, int, int, int, int, int]:
    bits = [(index >> shift) & 1 for shift in range(5, -1, -1)]
    return tuple(bits)


@dataclass(frozen=True)
class GEstimate:
    """Counts and zero-counts for the 64 history cells."""

    counts: np.ndarray
    zeros: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        zeros = np.asarray(self.zeros, dtype=np.int64)
        if counts.shape != (64,) or zeros.shape != (64,):
            raise StructureError("GEstimate needs 64 cells")
        if np.any(zeros > counts) or np.any(counts < 0) or np.any(zeros < 0):
            raise StructureError("zero-counts must lie within cell counts")
        counts.setflags(write=False)
        zeros.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "zeros", zeros)

    def frequency(self, index: int) -> float | None:
        """Empirical p(a=0) for a cell, or None when never observed."""
        n = int(self.counts[index])
        if n == 0:
            return None
        return float(self.zeros[index]) / n

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_cells(cls, cells: dict) -> "GEstimate":
        """Build from {(x, x', y, b, y', b'): (count, zeros)}; test helper
        and CSV reader."""
        counts = np.zeros(64, dtype=np.int64)
        zeros = np.zeros(64, dtype=np.int64)
        for key, (n, z) in cells.items():
            counts[encode_cell(*key)] = n
            zeros[encode_cell(*key)] = z
        return cls(counts, zeros)


def sample_G(transcript: Transcript) -> GEstimate:
    """Accumulate the 64-cell table from consecutive round pairs."""
    t = transcript
    if len(t) < 2:
        return GEstimate(np.zeros(64, dtype=np.int64), np.zeros(64, dtype=np.int64))
    now = slice(1, None)
    prev = slice(None, -1)
    idx = (
        ((((t.x[now].astype(np.int64) * 2 + t.x[prev]) * 2 + t.y[now]) * 2 + t.b[now]) * 2
         + t.y[prev]) * 2
        + t.b[prev]
    )
    counts = np.bincount(idx, minlength=64)
    zeros = np.bincount(idx, weights=(t.a[now] == 0).astype(np.float64), minlength=64)
    return GEstimate(counts, zeros.astype(np.int64))


def memoryless_reference(strategy: Strategy) -> np.ndarray:
    """p(a=0 | x, y, b) of a strategy, indexed [x, y, b]; NaN where
    (y, b) is unreachable."""
    table = np.full((2, 2, 2), np.nan)
    for x, y, b in product((0, 1), repeat=3):
        lams = [
            lam for lam in range(strategy.lambda_card)
            if strategy.bob_output(y, lam) == b
        ]
        if not lams:
            continue
        s = strategy.partition.apply(y, b)
        hits = sum(1 for lam in lams if strategy.alice_output(x, s, lam) == 0)
        table[x, y, b] = hits / len(lams)
    return table


@dataclass(frozen=True)
class MemoryDetection:
    """Outcome of the learning stage: the coarse grouping the memory
    induces on the previous pair, plus the best configuration cell."""

    coarse: Partition
    x_now: int
    x_prev: int
    y_now: int
    b_now: int
    alpha_hat: float
    beta_hat: float
    gap: float


def detect_memory(estimate: GEstimate, confidence: float) -> MemoryDetection | None:
    """Search for history cells separated beyond statistical doubt.

    Cells differing only in the previous pair (y', b') are compared with
    two-proportion Hoeffding bands; the per-cell budget is
    (1 - confidence) / 64, so by a union bound the chance of any false
    separation on memoryless data is at most 1 - confidence. Returns
    None when nothing separates; raises InsufficientDataError when no
    comparison has data on both sides.
    """
    if not 0.0 < confidence < 1.0:
        raise RangeError("confidence must lie in (0, 1)")
    delta_cell = (1.0 - confidence) / 64.0
    comparable = 0
    best = None  # (gap, base, lo_cell, hi_cell)
    for x, xp, y, b in product((0, 1), repeat=4):
        pairs = list(product((0, 1), repeat=2))
        for i in range(4):
            for j in range(i + 1, 4):
                c1 = encode_cell(x, xp, y, b, *pairs[i])
                c2 = encode_cell(x, xp, y, b, *pairs[j])
                f1, f2 = estimate.frequency(c1), estimate.frequency(c2)
                if f1 is None or f2 is None:
                    continue
                comparable += 1
                band = hoeffding_band(int(estimate.counts[c1]), delta_cell)
                band += hoeffding_band(int(estimate.counts[c2]), delta_cell)
                gap = abs(f1 - f2)
                if gap <= band:
                    continue
                if best is None or gap > best[0]:
                    lo, hi = (c1, c2) if f1 <= f2 else (c2, c1)
                    best = (gap, (x, xp, y, b), lo, hi)
    if comparable == 0:
        raise InsufficientDataError("no history cell pair has samples on both sides")
    if best is None:
        return None

    gap, (x, xp, y, b), lo_cell, hi_cell = best
    f_lo = estimate.frequency(lo_cell)
    f_hi = estimate.frequency(hi_cell)
    # Group the four previous pairs by proximity to the separated pair's
    # two levels; ties and unobserved cells go low.
    labels = []
    for yp, bp in product((0, 1), repeat=2):
        f = estimate.frequency(encode_cell(x, xp, y, b, yp, bp))
        if f is None:
            labels.append(0)
        else:
            labels.append(0 if abs(f - f_lo) <= abs(f - f_hi) else 1)
    coarse = Partition.from_labels(labels)

    sums = [0.0, 0.0]
    counts = [0, 0]
    for (yp, bp), side in zip(product((0, 1), repeat=2), labels):
        cell = encode_cell(x, xp, y, b, yp, bp)
        side = coarse.apply(yp, bp)
        sums[side] += float(estimate.zeros[cell])
        counts[side] += int(estimate.counts[cell])
    alpha_hat = sums[0] / counts[0] if counts[0] else float("nan")
    beta_hat = sums[1] / counts[1] if counts[1] else float("nan")
    return MemoryDetection(coarse, x, xp, y, b, alpha_hat, beta_hat, gap)


# ---------------------------------------------------------------------------
# Block length and decision threshold


def choose_N(alpha: float, beta: float, k: float) -> int:
    """Smallest block length separating the two binomials by k sigma.

    The strict inequality is decided in exact rational arithmetic: with
    va = alpha(1-alpha) and vb = beta(1-beta), the condition
    N (beta-alpha)^2 / k^2 > va + vb + 2 sqrt(va vb) is squared into
    integer comparisons, so boundary cases (where the bound is a whole
    number) round the right way.
    """
    for name, value in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < value < 1.0:
            raise RangeError(f"{name} must lie strictly in (0, 1), got {value}")
    if alpha == beta:
        raise DegenerateBiasError("alpha and beta must differ")
    if k <= 0:
        raise RangeError("k must be positive")
    a, b, kf = Fraction(alpha), Fraction(beta), Fraction(k)
    va, vb = a * (1 - a), b * (1 - b)
    q = (b - a) ** 2 / kf ** 2
    s = va + vb
    p4 = 4 * va * vb

    def separated(n: int) -> bool:
        lhs = n * q - s
        return lhs > 0 and lhs * lhs > p4

    estimate = (
        float(k) ** 2
        * (math.sqrt(float(va)) + math.sqrt(float(vb))) ** 2
        / float(b - a) ** 2
    )
    n = max(1, math.floor(estimate) - 2)
    while not separated(n):
        n += 1
    return n


def decision_interval(alpha: float, beta: float, k: float, n: int) -> tuple[float, float]:
    """[low mean + k sigma, high mean - k sigma] for N trials; raises
    ConfigurationError when the interval is empty (N too small)."""
    lo_rate, hi_rate = sorted((alpha, beta))
    lower = n * lo_rate + k * math.sqrt(n * lo_rate * (1.0 - lo_rate))
    upper = n * hi_rate - k * math.sqrt(n * hi_rate * (1.0 - hi_rate))
    if not lower < upper:
        raise ConfigurationError(
            f"decision interval empty at N={n}: [{lower:.3f}, {upper:.3f}]"
        )
    return lower, upper


@dataclass(frozen=True)
class SignalingConfig:
    """Everything both parties agree on before the signaling stage."""

    x_now: int
    x_prev: int
    y_odd: int
    alpha: float
    beta: float
    k: float
    N: int
    threshold: float

    def __post_init__(self):
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 <= value <= 1.0:
                raise RangeError(f"{name} must lie in [0, 1]")
        if self.alpha == self.beta:
            raise DegenerateBiasError("alpha and beta must differ")
        if self.k < 0:
            raise RangeError("k must be nonnegative")
        if self.N < 1:
            raise RangeError("N must be at least 1")
        lo = self.N * min(self.alpha, self.beta)
        hi = self.N * max(self.alpha, self.beta)
        if not lo < self.threshold < hi:
            raise ConfigurationError(
                f"threshold {self.threshold} outside ({lo}, {hi})"
            )


def decision_threshold(cfg: SignalingConfig) -> float:
    """Midpoint of the k-sigma gap between the two binomials."""
    lower, upper = decision_interval(cfg.alpha, cfg.beta, cfg.k, cfg.N)
    return (lower + upper) / 2.0


def make_config(
    x_now: int, x_prev: int, y_odd: int, alpha: float, beta: float, k: float
) -> SignalingConfig:
    """Pick N via choose_N and the threshold via the interval midpoint."""
    n = choose_N(alpha, beta, k)
    lower, upper = decision_interval(alpha, beta, k, n)
    return SignalingConfig(
        x_now, x_prev, y_odd, alpha, beta, k, n, (lower + upper) / 2.0
    )


# ---------------------------------------------------------------------------
# Encode / decode


def steering_kernel(
    strategy: Strategy, cfg: SignalingConfig, coarse: Partition
) -> MemoryKernel:
    """Kernel realizing zero-rate cfg.alpha for coarse class 0 and
    cfg.beta for class 1 at the configured cell.

    The odd-round signal must be pinned by cfg.y_odd alone (true for
    input-class partitions); otherwise the current cell is ill-defined
    and StructureError is raised.
    """
    reachable = {
        strategy.partition.apply(cfg.y_odd, strategy.bob_output(cfg.y_odd, lam))
        for lam in range(strategy.lambda_card)
    }
    if len(reachable) != 1:
        raise StructureError(
            "odd-round signal is not determined by y_odd; "
            "steer through a near-vertex behavior instead"
        )
    s_now = reachable.pop()
    base = (cfg.alpha + cfg.beta) / 2.0
    delta = abs(cfg.beta - cfg.alpha) / 2.0
    kernel = biased_kernel(
        strategy, (cfg.x_now, cfg.x_prev, s_now), coarse, delta, base=base
    )
    if cfg.alpha <= cfg.beta:
        return kernel
    # biased_kernel puts the low rate on class 0; flip for the other
    # orientation.
    flipped = {
        key: base + (base - value) for key, value in kernel.overrides.items()
    }
    return MemoryKernel(1, kernel.partition, kernel.base, flipped)


def encode_run(
    strategy: Strategy,
    kernel: MemoryKernel | None,
    cfg: SignalingConfig,
    message_bit: int,
    seed: int,
) -> Transcript:
    """2N rounds of the signaling stage carrying one message bit."""
    if message_bit not in (0, 1):
        raise RangeError("message_bit must be 0 or 1")
    if kernel is not None and kernel.depth != 1:
        raise StructureError("signaling is wired for depth-1 kernels only")
    return run(
        strategy,
        kernel,
        alice=AlternatingPair(odd=cfg.x_now, even=cfg.x_prev),
        bob=AlternatingPair(odd=cfg.y_odd, even=message_bit),
        rounds=2 * cfg.N,
        seed=seed,
    )


@dataclass(frozen=True)
class DecodeResult:
    bit: int
    zeros: int
    threshold: float
    confidence: float
    confidence_normal: float


def decode_count(zeros: int, cfg: SignalingConfig) -> DecodeResult:
    """Decide the message from the odd-round zero count.

    The count is compared with the threshold; a count exactly on an
    integer threshold goes to the alpha side. Confidence is one minus
    the exact binomial tail of the rejected coin on the decoded side;
    the normal-approximation value is carried along for comparison.
    """
    thr = cfg.threshold
    lo_rate, hi_rate = sorted((cfg.alpha, cfg.beta))
    alpha_is_low = cfg.alpha <= cfg.beta
    if zeros < thr:
        side_rate = lo_rate
    elif zeros > thr:
        side_rate = hi_rate
    else:
        side_rate = cfg.alpha
    bit = 0 if side_rate == cfg.alpha else 1

    floor_thr = math.floor(thr)
    if thr != floor_thr:
        low_max = floor_thr
    else:
        low_max = floor_thr if alpha_is_low else floor_thr - 1
    decoded_low = side_rate == lo_rate
    n = cfg.N
    if decoded_low:
        confidence = 1.0 - float(binom.cdf(low_max, n, hi_rate))
        confidence_normal = 1.0 - _normal_cdf(low_max, n, hi_rate)
    else:
        confidence = float(binom.cdf(low_max, n, lo_rate))
        confidence_normal = _normal_cdf(low_max, n, lo_rate)
    return DecodeResult(bit, zeros, thr, confidence, confidence_normal)


def _normal_cdf(value: float, n: int, rate: float) -> float:
    scale = math.sqrt(n * rate * (1.0 - rate))
    return float(norm.cdf(value, loc=n * rate, scale=scale))


def decode(transcript: Transcript, cfg: SignalingConfig) -> DecodeResult:
    """Decode a signaling-stage transcript (counts odd-round zeros)."""
    if len(transcript) != 2 * cfg.N:
        raise StructureError(
            f"expected a 2N = {2 * cfg.N} round transcript, got {len(transcript)}"
        )
    zeros = int(np.count_nonzero(transcript.a[1::2] == 0))
    return decode_count(zeros, cfg)


def bit_error_rate(
    strategy: Strategy,
    kernel: MemoryKernel | None,
    cfg: SignalingConfig,
    trials: int,
    seed: int,
) -> float:
    """Fraction of random message bits decoded wrongly over seeded trials."""
    if trials < 1:
        raise RangeError("trials must be at least 1")
    messages = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(_MESSAGE_STREAM,))
    ).integers(0, 2, size=trials)
    trial_seeds = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(_TRIAL_STREAM,))
    ).integers(0, 2**63 - 1, size=trials)
    errors = 0
    for message, trial_seed in zip(messages, trial_seeds):
        transcript = encode_run(strategy, kernel, cfg, int(message), int(trial_seed))
        if decode(transcript, cfg).bit != int(message):
            errors += 1
    return errors / trials


# ---------------------------------------------------------------------------
# Marginalized bias and the superluminal margin


def _bob_given_y(source, y: int) -> tuple[float, float]:
    if isinstance(source, Strategy):
        card = source.lambda_card
        n1 = sum(1 for lam in range(card) if source.bob_output(y, lam) == 1)
        return (1.0 - n1 / card, n1 / card)
    if isinstance(source, Behavior):
        source = marginal(source, "bob")
    if isinstance(source, Marginal):
        if source.side != "bob":
            raise StructureError("need Bob's marginal")
        return (source.prob(0, y), source.prob(1, y))
    raise TypeError("source must be a Strategy, Behavior, or Marginal")


def marginalized_bias(
    estimate: GEstimate,
    source,
    y_now: int,
    coarse: Partition,
    x_now: int,
    x_prev: int,
    confidence: float = 0.99,
) -> tuple[float, float]:
    """Bias pair after averaging over Bob's uncontrolled current output.

    For each coarse class of the previous pair, the b-indexed cells at
    (x_now, x_prev, y_now, b) are pooled and then averaged with weights
    p(b | y_now) taken from `source` (a Strategy, Behavior, or Bob
    Marginal). If the two results agree within their combined Hoeffding
    bands the bias is fine-tuned away and FineTunedBehaviorError is
    raised; mixing the behavior toward an output-steering vertex breaks
    the cancellation.
    """
    if coarse.num_classes != 2:
        raise StructureError("coarse partition must have two classes")
    weights = _bob_given_y(source, y_now)
    delta_cell = (1.0 - confidence) / 4.0
    values = np.zeros((2, 2))  # [b, class]
    bands = np.zeros((2, 2))
    for b, side in product((0, 1), repeat=2):
        count = 0
        zeros = 0
        for yp, bp in product((0, 1), repeat=2):
            if coarse.apply(yp, bp) != side:
                continue
            cell = encode_cell(x_now, x_prev, y_now, b, yp, bp)
            count += int(estimate.counts[cell])
            zeros += int(estimate.zeros[cell])
        if count == 0 and weights[b] > 0.0:
            raise InsufficientDataError(
                f"no samples for b={b}, coarse class {side}"
            )
        values[b, side] = zeros / count if count else 0.0
        bands[b, side] = hoeffding_band(count, delta_cell) if count else 0.0
    alpha_marg = float(weights[0] * values[0, 0] + weights[1] * values[1, 0])
    beta_marg = float(weights[0] * values[0, 1] + weights[1] * values[1, 1])
    band = float(
        weights[0] * (bands[0, 0] + bands[0, 1])
        + weights[1] * (bands[1, 0] + bands[1, 1])
    )
    if abs(alpha_marg - beta_marg) <= band:
        raise FineTunedBehaviorError(alpha_marg, beta_marg, band)
    return alpha_marg, beta_marg


@dataclass(frozen=True)
class SuperluminalParams:
    """Distance between the parties and the per-round interval."""

    distance_m: float
    round_time_s: float
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        if self.distance_m <= 0 or self.round_time_s <= 0 or self.light_speed <= 0:
            raise RangeError("distance, round time, and light speed must be positive")


def superluminal_margin(params: SuperluminalParams, n: int) -> bool:
    """True when one decoded bit (2N rounds) outruns a light signal."""
    return params.distance_m / params.light_speed > 2.0 * n * params.round_time_s
