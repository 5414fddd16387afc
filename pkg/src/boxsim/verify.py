"""Exact-identity check suite behind `boxsim verify`.

Everything here is decidable without tolerance: PR reproduction in
rational arithmetic, the pointwise parity condition, the partition
census, the infeasibility of signaling the AND bit, and the vertex and
facet counts. The corrupt flag flips one response-table bit first, as a
self-test that the suite can actually fail.
"""

from __future__ import annotations

from itertools import product

from .behavior import (
    all_deterministic_vertices,
    all_pr_boxes,
    chsh_value,
    is_nonsignaling,
    pr_box,
)
from .boxworld import (
    Strategy,
    feasibility_search,
    input_signaling_strategy,
    output_signaling_strategy,
    reproduces_exactly,
    xor_signaling_strategy,
)
from .sigfun import (
    AND_PARTITION,
    INPUT_PARTITION,
    OUTPUT_PARTITION,
    XOR_PARTITION,
    enumerate_partitions,
    from_function,
)


def _corrupted(strategy: Strategy) -> Strategy:
    alice = [
        [list(row) for row in block] for block in strategy.alice
    ]
    alice[0][0][0] ^= 1
    return Strategy(
        strategy.lambda_card,
        strategy.partition,
        strategy.bob,
        tuple(tuple(tuple(row) for row in block) for block in alice),
        strategy.label,
    )


def run_checks(corrupt: bool = False) -> list[tuple[str, bool]]:
    """Run all checks; returns (name, passed) pairs in a fixed order."""
    strategies = {
        "input-signaling": input_signaling_strategy(),
        "output-signaling": output_signaling_strategy(),
        "xor-signaling": xor_signaling_strategy(),
    }
    if corrupt:
        strategies["input-signaling"] = _corrupted(strategies["input-signaling"])
    target = pr_box()
    results: list[tuple[str, bool]] = []

    for name, strategy in strategies.items():
        results.append((f"pr-exact/{name}", reproduces_exactly(strategy, target)))

    for name, strategy in strategies.items():
        ok = True
        for x, y, lam in product((0, 1), (0, 1), range(strategy.lambda_card)):
            b = strategy.bob_output(y, lam)
            s = strategy.partition.apply(y, b)
            a = strategy.alice_output(x, s, lam)
            if a ^ b != x & y:
                ok = False
        results.append((f"pr-pointwise/{name}", ok))

    partitions = enumerate_partitions()
    results.append(("partitions/count-15", len(partitions) == 15))
    results.append(
        ("partitions/nonconstant-14",
         sum(1 for p in partitions if not p.is_constant()) == 14)
    )
    image = {
        from_function({cell: (code >> (2 * i)) & 3 for i, cell in
                       enumerate(((0, 0), (0, 1), (1, 0), (1, 1)))})
        for code in range(256)
    }
    results.append(("partitions/closure-256", image == set(partitions)))

    for lam_card in (1, 2, 3, 4):
        witness = feasibility_search(target, AND_PARTITION, lam_card)
        results.append((f"feasibility/and-none-l{lam_card}", witness is None))
    for label, partition in (
        ("input", INPUT_PARTITION),
        ("output", OUTPUT_PARTITION),
        ("xor", XOR_PARTITION),
    ):
        witness = feasibility_search(target, partition, 2)
        ok = witness is not None and reproduces_exactly(witness, target)
        results.append((f"feasibility/{label}-witness-l2", ok))

    vertices = all_deterministic_vertices() + all_pr_boxes()
    distinct = len({v.probs.tobytes() for v in vertices}) == 24
    results.append(("vertices/24-distinct", distinct))
    results.append(
        ("vertices/nonsignaling", all(is_nonsignaling(v, 0.0) for v in vertices))
    )
    results.append(
        ("facets/local-at-most-2",
         all(chsh_value(v, i) <= 2.0
             for v in all_deterministic_vertices() for i in range(8)))
    )
    results.append(
        ("facets/pr-one-maximum",
         all(sum(1 for i in range(8) if chsh_value(v, i) == 4.0) == 1
             for v in all_pr_boxes()))
    )
    return results
