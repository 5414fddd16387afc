"""Command-line entry point.

Subcommands: run, sample, detect, signal, ber, margin, feasibility,
fig4, verify. Every file-writing command drops a sidecar manifest
(<out>.manifest.json) recording the flags, seed, versions, and wall
time; the primary outputs themselves are byte-identical across re-runs
with the same flags and seed. BOXSIM_SEED supplies the default seed.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 domain
error, 4 insufficient data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy
from scipy.stats import binom

from . import __version__
from .behavior import behavior_from_json, pr_box
from .boxworld import (
    NAMED_STRATEGIES,
    feasibility_search,
    input_signaling_strategy,
    reproduces_exactly,
    strategy_to_json,
)
from .errors import BoxsimError, InsufficientDataError
from .harness import (
    AlternatingPair,
    RandomBits,
    Scripted,
    run,
    transcript_to_jsonl,
)
from .memory import kernel_from_json
from .protocol import (
    GEstimate,
    bit_error_rate,
    decode,
    decode_cell,
    detect_memory,
    encode_cell,
    encode_run,
    hoeffding_band,
    make_config,
    sample_G,
    steering_kernel,
    superluminal_margin,
    SuperluminalParams,
)
from .sigfun import INPUT_PARTITION, Partition
from . import verify as verify_mod

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NO_DATA = 4

_BAND_DELTA = 0.01  # per-cell confidence for the G table CSV


def _default_seed() -> int:
    return int(os.environ.get("BOXSIM_SEED", "0"))


def _parse_source(spec: str):
    """Input source flags: random[:SEED] | alt:ODD,EVEN | bits:0101..."""
    if spec == "random":
        return RandomBits()
    if spec.startswith("random:"):
        return RandomBits(int(spec.split(":", 1)[1]))
    if spec.startswith("alt:"):
        odd, even = spec.split(":", 1)[1].split(",")
        return AlternatingPair(odd=int(odd), even=int(even))
    if spec.startswith("bits:"):
        return Scripted(tuple(int(c) for c in spec.split(":", 1)[1]))
    raise argparse.ArgumentTypeError(f"unknown input source {spec!r}")


def _write_output(path: str, content: str, args, started: float):
    out = Path(path)
    out.write_text(content, encoding="utf-8")
    manifest = {
        "subcommand": args.command,
        "flags": {
            k: v for k, v in sorted(vars(args).items())
            if k not in ("command", "func") and not callable(v)
        },
        "seed": getattr(args, "seed", None),
        "outputs": [str(out)],
        "versions": {
            "boxsim": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "duration_s": round(time.time() - started, 6),
        "written_at": datetime.now(timezone.utc).isoformat(),
    }
    Path(str(out) + ".manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _load_model(args):
    strategy = NAMED_STRATEGIES[args.model]()
    kernel = None
    if getattr(args, "kernel", None):
        kernel = kernel_from_json(Path(args.kernel).read_text(encoding="utf-8"))
    return strategy, kernel


def _g_table_csv(estimate: GEstimate) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cell", "count", "frequency", "band"])
    for i in range(64):
        x, xp, y, b, yp, bp = decode_cell(i)
        key = f"{x}{xp}|{y}{b}|{yp}{bp}"
        n = int(estimate.counts[i])
        f = estimate.frequency(i)
        if f is None:
            writer.writerow([key, n, "", ""])
        else:
            writer.writerow([key, n, repr(f), repr(hoeffding_band(n, _BAND_DELTA))])
    return buf.getvalue()


def _g_table_from_csv(text: str) -> GEstimate:
    cells = {}
    for row in csv.DictReader(io.StringIO(text)):
        key = row["cell"]
        digits = [int(c) for c in key if c in "01"]
        if len(digits) != 6:
            raise BoxsimError(f"bad G table cell key {key!r}")
        count = int(row["count"])
        freq = row["frequency"]
        zeros = int(round(float(freq) * count)) if freq else 0
        cells[tuple(digits)] = (count, zeros)
    estimate = GEstimate.from_cells(cells)
    return estimate


def cmd_run(args) -> int:
    started = time.time()
    strategy, kernel = _load_model(args)
    transcript = run(
        strategy, kernel, args.alice, args.bob, rounds=args.rounds, seed=args.seed
    )
    content = transcript_to_jsonl(transcript)
    if args.out:
        _write_output(args.out, content, args, started)
    else:
        sys.stdout.write(content)
    return EXIT_OK


def cmd_sample(args) -> int:
    started = time.time()
    strategy, kernel = _load_model(args)
    transcript = run(
        strategy, kernel, RandomBits(), RandomBits(), rounds=args.rounds, seed=args.seed
    )
    content = _g_table_csv(sample_G(transcript))
    if args.out:
        _write_output(args.out, content, args, started)
    else:
        sys.stdout.write(content)
    return EXIT_OK


def cmd_detect(args) -> int:
    estimate = _g_table_from_csv(Path(args.g).read_text(encoding="utf-8"))
    detection = detect_memory(estimate, args.confidence)
    if detection is None:
        doc = {"memory": False}
    else:
        doc = {
            "memory": True,
            "coarse_partition": detection.coarse.string,
            "x_now": detection.x_now,
            "x_prev": detection.x_prev,
            "y_now": detection.y_now,
            "b_now": detection.b_now,
            "alpha_hat": detection.alpha_hat,
            "beta_hat": detection.beta_hat,
            "gap": detection.gap,
        }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return EXIT_OK


def _signal_setup(args):
    strategy = NAMED_STRATEGIES[args.model]()
    cfg = make_config(args.x_odd, args.x_even, args.y_odd, args.alpha, args.beta, args.k)
    kernel = steering_kernel(strategy, cfg, INPUT_PARTITION)
    return strategy, cfg, kernel


def cmd_signal(args) -> int:
    started = time.time()
    strategy, cfg, kernel = _signal_setup(args)
    transcript = encode_run(strategy, kernel, cfg, args.message, args.seed)
    result = decode(transcript, cfg)
    doc = {
        "bit": result.bit,
        "zeros": result.zeros,
        "threshold": result.threshold,
        "confidence": result.confidence,
        "confidence_normal": result.confidence_normal,
        "N": cfg.N,
    }
    content = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        _write_output(args.out, content, args, started)
    else:
        sys.stdout.write(content)
    return EXIT_OK


def cmd_ber(args) -> int:
    strategy, cfg, kernel = _signal_setup(args)
    if args.memoryless:
        kernel = None
    rate = bit_error_rate(strategy, kernel, cfg, args.trials, args.seed)
    doc = {
        "trials": args.trials,
        "error_rate": rate,
        "N": cfg.N,
        "threshold": cfg.threshold,
        "memoryless": bool(args.memoryless),
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_margin(args) -> int:
    params = SuperluminalParams(args.distance, args.tau)
    doc = {
        "transit_s": args.distance / params.light_speed,
        "window_s": 2.0 * args.N * args.tau,
        "superluminal": superluminal_margin(params, args.N),
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_feasibility(args) -> int:
    started = time.time()
    if args.target == "pr":
        target = pr_box()
    else:
        target = behavior_from_json(Path(args.target).read_text(encoding="utf-8"))
    partition = Partition.parse(args.partition)
    witness = feasibility_search(target, partition, args.lambda_card)
    doc = {
        "partition": partition.string,
        "lambda_card": args.lambda_card,
        "feasible": witness is not None,
    }
    if witness is not None:
        doc["witness"] = json.loads(strategy_to_json(witness))
        doc["exact"] = reproduces_exactly(witness, target)
    content = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        _write_output(args.out, content, args, started)
    else:
        sys.stdout.write(content)
    return EXIT_OK


def cmd_fig4(args) -> int:
    """CSV of the two decision binomials plus the threshold row."""
    started = time.time()
    cfg = make_config(0, 0, 0, args.alpha, args.beta, args.k)
    counts = np.arange(cfg.N + 1)
    pmf_alpha = binom.pmf(counts, cfg.N, args.alpha)
    pmf_beta = binom.pmf(counts, cfg.N, args.beta)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["count", "pmf_alpha", "pmf_beta"])
    for c in counts:
        writer.writerow([int(c), repr(float(pmf_alpha[c])), repr(float(pmf_beta[c]))])
    writer.writerow(["threshold", repr(cfg.threshold), ""])
    content = buf.getvalue()
    if args.out:
        _write_output(args.out, content, args, started)
    else:
        sys.stdout.write(content)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify_mod.run_checks(corrupt=args.corrupt)
    ok = all(passed for _, passed in results)
    if args.json:
        doc = {
            "checks": [{"name": name, "pass": passed} for name, passed in results],
            "ok": ok,
        }
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        width = max(len(name) for name, _ in results)
        for name, passed in results:
            print(f"{name:<{width}}  {'pass' if passed else 'FAIL'}")
        print(f"{'overall':<{width}}  {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxsim",
        description="Hidden-signaling box models with memory: simulate, learn, signal.",
    )
    parser.add_argument("--version", action="version", version=f"boxsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model(p):
        p.add_argument(
            "--model",
            choices=sorted(NAMED_STRATEGIES),
            default="input-signaling",
            help="named strategy (default: input-signaling)",
        )

    def add_seed(p):
        p.add_argument(
            "--seed",
            type=int,
            default=_default_seed(),
            help="run seed (default: $BOXSIM_SEED or 0)",
        )

    p = sub.add_parser("run", help="simulate rounds and emit a JSONL transcript")
    add_model(p)
    p.add_argument("--rounds", type=int, required=True)
    add_seed(p)
    p.add_argument("--alice", type=_parse_source, default=RandomBits())
    p.add_argument("--bob", type=_parse_source, default=RandomBits())
    p.add_argument("--kernel", help="memory kernel JSON file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sample", help="learning stage: estimate the 64-cell G table")
    add_model(p)
    p.add_argument("--rounds", type=int, required=True)
    add_seed(p)
    p.add_argument("--kernel", help="memory kernel JSON file to plant")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("detect", help="test a G table CSV for memory effects")
    p.add_argument("--g", required=True, help="G table CSV from `boxsim sample`")
    p.add_argument("--confidence", type=float, default=0.99)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("signal", help="encode one message bit and decode it")
    add_model(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--message", type=int, choices=(0, 1), required=True)
    add_seed(p)
    p.add_argument("--x-odd", type=int, choices=(0, 1), default=0)
    p.add_argument("--x-even", type=int, choices=(0, 1), default=0)
    p.add_argument("--y-odd", type=int, choices=(0, 1), default=0)
    p.add_argument("--out", help="decode report JSON path (default: stdout)")
    p.set_defaults(func=cmd_signal)

    p = sub.add_parser("ber", help="bit error rate over seeded trials")
    add_model(p)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--trials", type=int, required=True)
    add_seed(p)
    p.add_argument("--x-odd", type=int, choices=(0, 1), default=0)
    p.add_argument("--x-even", type=int, choices=(0, 1), default=0)
    p.add_argument("--y-odd", type=int, choices=(0, 1), default=0)
    p.add_argument(
        "--memoryless",
        action="store_true",
        help="drop the kernel: decoding should then be 50/50",
    )
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("margin", help="check the faster-than-light condition")
    p.add_argument("--distance", type=float, required=True, help="meters")
    p.add_argument("--tau", type=float, required=True, help="seconds per round")
    p.add_argument("--N", type=int, required=True, help="block length")
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser(
        "feasibility", help="exhaustive strategy search for a target behavior"
    )
    p.add_argument("--partition", required=True, help='signal partition, e.g. "0001"')
    p.add_argument(
        "--lambda", dest="lambda_card", type=int, required=True,
        help="hidden alphabet size (1..4)",
    )
    p.add_argument(
        "--target", default="pr", help='"pr" or a behavior JSON file (default: pr)'
    )
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("fig4", help="CSV of the two decision binomials")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("verify", help="run the exact-identity check suite")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientDataError as exc:
        print(f"boxsim: insufficient data: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    except BoxsimError as exc:
        print(f"boxsim: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
