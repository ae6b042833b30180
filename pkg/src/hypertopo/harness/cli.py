"""Command-line entry point: ``hypertopo <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 I/O or format error,
3 invariant or gradcheck failure.
"""
import argparse
import json
import sys
from pathlib import Path

from ..errors import FormatError, TopologyInvariantError
from ..grid_topology import betti_numbers, euler_characteristic
from ..soft_euler import soft_euler_char
from . import evaluate, gradcheck
from .codecs import read_mask, read_probmap, write_mask, write_probmap
from .selection import read_checkpoint_log, select_checkpoint
from .synth import SynthSpec, perturb_probmap, synth_mask

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return values


def cmd_eval(args) -> int:
    try:
        run = evaluate.load_config(args.config, args.threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pairs, problems = evaluate.pair_files(args.pred, args.gt)
    for msg in problems:
        print(f"unmatched: {msg}", file=sys.stderr)
    if not pairs:
        print("error: no prediction/ground-truth pairs found", file=sys.stderr)
        return EXIT_IO
    records, errors = evaluate.evaluate_pairs(pairs, run.eval, args.workers)
    for msg in errors:
        print(f"failed: {msg}", file=sys.stderr)
    out = Path(args.out)
    out.write_text(evaluate.records_to_csv(records))
    meta = dict(run.metadata(), samples=len(records), failures=len(errors) + len(problems))
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if args.jsonl:
        Path(args.jsonl).write_text(evaluate.records_to_jsonl(records))
    return EXIT_IO if (problems or errors) else EXIT_OK


def cmd_topo(args) -> int:
    mask = read_mask(args.mask)
    b = betti_numbers(mask)
    chi = euler_characteristic(mask)
    if chi != b.beta0 - b.beta1:
        raise TopologyInvariantError("chi != beta0 - beta1")
    print(f"beta0={b.beta0} beta1={b.beta1} chi={chi}")
    return EXIT_OK


def cmd_probchi(args) -> int:
    print(f"chi_soft={soft_euler_char(read_probmap(args.pmap))!r}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    results = gradcheck.run_gradcheck(args.seed, args.sizes, args.trials)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"gradcheck failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"all {len(results)} gradient checks passed (tolerance {gradcheck.TOLERANCE:g})")
    return EXIT_OK


def cmd_select(args) -> int:
    try:
        k = args.k if args.k is not None else evaluate.load_config(args.config).select_k
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if k < 1:
        raise UsageError("--k must be >= 1")
    try:
        entries = read_checkpoint_log(args.log)
        print(select_checkpoint(entries, k))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pred_dir = Path(args.pred) if args.pred else None
    if pred_dir:
        pred_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.n):
        spec = SynthSpec(seed=args.seed + i, height=args.height, width=args.width,
                         n_blobs=args.blobs, n_holes=args.holes, min_gap=args.min_gap)
        mask = synth_mask(spec)
        name = f"sample_{i:04d}"
        write_mask(mask, out / f"{name}.pgm")
        if pred_dir:
            write_probmap(perturb_probmap(mask, seed=args.seed + i), pred_dir / f"{name}.pmap")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypertopo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="per-sample metrics for a directory of predictions")
    p.add_argument("--pred", required=True, help="directory of .pmap or .pgm predictions")
    p.add_argument("--gt", required=True, help="directory of .pgm ground-truth masks")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--threshold", type=float, help="override the probability threshold")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--jsonl", help="also write JSON lines here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("topo", help="print beta0, beta1 and chi of a PGM mask")
    p.add_argument("mask")
    p.set_defaults(func=cmd_topo)

    p = sub.add_parser("probchi", help="print the soft Euler characteristic of a PMAP1 file")
    p.add_argument("pmap")
    p.set_defaults(func=cmd_probchi)

    p = sub.add_parser("gradcheck", help="finite-difference check of all analytic gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", type=_int_list, default=list(gradcheck.DEFAULT_SIZES))
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("select", help="min-PD within top-K Dice checkpoint selection")
    p.add_argument("log", help="CSV with header checkpoint_id,mean_dice,mean_pd")
    p.add_argument("--k", type=int)
    p.add_argument("--config", help="key=value config file (select.k)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("synth", help="write synthetic masks with known topology")
    p.add_argument("--out", required=True, help="directory for ground-truth PGMs")
    p.add_argument("--pred", help="also write perturbed PMAP1 predictions here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--blobs", type=int, default=3)
    p.add_argument("--holes", type=int, default=1)
    p.add_argument("--min-gap", type=int, default=2)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TopologyInvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
