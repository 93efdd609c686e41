"""Command-line surface: kernel matrices, sketching, encoding, simulation, learning.

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric error. Failed
commands leave no partial output files behind. ``gram`` and ``encode``
accept ``-`` for stdin/stdout streaming.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from . import cws, data, estimate, kernels, learn
from .encode import BitBudget, encode as encode_sketch, rows_from_dataset, write_libsvm
from .rng import MASK64

DEFAULT_LAMBDA_GRID = "1e-6,1e-5,1e-4,1e-3,1e-2,1e-1,1,1e1,1e2"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


@contextmanager
def _input(path):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as f:
            yield f


@contextmanager
def _output(path):
    """Write through a temp file; incomplete outputs are removed on failure."""
    if path == "-":
        yield sys.stdout
        return
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _seed(text):
    return int(text, 0) & MASK64


def _load_dataset(path, dimension=None, shift_half=False):
    with _input(path) as f:
        return data.load(f, dimension=dimension, shift_half=shift_half)


def _parse_k_grid(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            parts = tok.split("..")
            if len(parts) == 2:
                lo, hi, step = int(parts[0]), int(parts[1]), 1
            elif len(parts) == 3:
                lo, hi, step = int(parts[0]), int(parts[1]), int(parts[2])
            else:
                raise _UsageError(f"bad k-grid range {tok!r}")
            if step < 1 or hi < lo:
                raise _UsageError(f"bad k-grid range {tok!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            out.append(int(tok))
    if not out or any(k < 1 for k in out):
        raise _UsageError(f"k-grid must list positive integers, got {text!r}")
    return out


def _parse_schemes(text, dimension):
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok == "full":
            out.append(estimate.Scheme.full())
        elif re.fullmatch(r"(\d+)bit", tok):
            out.append(estimate.Scheme.t_bits(dimension, int(tok[:-3])))
        elif m := re.fullmatch(r"bi(\d+)bt(\d+)", tok):
            out.append(estimate.Scheme.truncated(
                BitBudget(int(m.group(1)), int(m.group(2)))))
        else:
            raise _UsageError(
                f"unknown scheme {tok!r} (expected full, <n>bit, or bi<A>bt<B>)")
    if not out:
        raise _UsageError("at least one scheme is required")
    return out


def _cmd_gram(args):
    kind = kernels.KernelKind(args.kernel)
    mode = data.NormalizeMode(args.normalize)
    train_ds = _load_dataset(args.train, dimension=args.dimension)
    if args.test is not None:
        test_ds = _load_dataset(args.test, dimension=args.dimension)
        if args.dimension is None and test_ds.dimension != train_ds.dimension:
            raise ValueError(
                f"train and test dimensions differ ({train_ds.dimension} vs "
                f"{test_ds.dimension}); pass --dimension to make them comparable")
        left_ds = test_ds
    else:
        left_ds = train_ds
    if mode is not data.NormalizeMode.NONE:
        train_ds = data.normalize(train_ds, mode)
        left_ds = train_ds if args.test is None else data.normalize(left_ds, mode)
    matrix = kernels.gram(left_ds.vectors(), train_ds.vectors(), kind,
                          threads=args.threads)
    with _output(args.out) as f:
        kernels.write_precomputed(matrix, left_ds.labels(), f)
    return 0


def _cmd_sketch(args):
    if args.k < 1:
        raise _UsageError(f"--k must be >= 1, got {args.k}")
    dataset = _load_dataset(args.infile, dimension=args.dimension)
    for pos, (_, vec) in enumerate(dataset.rows):
        if vec.is_empty():
            raise ValueError(f"row {pos} is empty; cannot sketch")
    vectors = dataset.vectors()
    sketches = [None] * len(vectors)

    def work(pos):
        sketches[pos] = cws.sketch(vectors[pos], args.k, args.seed)

    if args.threads > 1 and len(vectors) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            list(pool.map(work, range(len(vectors))))
    else:
        for pos in range(len(vectors)):
            work(pos)
    with _output(args.out) as f:
        cws.write_sketches(f, sketches)
    return 0


def _cmd_encode(args):
    budget = BitBudget(args.bi, args.bt)
    if budget.bi + budget.bt < 1:
        raise _UsageError("encoding requires at least one bit (bi + bt >= 1)")
    with _input(args.infile) as f:
        sketches = cws.read_sketches(f)
    labels_ds = _load_dataset(args.labels)
    if len(labels_ds.rows) != len(sketches):
        raise ValueError(
            f"label file has {len(labels_ds.rows)} rows but sketch file has "
            f"{len(sketches)}")
    rows = [(label, encode_sketch(sk, budget))
            for (label, _), sk in zip(labels_ds.rows, sketches)]
    with _output(args.out) as f:
        write_libsvm(f, rows)
    return 0


def _cmd_simulate(args):
    if args.reps < 1:
        raise _UsageError(f"--reps must be >= 1, got {args.reps}")
    dataset = _load_dataset(args.pairs, dimension=args.dimension)
    if len(dataset.rows) < 2 or len(dataset.rows) % 2 != 0:
        raise ValueError(
            f"pairs file must hold an even number of rows, got {len(dataset.rows)}")
    k_grid = _parse_k_grid(args.k_grid)
    schemes = _parse_schemes(args.schemes, dataset.dimension)
    reports = []
    vectors = dataset.vectors()
    for pair in range(len(vectors) // 2):
        reports.append(estimate.simulate(
            vectors[2 * pair], vectors[2 * pair + 1], k_grid, schemes,
            args.reps, args.seed, pair_id=str(pair)))
    with _output(args.out) as f:
        estimate.write_csv(reports, f)
    return 0


def _encoded_rows(path, k, budget):
    dataset = _load_dataset(path, dimension=k * budget.width)
    return rows_from_dataset(dataset, k, budget)


def _cmd_train(args):
    budget = BitBudget(args.bi, args.bt)
    rows = _encoded_rows(args.train, args.k, budget)
    if args.lam is not None:
        grid = [args.lam]
    else:
        grid = [float(tok) for tok in args.lambda_grid.split(",") if tok.strip()]
    if not grid or any(not lam > 0 for lam in grid):
        raise _UsageError(f"lambda grid must list positive reals, got {grid!r}")
    heldout = _encoded_rows(args.heldout, args.k, budget) if args.heldout else None

    best = None
    for lam in grid:
        cfg = learn.TrainConfig(epochs=args.epochs, lam=lam, seed=args.seed,
                                loss=args.loss)
        model = learn.train(rows, cfg)
        acc = learn.evaluate(model, heldout if heldout is not None else rows)
        print(f"lambda {lam!r} accuracy {acc!r}")
        if best is None or acc > best[0]:
            best = (acc, lam, model)
    print(f"best lambda {best[1]!r} accuracy {best[0]!r}")
    with _output(args.out) as f:
        learn.save_model(best[2], f)
    return 0


def _cmd_eval(args):
    with _input(args.model) as f:
        model = learn.load_model(f)
    rows = _encoded_rows(args.test, model.k, model.budget)
    acc = learn.evaluate(model, rows)
    print(f"accuracy {acc!r}")
    return 0


def _build_parser():
    parser = _Parser(prog="cwsketch",
                     description="Min-max kernels, consistent weighted sampling, "
                                 "and hashed-feature linear learning.")
    sub = parser.add_subparsers(dest="command", required=True)
    threads_default = os.cpu_count() or 1

    p = sub.add_parser("gram", help="emit a LIBSVM precomputed-kernel file")
    p.add_argument("--kernel", required=True,
                   choices=[k.value for k in kernels.KernelKind])
    p.add_argument("--train", required=True, help="training data (LIBSVM sparse)")
    p.add_argument("--test", help="optional test data; emits test-vs-train rows")
    p.add_argument("--normalize", default="none",
                   choices=[m.value for m in data.NormalizeMode])
    p.add_argument("--dimension", type=int)
    p.add_argument("--threads", type=int, default=threads_default)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("sketch", help="sketch every row of a dataset")
    p.add_argument("--k", type=int, required=True, help="samples per vector")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--dimension", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--threads", type=int, default=threads_default)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sketch)

    p = sub.add_parser("encode", help="expand sketches into LIBSVM binary features")
    p.add_argument("--bi", type=int, required=True, help="bits kept of istar")
    p.add_argument("--bt", type=int, required=True, help="bits kept of tstar")
    p.add_argument("--in", dest="infile", required=True, help="sketch file")
    p.add_argument("--labels", required=True, help="dataset supplying row labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("simulate", help="bias/MSE report for sketch estimators")
    p.add_argument("--pairs", required=True,
                   help="LIBSVM file; consecutive rows form pairs")
    p.add_argument("--k-grid", required=True,
                   help="comma list of k values; ranges as a..b or a..b..step")
    p.add_argument("--schemes", required=True,
                   help="comma list: full, <n>bit, or bi<A>bt<B>")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--dimension", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="fit a linear model on encoded features")
    p.add_argument("--train", required=True, help="encoded features (LIBSVM)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bi", type=int, required=True)
    p.add_argument("--bt", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float,
                   help="single regularization strength (skips the grid)")
    p.add_argument("--lambda-grid", default=DEFAULT_LAMBDA_GRID)
    p.add_argument("--heldout", help="encoded rows scored to pick the best lambda")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--loss", default="hinge", choices=["hinge", "logistic"])
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True, help="model file")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="accuracy of a saved model on encoded rows")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, help="encoded features (LIBSVM)")
    p.set_defaults(func=_cmd_eval)

    return parser


def run(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
