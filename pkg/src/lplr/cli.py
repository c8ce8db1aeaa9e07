"""Command-line front end: ``lplr <command> ...`` or ``python -m lplr``.

Exit status is 0 on success, 1 for usage errors and 2 for runtime failures
(bad files, saturation, numerical errors).
"""

import argparse
import json
import os
import sys
from contextlib import nullcontext

import numpy as np

from .compressor import CompressionConfig, compress, reconstruct
from . import formats, verify
from .knn import knn_classify
from .metrics import parity_sketch_size, relative_fro_error
from .phantom import shepp_logan
from .sweep import Budget, sweep

ALGOS = {"lplr": "lplr", "lsvd": "lplr_svd", "dsvd": "dsvd", "nq": "naive"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _cmd_compress(args):
    A = formats.load_matrix(args.input, args.format)
    n, d = A.shape
    algo = ALGOS[args.algo]
    widths = [w for w in (args.sketch_size, args.rank, args.parity_bnq) if w is not None]
    if algo == "naive":
        if widths:
            raise UsageError("nq takes no --sketch-size, --rank or --parity-bnq")
    elif len(widths) != 1:
        raise UsageError("give exactly one of --sketch-size, --rank, --parity-bnq")
    bits2 = args.bits2 if args.bits2 is not None else args.bits
    width = args.sketch_size if args.sketch_size is not None else args.rank
    if args.parity_bnq is not None:
        width = parity_sketch_size(n, d, args.bits, bits2, args.parity_bnq)
    if args.range_mode == "theory" and args.eps is None:
        raise UsageError("--range-mode theory needs --eps")
    cfg = CompressionConfig(
        algorithm=algo,
        sketch_size=width if algo == "lplr" else None,
        target_rank=width if algo in ("lplr_svd", "dsvd") else None,
        bits=args.bits, bits2=bits2,
        range_mode="theory" if args.range_mode == "theory" else "data_driven",
        eps=args.eps,
        solver="conjugate_gradient" if args.solver == "cg" else "closed_form",
        lsvd_rotation=args.rotate, normalize_shift=args.normalize_shift,
        rounding=args.rounding, naive_offset=not args.nq_symmetric, seed=args.seed,
        max_retries=args.max_retries,
    )
    F, report = compress(A, cfg)
    formats.save_factorization(args.out, F)
    out = report.to_dict()
    out["file_bytes"] = os.path.getsize(args.out)
    _emit(out, args.report)


def _cmd_decompress(args):
    F = formats.load_factorization(args.input)
    formats.save_matrix(args.out, reconstruct(F), args.format, clip=True)
    n, d = F.shape
    _emit({"rows": n, "cols": d, "algorithm": F.algorithm, "out": args.out})


def _cmd_eval(args):
    A = formats.load_matrix(args.a)
    B = formats.load_matrix(args.b)
    _emit({"relative_fro_error": relative_fro_error(B, A)})


def _load_json_arg(value):
    if os.path.exists(value):
        with open(value) as fh:
            return json.load(fh)
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        raise UsageError(f"--grid is neither a file nor valid JSON: {value!r}") from None


def _cmd_sweep(args):
    A = formats.load_matrix(args.input, args.format)
    grid = _load_json_arg(args.grid)
    try:
        algorithms = grid["algorithms"]
        budgets = [Budget(*b) for b in grid["budgets"]]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"grid needs 'algorithms' and 'budgets' lists ({exc})") from None
    seeds = grid.get("seeds", [args.seed])
    result = sweep(A, algorithms, budgets, seeds, grid.get("options"))
    _emit(result.to_dict(), args.out)


def _read_labels(path):
    with open(path) as fh:
        toks = [t.strip() for line in fh for t in line.split(",") if t.strip()]
    try:
        return np.array([int(t) for t in toks])
    except ValueError:
        return np.array(toks)


def _cmd_knn(args):
    train = formats.load_matrix(args.train)
    test = formats.load_matrix(args.test)
    labels = _read_labels(args.labels)
    truth = _read_labels(args.test_labels) if args.test_labels else None
    _emit(knn_classify(train, labels, test, args.k, truth).to_dict(), args.out)


def _cmd_phantom(args):
    img = shepp_logan(args.size)
    fmt = args.format or formats.infer_format(args.out)
    if fmt == "pgm":
        img = np.rint(255.0 * img)
    formats.save_matrix(args.out, img, fmt)
    _emit({"size": args.size, "out": args.out, "format": fmt})


def _cmd_selftest(args):
    suites = ["wishart", "equalization", "sketchedls"] if args.suite == "all" else [args.suite]
    results = {}
    if "wishart" in suites:
        rs = [verify.verify_wishart_trace(m, d, args.trials, args.seed) for m, d in ((4, 20), (8, 40))]
        results["wishart"] = {"passed": all(r.passed() for r in rs), "cases": [r.to_dict() for r in rs]}
    if "equalization" in suites:
        rs = [verify.verify_equalization(256, 32, B, 1.0, min(args.trials, 2000), args.seed)
              for B in (1, 4, 8)]
        results["equalization"] = {"passed": all(r.passed for r in rs),
                                   "cases": [r.to_dict() for r in rs]}
    if "sketchedls" in suites:
        r = verify.verify_sketched_ls(m=10, B=4, trials=200, seed=args.seed)
        results["sketchedls"] = {"passed": r.passed, "cases": [r.to_dict()]}
    ok = all(v["passed"] for v in results.values())
    _emit({"passed": ok, "suites": results})
    return 0 if ok else 2


def build_parser():
    p = _Parser(prog="lplr", description="Low-precision low-rank matrix compression.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compress", help="compress a matrix into a factor file")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--format", choices=formats.FORMATS)
    c.add_argument("--algo", choices=sorted(ALGOS), required=True)
    c.add_argument("--sketch-size", type=int)
    c.add_argument("--rank", type=int)
    c.add_argument("--parity-bnq", type=int, help="pick the width matching this naive budget")
    c.add_argument("--bits", type=int, required=True)
    c.add_argument("--bits2", type=int)
    c.add_argument("--range-mode", choices=("data", "theory"), default="data")
    c.add_argument("--eps", type=float)
    c.add_argument("--solver", choices=("closed", "cg"), default="closed")
    c.add_argument("--normalize-shift", action="store_true")
    c.add_argument("--rotate", action="store_true", help="lsvd: rotate the basis by a k x k Gaussian")
    c.add_argument("--rounding", choices=("dithered", "nearest"), default="dithered")
    c.add_argument("--nq-symmetric", action="store_true",
                   help="nq: grid symmetric about zero instead of centred on the data midrange")
    c.add_argument("--max-retries", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--report")
    c.set_defaults(func=_cmd_compress)

    dc = sub.add_parser("decompress", help="rebuild a dense matrix from a factor file")
    dc.add_argument("--in", dest="input", required=True)
    dc.add_argument("--out", required=True)
    dc.add_argument("--format", choices=formats.FORMATS)
    dc.set_defaults(func=_cmd_decompress)

    e = sub.add_parser("eval", help="relative Frobenius error of --b against --a")
    e.add_argument("--a", required=True)
    e.add_argument("--b", required=True)
    e.set_defaults(func=_cmd_eval)

    s = sub.add_parser("sweep", help="run a grid of algorithms and bit budgets")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--format", choices=formats.FORMATS)
    s.add_argument("--grid", required=True, help="JSON file or inline JSON")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_sweep)

    k = sub.add_parser("knn", help="K-nearest-neighbour classification")
    k.add_argument("--train", required=True)
    k.add_argument("--labels", required=True)
    k.add_argument("--test", required=True)
    k.add_argument("--test-labels")
    k.add_argument("--k", type=int, default=3)
    k.add_argument("--out")
    k.set_defaults(func=_cmd_knn)

    ph = sub.add_parser("phantom", help="write a Shepp-Logan phantom")
    ph.add_argument("--size", type=int, required=True)
    ph.add_argument("--out", required=True)
    ph.add_argument("--format", choices=formats.FORMATS)
    ph.set_defaults(func=_cmd_phantom)

    st = sub.add_parser("selftest", help="Monte-Carlo checks of the error analysis")
    st.add_argument("--suite", choices=("wishart", "equalization", "sketchedls", "all"), default="all")
    st.add_argument("--trials", type=int, default=5000)
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=_cmd_selftest)
    return p


def _thread_limit():
    raw = os.environ.get("LPLR_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"LPLR_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("LPLR_THREADS must be >= 0")
    if n == 0:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        with _thread_limit():
            status = args.func(args)
    except UsageError as exc:
        print(f"lplr {args.command}: usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"lplr {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
