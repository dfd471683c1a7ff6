"""Command-line front-end: ``gwbounds {dist,knn,isotest,bench,bary}``.

Every run writes its numeric outputs plus a ``manifest.json`` into
``--out``.  Numeric files carry a ``# manifest: manifest.json`` header and
depend only on the arguments and ``--seed``, so repeating a command gives
byte-identical files (timings live only in the manifest).

Exit codes: 0 success, 2 invalid input, 3 solver did not converge,
4 I/O failure.
"""

import argparse
import csv
import io
import json
import logging
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from . import barycenter as _bary
from .bounds import BOUNDS, BoundConfig, compute
from .exceptions import ConvergenceError, ConvergenceWarning, GWBoundsError
from .experiments import WL_METHODS, bench, isotest, knn_accuracy
from .graphs import GraphModel
from .spaces import as_mm, load_space

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_IO = 0, 2, 3, 4
RNG_NAME = "numpy.random.PCG64"
MANIFEST = "manifest.json"


# ---------------------------------------------------------------------------
# output helpers


class _Run:
    """Collects timings and output names, then writes the manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.out = Path(args.out)
        self.timings = {}
        self.outputs = []
        self.config = {}
        self.results = {}

    def phase(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[name] = time.perf_counter() - self.t0

        return _Timer()

    def _write(self, name, text):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)
        self.outputs.append(name)

    def write_matrix(self, stem, M):
        M = np.asarray(M, dtype=np.float64)
        if self.args.format == "json":
            self._write(f"{stem}.json", json.dumps({"manifest": MANIFEST, "data": M.tolist()}))
        else:
            buf = io.StringIO()
            np.savetxt(buf, M, delimiter=",", fmt="%.17g", header=f"manifest: {MANIFEST}")
            self._write(f"{stem}.csv", buf.getvalue())

    def write_table(self, stem, header, rows):
        if self.args.format == "json":
            recs = [dict(zip(header, row)) for row in rows]
            self._write(f"{stem}.json", json.dumps({"manifest": MANIFEST, "rows": recs}))
        else:
            buf = io.StringIO()
            buf.write(f"# manifest: {MANIFEST}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in row])
            self._write(f"{stem}.csv", buf.getvalue())

    def finish(self):
        manifest = {
            "command": self.argv,
            "subcommand": self.args.command,
            "version": __version__,
            "rng": RNG_NAME,
            "seeds": {"seed": self.args.seed},
            "config": self.config,
            "results": self.results,
            "timings": self.timings,
            "outputs": self.outputs,
        }
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / MANIFEST).write_text(json.dumps(manifest, indent=2, default=_jsonable))


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return str(x)


def _bound_config(args):
    return BoundConfig(p=args.p, alpha=args.alpha, r=args.r, num_projections=args.L,
                       seed=args.seed, solver=args.solver, epsilon=args.epsilon)


def _config_dict(cfg):
    d = cfg.as_dict()
    d["projection_generator"] = RNG_NAME
    return d


def _load_all(paths, fmt):
    spaces = []
    for path in paths:
        try:
            spaces.append(load_space(path, fmt))
        except OSError as exc:
            raise OSError(f"{path}: {exc.strerror or exc}") from exc
        except GWBoundsError as exc:
            # keep the original exception type; only make sure the file is named
            if str(path) not in str(exc):
                exc.args = (f"{path}: {exc}",)
            raise
    return spaces


def _load_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            rows.append([c.strip() for c in row])
    return rows


# ---------------------------------------------------------------------------
# subcommands


def cmd_dist(args, run):
    if len(args.inputs) < 2:
        raise GWBoundsError("dist needs at least two input spaces")
    cfg = _bound_config(args)
    run.config = {"bound": args.bound, "inputs": args.inputs, **_config_dict(cfg)}
    with run.phase("load"):
        spaces = _load_all(args.inputs, args.input_format)
    k = len(spaces)
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    D = np.zeros((k, k))
    with run.phase("compute"):
        job = lambda ij: compute(args.bound, spaces[ij[0]], spaces[ij[1]], cfg).value  # noqa: E731
        if args.threads > 1:
            with ThreadPoolExecutor(args.threads) as pool:
                values = list(pool.map(job, pairs))
        else:
            values = [job(ij) for ij in pairs]
    for (i, j), v in zip(pairs, values):
        D[i, j] = D[j, i] = v
    run.write_matrix("distances", D)
    print(f"{args.bound}: {k}x{k} matrix written to {run.out}")


def cmd_knn(args, run):
    with run.phase("load"):
        D = np.array([[float(c) for c in row] for row in _load_csv(args.matrix)])
        rows = _load_csv(args.labels)
        labels = np.array([row[-1] for row in rows])
        if labels.size and not _is_number(labels[0]):
            labels = labels[1:]  # header line
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise GWBoundsError(f"distance matrix must be square, got shape {D.shape}")
    if len(labels) != D.shape[0]:
        raise GWBoundsError(f"{len(labels)} labels for a {D.shape[0]}x{D.shape[0]} matrix")
    run.config = {"k": args.k, "splits": args.splits, "train_frac": args.train_frac,
                  "matrix": args.matrix, "labels": args.labels}
    with run.phase("classify"):
        mean, std, accs = knn_accuracy(D, labels, args.k, args.splits, args.train_frac,
                                       args.seed)
    run.results = {"accuracy_mean": mean, "accuracy_std": std}
    run.write_table("knn", ["split", "accuracy"], [(s, float(a)) for s, a in enumerate(accs)])
    print(f"accuracy {100 * mean:.2f} +- {100 * std:.2f} % over {args.splits} splits")


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_isotest(args, run):
    model = GraphModel(args.model, k=args.k, p_e=args.p_e, m=args.m, R=args.R,
                       feature_kind=args.features, p_b=args.p_b)
    methods = args.methods
    for m in methods:
        if m not in BOUNDS and m not in WL_METHODS:
            raise GWBoundsError(f"unknown method {m!r}")
    cfg = _bound_config(args)
    run.config = {"model": asdict(model), "n": args.n, "pairs": args.pairs,
                  "repetitions": args.repetitions, "methods": methods,
                  "all_isomorphic": args.all_isomorphic, **_config_dict(cfg)}
    with run.phase("isotest"):
        res = isotest(model, args.n, args.pairs, methods, cfg, args.seed, args.repetitions,
                      args.all_isomorphic)
    rows = []
    for m in methods:
        mean, std, per = res[m]
        rows.append((m, mean, std, ";".join(repr(float(a)) for a in per)))
        print(f"{m:>14s}: {100 * mean:6.2f} +- {100 * std:5.2f} %")
    run.results = {m: {"mean": res[m][0], "std": res[m][1]} for m in methods}
    run.write_table("isotest", ["method", "accuracy_mean", "accuracy_std", "per_repetition"],
                    rows)


def cmd_bench(args, run):
    cfg = _bound_config(args)
    run.config = {"sizes": args.sizes, "repeats": args.repeats, "bounds": args.bounds,
                  "dim": args.dim, **_config_dict(cfg)}
    with run.phase("bench"):
        rows = bench(args.sizes, args.repeats, args.bounds, cfg, args.seed, args.dim)
    for name, n, mean, std, med in rows:
        print(f"{name:>14s} n={n:<6d} {mean:.4f} +- {std:.4f} s (median {med:.4f})")
    # wall times are not reproducible, so they go to the manifest and a
    # separate timing table rather than a deterministic output
    run.results = {f"{name}@{n}": {"mean": mean, "std": std, "median": med}
                   for name, n, mean, std, med in rows}
    run.write_table("bench", ["bound", "n", "mean_s", "std_s", "median_s"], rows)


def cmd_bary(args, run):
    init_points = None
    with run.phase("load"):
        targets = [as_mm(s) for s in _load_all(args.targets, args.input_format)]
        if args.init_points:
            init_points = np.array([[float(c) for c in row] for row in _load_csv(args.init_points)])
    cfg = _bary.BarycenterConfig(
        n_points=args.n_points, dim=args.dim, steps=args.steps, step_size=args.step_size,
        restarts=args.restarts, distance=args.distance, r=args.r, num_projections=args.L,
        projection_seed=args.seed, init="warm-start" if init_points is not None else "random-normal",
        init_points=init_points, seed=args.seed)
    cfg_dict = asdict(cfg)
    cfg_dict["init_points"] = args.init_points
    run.config = {"targets": args.targets, **cfg_dict}
    with run.phase("descent"):
        res = _bary.solve(targets, cfg)
    run.results = {"final_loss": float(res.loss_trace[-1]), "best_restart": res.best_restart,
                   "final_losses": res.final_losses, "aborted": res.aborted}
    run.write_matrix("barycenter_points", res.points)
    run.write_table("loss_trace", ["step", "loss"],
                    [(i, float(v)) for i, v in enumerate(res.loss_trace)])
    print(f"final loss {res.loss_trace[-1]:.6g} (restart {res.best_restart})")


# ---------------------------------------------------------------------------
# parser


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _csv_list(cast):
    def parse(s):
        return [cast(x) for x in s.split(",") if x]
    return parse


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed of all randomness")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads for independent pairs (results are order-stable)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    bound = argparse.ArgumentParser(add_help=False)
    bound.add_argument("--bound", choices=sorted(BOUNDS), default="stlb")
    bound.add_argument("--p", type=float, default=2.0)
    bound.add_argument("--alpha", type=float, default=0.0)
    bound.add_argument("--r", type=_positive_int, default=None, help="quadrature size")
    bound.add_argument("--L", type=_positive_int, default=100, help="number of projections")
    bound.add_argument("--solver", choices=("exact", "sinkhorn"), default="exact")
    bound.add_argument("--epsilon", type=float, default=1e-3)

    parser = argparse.ArgumentParser(prog="gwbounds", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common, bound], help="pairwise bound matrix")
    p.add_argument("inputs", nargs="+", help="space files (.csv matrix or .json structured)")
    p.add_argument("--input-format", choices=("csv-matrix", "json-structured"), default=None)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("knn", parents=[common], help="k-NN accuracy on a distance matrix")
    p.add_argument("matrix")
    p.add_argument("labels")
    p.add_argument("--k", type=_positive_int, default=3)
    p.add_argument("--splits", type=_positive_int, default=100)
    p.add_argument("--train-frac", type=float, default=0.25)
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("isotest", parents=[common, bound], help="graph isomorphism accuracy")
    p.add_argument("--model", choices=("ws", "ba", "rr"), default="ws")
    p.add_argument("--n", type=_positive_int, default=10)
    p.add_argument("--k", type=int, default=4, help="WS ring degree")
    p.add_argument("--p-e", type=float, default=0.1, help="WS rewiring probability")
    p.add_argument("--m", type=int, default=5, help="BA edges per new node")
    p.add_argument("--R", type=int, default=3, help="random-regular degree")
    p.add_argument("--features", choices=("none", "normal1d", "bernoulli"), default="none")
    p.add_argument("--p-b", type=float, default=0.5)
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--repetitions", type=_positive_int, default=5)
    p.add_argument("--methods", type=_csv_list(str), default=None,
                   help="comma list of bounds and wl-d/wl-f (default: --bound)")
    p.add_argument("--all-isomorphic", action="store_true")
    p.set_defaults(func=cmd_isotest, r=5)

    p = sub.add_parser("bench", parents=[common, bound], help="runtime benchmark")
    p.add_argument("--sizes", type=_csv_list(int), default=[100, 200, 400])
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.add_argument("--bounds", type=_csv_list(str), default=["ftlb", "sftlb"])
    p.add_argument("--dim", type=_positive_int, default=2)
    p.set_defaults(func=cmd_bench, r=10, L=50, alpha=0.5)

    p = sub.add_parser("bary", parents=[common], help="free-support barycenter")
    p.add_argument("targets", nargs="+")
    p.add_argument("--input-format", choices=("csv-matrix", "json-structured"), default=None)
    p.add_argument("--distance", choices=("tlb", "stlb"), default="tlb")
    p.add_argument("--r", type=_positive_int, default=None)
    p.add_argument("--L", type=_positive_int, default=100)
    p.add_argument("--n-points", type=_positive_int, default=50)
    p.add_argument("--dim", type=_positive_int, default=2)
    p.add_argument("--steps", type=_positive_int, default=1000)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--restarts", type=_positive_int, default=3)
    p.add_argument("--init-points", default=None, help="CSV of starting points (warm start)")
    p.set_defaults(func=cmd_bary)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "isotest" and args.methods is None:
        args.methods = [args.bound]
    run = _Run(args, ["gwbounds", *argv])
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            args.func(args, run)
        nonconverged = [w for w in caught if issubclass(w.category, ConvergenceWarning)]
        for w in caught:
            if not issubclass(w.category, ConvergenceWarning):
                warnings.showwarning(w.message, w.category, w.filename, w.lineno)
        run.results["convergence_warnings"] = len(nonconverged)
        run.finish()
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GWBoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if nonconverged:
        print(f"error: {len(nonconverged)} solver call(s) did not converge: "
              f"{nonconverged[0].message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
