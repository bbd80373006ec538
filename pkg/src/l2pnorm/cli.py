"""Command-line front end.

Subcommands::

    l2pnorm solve            solve min ||Y||_{2,p}^p s.t. MY = B from CSV files
    l2pnorm select           standardise, fit, rank and select features per p
    l2pnorm trace-plot-data  merge trace CSVs into long format (p, k, rho)
    l2pnorm synth            write a planted synthetic classification dataset

Exit codes: 0 success, 1 usage or input error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .data_io import atomic_write_text, load_csv, standardize, to_design_matrices, write_csv, Dataset
from .errors import L2pError
from .norms import DEFAULT_EPSILON, DegeneratePolicy, check_exponent
from .regression import RegressionProblem, solve_regression
from .selection import rank_features, select_top_k, support_recovery_rate
from .solver import ConstrainedProblem, SolverConfig, SolverTrace, solve
from .synthetic import planted_classification

log = logging.getLogger("l2pnorm")

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2
OUT_DIR_ENV = "L2PNORM_OUT_DIR"
DEFAULT_P_GRID = (0.25, 0.5, 0.75, 1.0)
DEFAULT_K_GRID = (20, 40, 60, 80)
TRACE_COLUMNS = ("k", "objective", "rho", "kkt_residual", "zero_row_count")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def p_tag(p: float) -> str:
    return f"p{p:g}"


# ---------------------------------------------------------------- file helpers


def read_matrix(path) -> np.ndarray:
    """Headerless numeric CSV, one matrix row per line."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix {path}: {exc}") from None
    if arr.size == 0:
        raise UsageError(f"matrix file {path} is empty")
    return arr


def matrix_text(a: np.ndarray) -> str:
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in a)


def trace_text(trace: SolverTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace:
        w.writerow([r.k, _fmt(r.objective), _fmt(r.rho), _fmt(r.kkt_residual), r.zero_row_count])
    return buf.getvalue()


def read_trace(path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read trace {path}: {exc}") from None
    if not rows:
        raise UsageError(f"trace {path} has no records")
    missing = {"k", "rho"} - set(rows[0])
    if missing:
        raise UsageError(f"trace {path} lacks column(s) {sorted(missing)}")
    try:
        return [{"k": int(r["k"]), "rho": float(r["rho"])} for r in rows]
    except (TypeError, ValueError):
        raise UsageError(f"trace {path} has a malformed record") from None


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, command: str, params: dict, inputs: list[str]):
    manifest = {
        "command": command,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "inputs": {p: _sha256(p) for p in inputs},
        "params": params,
        "out_dir": str(out_dir),
    }
    atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_manifest(path, command):
    try:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest {path}: {exc}") from None
    if manifest.get("command") != command:
        raise UsageError(f"manifest {path} is for {manifest.get('command')!r}, not {command!r}")
    for name, digest in manifest.get("inputs", {}).items():
        if Path(name).exists() and _sha256(name) != digest:
            log.warning("input %s changed since the manifest was written", name)
    return manifest["params"]


def _out_dir(value) -> Path:
    out = Path(value or os.environ.get(OUT_DIR_ENV) or "l2pnorm-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(params) -> SolverConfig:
    return SolverConfig(
        max_iters=params["max_iters"],
        tol_rho=params["tol"],
        epsilon=params["epsilon"],
        degenerate_policy=params["policy"],
    )


def _p_values(values):
    ps = list(values) if values else list(DEFAULT_P_GRID)
    try:
        return [check_exponent(p) for p in ps]
    except L2pError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- commands


def _solver_params(args):
    return {
        "p": _p_values(args.p),
        "tol": args.tol,
        "max_iters": args.max_iters,
        "epsilon": args.epsilon,
        "policy": DegeneratePolicy(args.policy).value,
        "seed": args.seed,
    }


def cmd_solve(args) -> int:
    if args.manifest:
        params = _load_manifest(args.manifest, "solve")
    else:
        if not (args.M and args.B):
            raise UsageError("solve needs --M and --B (or --manifest)")
        params = {"M": args.M, "B": args.B, **_solver_params(args)}
    out = _out_dir(args.out_dir)
    M, B = read_matrix(params["M"]), read_matrix(params["B"])
    config = _config(params)
    all_converged = True
    for p in params["p"]:
        try:
            problem = ConstrainedProblem(M, B, p)
        except L2pError as exc:
            raise UsageError(str(exc)) from None
        sol = solve(problem, config)
        tag = p_tag(p)
        atomic_write_text(out / f"solution_{tag}.csv", matrix_text(sol.Y))
        atomic_write_text(out / f"multiplier_{tag}.csv", matrix_text(sol.lam))
        atomic_write_text(out / f"trace_{tag}.csv", trace_text(sol.trace))
        log.info("p=%g: %s after %d iterations, objective %.10g",
                 p, "converged" if sol.converged else "NOT converged", sol.iterations, sol.objective)
        all_converged &= sol.converged
    _write_manifest(out, "solve", params, [params["M"], params["B"]])
    return EXIT_OK if all_converged else EXIT_NONCONVERGED


def _parse_support(text):
    if not text:
        return None
    try:
        return sorted({int(t) for t in re.split(r"[,\s]+", text.strip()) if t})
    except ValueError:
        raise UsageError(f"bad --true-support {text!r}") from None


def cmd_select(args) -> int:
    if args.manifest:
        params = _load_manifest(args.manifest, "select")
    else:
        if not args.data:
            raise UsageError("select needs --data (or --manifest)")
        params = {
            "data": args.data,
            "label_column": args.label_column,
            "delimiter": args.delimiter,
            "gamma": args.gamma,
            "k": sorted(set(args.k or DEFAULT_K_GRID)),
            "bias": args.bias,
            "ddof": args.ddof,
            "true_support": _parse_support(args.true_support),
            **_solver_params(args),
        }
    out = _out_dir(args.out_dir)
    if not params["gamma"] > 0:
        raise UsageError("--gamma must be positive")

    ds = load_csv(params["data"], label_column=params["label_column"], delimiter=params["delimiter"])
    d = ds.n_features
    bad_k = [k for k in params["k"] if not 1 <= k <= d]
    if bad_k:
        raise UsageError(f"--k values {bad_k} outside the valid range [1, {d}]")
    support = params["true_support"]
    if support is not None and any(not 0 <= j < d for j in support):
        raise UsageError(f"--true-support indices must lie in [0, {d})")

    ds = standardize(ds, ddof=params["ddof"])
    atomic_write_text(out / "standardization.txt", ds.standardization.to_text())
    A, B = to_design_matrices(ds, include_bias=params["bias"])
    names = ds.feature_names or tuple(f"f{j}" for j in range(d))
    config = _config(params)

    summary = io.StringIO()
    sw = csv.writer(summary, lineterminator="\n")
    sw.writerow(["p", "k", "recovery_rate", "selected_score_sum", "objective", "iterations", "converged"])
    all_converged = True
    for p in params["p"]:
        rp = RegressionProblem(A, B, params["gamma"], p, include_bias=params["bias"])
        fit = solve_regression(rp, config)
        sol = fit.solver_solution
        all_converged &= sol.converged
        ranking = rank_features(fit.X, bias_row=rp.bias_row)
        tag = p_tag(p)

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "feature_index", "feature_name", "score"])
        for rank, (j, score) in enumerate(ranking, start=1):
            w.writerow([rank, j, names[j], _fmt(score)])
        atomic_write_text(out / f"ranking_{tag}.csv", buf.getvalue())

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "selected"])
        for k in params["k"]:
            chosen = select_top_k(ranking, k)
            w.writerow([k, " ".join(map(str, chosen))])
            rate = "" if support is None else _fmt(support_recovery_rate(chosen, support))
            sw.writerow([f"{p:g}", k, rate, _fmt(ranking.scores[:k].sum()),
                         _fmt(fit.objective), sol.iterations, int(sol.converged)])
        atomic_write_text(out / f"topk_{tag}.csv", buf.getvalue())
        atomic_write_text(out / f"trace_{tag}.csv", trace_text(sol.trace))
        log.info("p=%g: objective %.10g, %d iterations", p, fit.objective, sol.iterations)

    atomic_write_text(out / "summary.csv", summary.getvalue())
    _write_manifest(out, "select", params, [params["data"]])
    return EXIT_OK if all_converged else EXIT_NONCONVERGED


def cmd_trace_plot_data(args) -> int:
    if args.p and len(args.p) != len(args.traces):
        raise UsageError("give one --p per trace file, or none to infer p from file names")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "k", "rho"])
    for i, path in enumerate(args.traces):
        if args.p:
            p = args.p[i]
        else:
            m = re.search(r"p(\d+(?:\.\d+)?)", Path(path).stem)
            if not m:
                raise UsageError(f"cannot infer p from {path}; pass --p")
            p = float(m.group(1))
        for rec in read_trace(path):
            w.writerow([f"{p:g}", rec["k"], _fmt(rec["rho"])])
    out = Path(args.out) if args.out else _out_dir(None) / "trace_plot_data.csv"
    atomic_write_text(out, buf.getvalue())
    return EXIT_OK


def cmd_synth(args) -> int:
    feats, labels, support = planted_classification(
        n=args.n, d=args.d, classes=args.classes, support_size=args.support_size,
        shift=args.shift, seed=args.seed,
    )
    ds = Dataset(
        features=feats,
        labels=labels,
        class_names=tuple(str(c) for c in range(args.classes)),
        feature_names=tuple(f"g{j}" for j in range(args.d)),
    )
    write_csv(ds, args.out)
    if args.support_out:
        atomic_write_text(args.support_out, ",".join(map(str, support)) + "\n")
    print(",".join(map(str, support)))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_solver_flags(sp):
    sp.add_argument("--p", type=float, action="append", help="exponent in (0, 1]; repeatable")
    sp.add_argument("--tol", type=float, default=1e-8, help="stop when |rho_k| <= tol")
    sp.add_argument("--max-iters", type=int, default=100)
    sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    sp.add_argument("--policy", choices=[m.value for m in DegeneratePolicy], default="smoothed")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./l2pnorm-out)")
    sp.add_argument("--manifest", help="rerun from a manifest.json written by a previous run")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="l2pnorm", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve min ||Y||_{2,p}^p s.t. MY = B")
    sp.add_argument("--M", help="headerless CSV, n x m")
    sp.add_argument("--B", help="headerless CSV, n x c")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("select", help="feature selection over a grid of p")
    sp.add_argument("--data", help="labelled CSV with header")
    sp.add_argument("--label-column", default="label", help="label column name or index")
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--k", type=int, action="append", help="top-k size; repeatable")
    sp.add_argument("--bias", action=argparse.BooleanOptionalAction, default=False)
    sp.add_argument("--ddof", type=int, choices=[0, 1], default=1,
                    help="standard deviation denominator n - ddof")
    sp.add_argument("--true-support", help="comma-separated planted feature indices")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("trace-plot-data", help="merge traces into (p, k, rho) rows")
    sp.add_argument("traces", nargs="+")
    sp.add_argument("--p", type=float, action="append")
    sp.add_argument("--out", help="merged CSV path")
    sp.set_defaults(func=cmd_trace_plot_data)

    sp = sub.add_parser("synth", help="write a planted synthetic dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--n", type=int, default=60)
    sp.add_argument("--d", type=int, default=200)
    sp.add_argument("--classes", type=int, default=3)
    sp.add_argument("--support-size", type=int, default=5)
    sp.add_argument("--shift", type=float, default=3.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--support-out")
    sp.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, L2pError) as exc:
        print(f"l2pnorm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
