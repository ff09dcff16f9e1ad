"""Command-line interface: ``distreg {fit,select,simulate,evaluate,density}``.

Every report starts with ``#``-prefixed lines holding the fully resolved
configuration.  Exit codes come from :mod:`distreg.errors` (0 on success).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, kde
from .data import load_csv, standardize
from .errors import ArgumentError, DistregError, FileIOError
from .optim import OptimOptions
from .regress import DrConfig, fit
from .sim import CASES, ERROR_KINDS, ErrorDist, ScenarioSpec, SimConfig, run_replications
from .sparse import PenaltyConfig, select_lambda
from .workflow import emit_density, evaluate

log = logging.getLogger("distreg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def _bandwidth(text: str):
    if text in ("plugin", "silverman"):
        return text
    if text.startswith("fixed:"):
        try:
            return float(text.split(":", 1)[1])
        except ValueError:
            pass
    raise ArgumentError(f"--bandwidth must be plugin, silverman or fixed:H, got {text!r}")


def _methods(text: str) -> list[str]:
    text = text.lower()
    if text == "all":
        return ["DR", "MR", "QR"]
    out = [m.strip().upper() for m in text.split(",") if m.strip()]
    if not out or any(m not in ("DR", "MR", "QR") for m in out):
        raise ArgumentError(f"--method must be dr, mr, qr, all or a comma list, got {text!r}")
    return out


def _lambda_grid(text: str):
    if text == "auto":
        return None
    try:
        return tuple(sorted(float(v) for v in text.split(",") if v.strip()))
    except ValueError:
        raise ArgumentError(f"--lambda-grid must be 'auto' or comma-separated numbers, got {text!r}")


def _add_data(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--response", default="y", help="response column name or 0-based index")


def _add_dr(p):
    p.add_argument("--kernel", default=kde.GAUSSIAN, choices=kde.KERNELS)
    p.add_argument("--bandwidth", default="plugin", help="plugin | silverman | fixed:H")
    p.add_argument("--intercept", default="mean", choices=("mean", "median"))
    p.add_argument("--init", default="median_regression", choices=("median_regression", "ols", "zeros"))
    p.add_argument("--iterate-bandwidth", type=int, default=0, metavar="K")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--tau", type=float, default=0.5, help="quantile level of the QR baseline")


def _add_penalty(p):
    p.add_argument("--lambda-grid", default="auto", help="auto or comma-separated values")
    p.add_argument("--n-lambda", type=int, default=50)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--weight-mode", default="eq9", choices=("eq9", "fixed"))
    p.add_argument("--gic-intercept", action="store_true",
                   help="include the intercept in the GIC residual variance")


def _add_output(p):
    p.add_argument("--output", default="-", help="report path ('-' for stdout)")
    p.add_argument("--format", default="csv", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distreg", description="Kernel-likelihood distribution regression.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="seed for restarts and simulations")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit DR / MR / QR on a CSV file")
    _add_data(p)
    p.add_argument("--method", default="dr")
    p.add_argument("--standardize", action="store_true")
    _add_dr(p)
    _add_output(p)

    p = sub.add_parser("select", help="adaptive-LASSO path with GIC selection")
    _add_data(p)
    p.add_argument("--method", default="dr")
    p.add_argument("--standardize", action="store_true")
    _add_dr(p)
    _add_penalty(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo replication of a simulation design")
    p.add_argument("--case", required=True, choices=CASES)
    p.add_argument("--dist", required=True, choices=ERROR_KINDS)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--method", default="all")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--gamma-param", default="scale", choices=("scale", "rate"))
    p.add_argument("--fixed-q", action="store_true", help="draw Case 2/3 slope offsets once")
    _add_dr(p)
    _add_penalty(p)
    _add_output(p)

    p = sub.add_parser("evaluate", help="held-out prediction error on the last ceil(n/9) rows")
    _add_data(p)
    p.add_argument("--method", default="all")
    p.add_argument("--split", default="last9", choices=("last9", "none"))
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--sparse", default="auto", choices=("auto", "always", "never"))
    p.add_argument("--original-units", action="store_true",
                   help="report coefficients on the raw predictor scale")
    _add_dr(p)
    _add_penalty(p)
    _add_output(p)

    p = sub.add_parser("density", help="KDE curve of a column or of fitted residuals")
    p.add_argument("--input", required=True)
    p.add_argument("--column", help="raw column to smooth")
    p.add_argument("--residuals", choices=("dr", "mr", "qr"), help="smooth residuals of this fit")
    p.add_argument("--response", default="y")
    p.add_argument("--output", required=True, help="density CSV path")
    _add_dr(p)
    return parser


def _drcfg(args) -> DrConfig:
    opts = OptimOptions(max_iter=args.max_iter, restarts=args.restarts, seed=args.seed)
    return DrConfig(kernel=args.kernel, bandwidth=_bandwidth(args.bandwidth), init=args.init,
                    optim=opts, intercept=args.intercept, iterate_bandwidth=args.iterate_bandwidth)


def _penalty(args) -> PenaltyConfig:
    return PenaltyConfig(gamma=args.gamma, lambda_grid=_lambda_grid(args.lambda_grid),
                         n_lambda=args.n_lambda, weight_mode=args.weight_mode,
                         gic_intercept=args.gic_intercept)


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose", "workers")}


def _emit(args, header: dict, table: list[dict], extra: dict | None = None) -> None:
    if args.format == "json":
        text = json.dumps({"config": header, "rows": table, **(extra or {})},
                          indent=1, sort_keys=True, default=_json_default) + "\n"
    else:
        lines = [f"# {line}" for line in
                 json.dumps(header, indent=1, sort_keys=True, default=_json_default).splitlines()]
        cols = list(table[0]) if table else []
        lines.append(",".join(cols))
        for row in table:
            lines.append(",".join(_cell(row[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
        return
    try:
        with open(args.output, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise FileIOError(f"cannot write {args.output}: {exc}") from exc


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    return str(o)


def _load(args):
    d = load_csv(args.input, args.response)
    tr = None
    if getattr(args, "standardize", False):
        d, tr = standardize(d)
    return d, tr


def cmd_fit(args) -> None:
    d, tr = _load(args)
    cfg = _drcfg(args)
    header = {"command": "fit", "args": _resolved(args), "dr": cfg.describe(),
              "n": d.n, "p": d.p, "dropped_rows": d.dropped_rows,
              "standardization": "sample variance (n-1)" if tr else "none"}
    rows = []
    for m in _methods(args.method):
        r = fit(d, m, cfg, args.tau)
        terms = [("intercept", r.intercept)] + list(zip(d.feature_names, r.beta))
        rows.extend({"method": m, "term": t, "estimate": float(v)} for t, v in terms)
        if r.method == "DR":
            rows.append({"method": m, "term": "loglik", "estimate": float(r.loglik)})
            rows.append({"method": m, "term": "bandwidth", "estimate": float(r.h_used.h)})
            rows.append({"method": m, "term": "converged", "estimate": float(r.optim.converged)})
    _emit(args, header, rows)


def cmd_select(args) -> None:
    d, tr = _load(args)
    cfg, pen = _drcfg(args), _penalty(args)
    header = {"command": "select", "args": _resolved(args), "dr": cfg.describe(),
              "penalty": asdict(pen), "n": d.n, "p": d.p, "dropped_rows": d.dropped_rows}
    rows = []
    for m in _methods(args.method):
        path = select_lambda(d, pen, cfg, method=m)
        for k, f in enumerate(path.fits):
            rows.append({"method": m, "lambda": float(f.lambda_), "gic": float(f.gic),
                         "s_lambda": f.s_lambda, "selected": int(k == path.selected),
                         "converged": int(f.converged), "intercept": float(f.intercept),
                         **{name: float(b) for name, b in zip(d.feature_names, f.beta)}})
    _emit(args, header, rows)


def cmd_simulate(args) -> None:
    spec = ScenarioSpec(args.case, ErrorDist(args.dist, args.gamma_param), n=args.n, p=args.p,
                        reps=args.reps, seed=args.seed, fixed_q=args.fixed_q)
    sc = SimConfig(_drcfg(args), _penalty(args), args.tau)
    report = run_replications(spec, _methods(args.method), sc, workers=args.workers)
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.output == "-":
        sys.stdout.write(text)
        return
    try:
        with open(args.output, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise FileIOError(f"cannot write {args.output}: {exc}") from exc


def cmd_evaluate(args) -> None:
    d = load_csv(args.input, args.response)
    cfg, pen = _drcfg(args), _penalty(args)
    sparse = {"auto": None, "always": True, "never": False}[args.sparse]
    rep = evaluate(d, _methods(args.method), cfg, pen, args.standardize, args.split, sparse, args.tau)
    header = {"command": "evaluate", "args": _resolved(args), "dr": cfg.describe(),
              "n": d.n, "p": d.p, "dropped_rows": d.dropped_rows,
              "n_train": rep.n_train, "n_test": rep.n_test, "sparse": rep.sparse,
              "standardization": "sample variance (n-1), before the split" if args.standardize
              else "none"}
    rows = [{"method": m, "quantity": "PE", "term": "", "value": float(v)} for m, v in rep.pe.items()]
    rows += [{"method": m, "quantity": "coefficient", "term": t, "value": v}
             for m, t, v in rep.coefficient_table(args.original_units)]
    rows += [{"method": m, "quantity": "lambda", "term": "", "value": float(v)}
             for m, v in rep.lambdas.items()]
    _emit(args, header, rows)


def cmd_density(args) -> None:
    if (args.column is None) == (args.residuals is None):
        raise ArgumentError("give exactly one of --column or --residuals")
    if args.column is not None:
        d = load_csv(args.input, args.column, predictors=[])
        values, what = d.Y, f"column {args.column}"
    else:
        d = load_csv(args.input, args.response)
        r = fit(d, args.residuals, _drcfg(args), args.tau)
        values, what = r.residuals, f"{args.residuals.upper()} residuals"
    rows = emit_density(values, args.output, args.kernel,
                        header={"command": "density", "source": what, "input": args.input})
    log.info("wrote %d density points to %s", rows, args.output)


COMMANDS = {"fit": cmd_fit, "select": cmd_select, "simulate": cmd_simulate,
            "evaluate": cmd_evaluate, "density": cmd_density}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ArgumentError as exc:
        print(f"distreg: error: {exc}", file=sys.stderr)
        return exc.exit_code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except DistregError as exc:
        print(f"distreg: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
