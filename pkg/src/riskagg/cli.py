"""Command-line interface: ``riskagg <subcommand> ...``.

Exit codes: 0 success, 1 data or domain error (including fits that fail to
converge), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import aggregate, collective, inference, montecarlo
from .aggregate import AggregateModel
from .collective import FAMILIES
from .data import ClaimDataset, PolicyRecord, describe, load_csv, write_csv
from .exceptions import ConvergenceError, DatasetError, DomainError, MomentDoesNotExistError

DEFAULT_SEED = 20160315
SEED_ENV = "RISKAGG_SEED"

# Column order of tail tables.
TAIL_TABLE_ORDER = (
    "poisson-exponential",
    "poisson-pareto",
    "geometric-exponential",
    "geometric-pareto",
    "negbin-exponential",
    "negbin-pareto",
    "logarithmic-pareto",
    "logarithmic-exponential",
)

PARAMS_HELP = """\
parameter files are flat key=value text, one entry per line, keys written
as <family>.<param>; '#' starts a comment. Example:

  poisson-pareto.lam   = 0.07058
  poisson-pareto.alpha = 2.04828
  poisson-pareto.beta  = 2.13071

Inline form: --params "poisson-pareto:lam=0.07058,alpha=2.04828,beta=2.13071"
(repeat --params for several models).
"""

DATA_HELP = """\
input CSV: UTF-8 with header policy_id,num_claims,total_amount; one row per
policy; total_amount must be 0 when num_claims is 0.
"""


class UsageError(Exception):
    pass


def format_value(v: float) -> str:
    """Six significant digits; scientific notation below 1e-4."""
    if v != 0 and abs(v) < 1e-4:
        return f"{v:.5E}"
    return f"{v:.6g}"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def parse_grid(text: str) -> np.ndarray:
    """``"1..20"``, ``"0,0.5,1"`` or mixtures such as ``"0,1..5"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = float(lo), float(hi)
            out.extend(np.arange(lo, hi + 0.5, 1.0))
        else:
            out.append(float(part))
    if not out:
        raise UsageError(f"empty grid {text!r}")
    return np.array(out, dtype=float)


def _parse_kv(text, where):
    key, sep, value = text.partition("=")
    if not sep:
        raise UsageError(f"{where}: expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise UsageError(f"{where}: {value.strip()!r} is not a number") from None


def parse_params(entries) -> dict:
    """Read ``{family: {param: value}}`` from files or inline strings."""
    models: dict = {}
    for entry in entries:
        path = Path(entry)
        if path.is_file():
            for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, value = _parse_kv(line, f"{path}:{lineno}")
                family, dot, name = key.rpartition(".")
                if not dot:
                    raise UsageError(f"{path}:{lineno}: key must be <family>.<param>")
                models.setdefault(family, {})[name] = value
        else:
            family, colon, body = entry.partition(":")
            if not colon:
                raise UsageError(f"{entry!r} is neither a file nor family:key=value,...")
            entries = models.setdefault(family.strip(), {})
            for item in body.split(","):
                if item.strip():
                    k, v = _parse_kv(item, family)
                    entries[k] = v
    for family in models:
        if family not in FAMILIES:
            raise UsageError(f"unknown model {family!r}; choose from {', '.join(FAMILIES)}")
    return models


def build_models(entries) -> dict:
    parsed = parse_params(entries)
    ordered = sorted(parsed, key=TAIL_TABLE_ORDER.index)
    return {f: collective.make_model(f, parsed[f]) for f in ordered}


def _model_from_flags(args):
    """Individual model or a compound family from --n/--alpha/... flags."""
    if args.model == "individual":
        if args.n is None or args.alpha is None or args.beta is None:
            raise UsageError("individual model needs --n, --alpha and --beta")
        return AggregateModel(args.n, args.alpha, args.beta)
    if args.model not in FAMILIES:
        raise UsageError(f"unknown model {args.model!r}")
    names = collective.family_param_names(args.model)
    missing = [k for k in names if getattr(args, k) is None]
    if missing:
        raise UsageError(f"{args.model} needs " + ", ".join(f"--{k}" for k in missing))
    return collective.make_model(args.model, {k: getattr(args, k) for k in names})


# -- subcommands ---------------------------------------------------------------

def cmd_fit(args, out):
    if args.models.strip() == "all":
        families = list(inference.DEFAULT_FAMILIES)
    else:
        families = [m.strip() for m in args.models.split(",") if m.strip()]
        bad = [m for m in families if m not in FAMILIES]
        if bad:
            raise UsageError(f"unknown model(s) {', '.join(bad)}; choose from {', '.join(FAMILIES)}")
    data = load_csv(args.data)
    amounts = data.amounts / args.scale
    results = [
        inference.fit_mle(f, amounts, n_restarts=args.restarts, random_state=args.seed)
        for f in families
    ]
    ranked = inference.rank_models(results)
    if args.format == "csv":
        writer = csv.DictWriter(out, fieldnames=inference.ROW_FIELDS, lineterminator="\n")
        writer.writeheader()
        for r in ranked:
            writer.writerow(r.to_row())
    elif args.format == "report":
        out.write("\n\n".join(r.to_report() for r in ranked) + "\n")
    else:
        out.write(inference.format_table(ranked) + "\n")
    return 0 if all(r.converged for r in results) else 1


def cmd_tailtable(args, out):
    models = build_models(args.params)
    if not models:
        raise UsageError("no models given")
    xs = parse_grid(args.x)
    if np.any(xs < 0):
        raise DomainError("x values must be nonnegative")
    columns = {f: np.atleast_1d(collective.compound_sf(m, xs)) for f, m in models.items()}
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", *columns])
    for i, x in enumerate(xs):
        writer.writerow([f"{x:g}", *(format_value(c[i]) for c in columns.values())])
    return 0


def cmd_curve(args, out):
    model = _model_from_flags(args)
    if args.points < 2 or not args.xmax > 0:
        raise UsageError("need --points >= 2 and --xmax > 0")
    xs = np.linspace(args.xmax / args.points, args.xmax, args.points)
    if isinstance(model, AggregateModel):
        fn = {"pdf": aggregate.pdf, "cdf": aggregate.cdf, "sf": aggregate.sf}[args.what]
        values = fn(xs, model)
        atom = 0.0
    else:
        fn = {
            "pdf": collective.compound_pdf,
            "cdf": collective.compound_cdf,
            "sf": collective.compound_sf,
        }[args.what]
        values = fn(model, xs)
        atom = collective.compound_atom0(model)
    out.write(f"# model={args.model} what={args.what} atom0={format_value(atom)}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", args.what])
    for x, v in zip(xs, np.atleast_1d(values)):
        writer.writerow([repr(float(x)), repr(float(v))])
    return 0


def cmd_var(args, out):
    if args.model != "individual":
        raise UsageError("var supports --model individual only")
    model = _model_from_flags(args)
    us = parse_grid(args.u)
    if np.any(~((us > 0) & (us < 1))):
        raise DomainError("every level u must lie in (0, 1)")
    var = np.atleast_1d(aggregate.value_at_risk(model, us))
    if args.tvar and not model.alpha > 1:
        raise MomentDoesNotExistError(
            f"TVaR does not exist for alpha = {model.alpha:g} <= 1 (infinite mean)"
        )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["u", "var", "tvar"] if args.tvar else ["u", "var"])
    for i, u in enumerate(us):
        row = [f"{u:g}", repr(float(var[i]))]
        if args.tvar:
            row.append(repr(float(aggregate.tail_value_at_risk(model, u))))
        writer.writerow(row)
    return 0


def cmd_simulate(args, out):
    model = _model_from_flags(args)
    if args.draws < 1:
        raise UsageError("--draws must be >= 1")
    rng = np.random.default_rng(args.seed)
    if isinstance(model, AggregateModel):
        counts = np.full(args.draws, model.n)
        sample = aggregate.sample_sum(model, rng, args.draws)
    else:
        # same stream order as collective.sample_compound, keeping the counts
        counts = np.asarray(model.primary.sample(rng, args.draws))
        sample = model.secondary.sample_sums(counts, rng)
    if args.raw:
        records = (
            PolicyRecord(i + 1, int(k), float(v)) for i, (k, v) in enumerate(zip(counts, sample))
        )
        write_csv(ClaimDataset(records), out)
        return 0
    if isinstance(model, AggregateModel):
        summary = montecarlo.summarize_individual(model, sample)
    else:
        summary = montecarlo.summarize_compound(model, sample)
    out.write(f"model={args.model}\nseed={args.seed}\n{summary.to_text()}\n")
    return 0


def cmd_describe(args, out):
    data = load_csv(args.data)
    out.write(describe(data.scaled(args.scale) if args.scale != 1 else data).to_text() + "\n")
    return 0


# -- parser ------------------------------------------------------------------------

def _add_model_flags(p):
    p.add_argument("--model", required=True, help="'individual' or one of: " + ", ".join(FAMILIES))
    p.add_argument("--n", type=int, help="number of risks (individual model)")
    for name, doc in (
        ("alpha", "claim shape (Pareto) or rate (exponential)"),
        ("beta", "claim scale (Pareto)"),
        ("lam", "Poisson mean"),
        ("r", "negative binomial size"),
        ("p", "negative binomial / geometric probability"),
        ("theta", "logarithmic parameter"),
    ):
        p.add_argument(f"--{name}", type=float, help=doc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskagg",
        description="Aggregate loss distributions for dependent Pareto claims.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"The default seed is {DEFAULT_SEED}; set {SEED_ENV} to override.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    raw = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("fit", help="fit compound models by maximum likelihood", epilog=DATA_HELP, formatter_class=raw)
    p.add_argument("--data", required=True, help="claims CSV")
    p.add_argument("--models", default="all", help="comma-separated families or 'all'")
    p.add_argument("--scale", type=float, default=1.0, help="divide amounts by this (e.g. 1000)")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("table", "csv", "report"), default="table")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("tailtable", help="right-tail probabilities P(S > x)", epilog=PARAMS_HELP, formatter_class=raw)
    p.add_argument("--params", action="append", required=True, help="parameter file or inline family:key=value,...")
    p.add_argument("--x", default="1..20", help="grid, e.g. 1..20 or 0,0.5,1")
    p.set_defaults(func=cmd_tailtable)

    p = sub.add_parser("curve", help="evaluate pdf/cdf/sf on a grid (CSV)")
    _add_model_flags(p)
    p.add_argument("--what", choices=("pdf", "cdf", "sf"), default="pdf")
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("var", help="value at risk and tail value at risk")
    _add_model_flags(p)
    p.add_argument("--u", required=True, help="levels, e.g. 0.9,0.99")
    p.add_argument("--no-tvar", dest="tvar", action="store_false")
    p.set_defaults(func=cmd_var)

    p = sub.add_parser("simulate", help="Monte Carlo draws with a KS check")
    _add_model_flags(p)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--raw", action="store_true", help="print the draws as a claims CSV (readable by fit) instead of a summary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("describe", help="descriptive statistics of a claims CSV", epilog=DATA_HELP, formatter_class=raw)
    p.add_argument("--data", required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_describe)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", "absent") is None:
            args.seed = default_seed()
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"riskagg: error: {exc}", file=sys.stderr)
        return 2
    except (DatasetError, DomainError, MomentDoesNotExistError, ConvergenceError, OSError) as exc:
        print(f"riskagg: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"riskagg: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
