"""Command-line front end (``hara``).

Exit codes: 0 success, 1 configuration error, 2 numerical divergence,
3 verification failure.
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import sys
from typing import Iterable, Sequence

from .config import RunConfig
from .errors import ConfigError, DivergenceError, DomainError, HaraError
from .policy import EvalPoint, Power, gamma_sweep, policy_report, value_function
from .simulator import simulate
from .verify import default_gammas, format_checks, run_suite, suite_passed

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_VERIFY = 0, 1, 2, 3

PORTFOLIO_COLUMNS = ("t", "y", "x", "pi_hat", "pi_myopic", "hedging", "ratio", "value")
SWEEP_COLUMNS = ("t", "y", "x", "gamma", "pi_hat", "pi_myopic", "hedging", "ratio", "status")
SIM_COLUMNS = ("kind", "name", "mean", "std_error", "ci_low", "ci_high", "certainty_equivalent", "n", "violations")

DIVERGENT = "DIVERGENT"
OUT_OF_DOMAIN = "OUT_OF_DOMAIN"
NA = "NA"


def _cell(value, precision: int) -> str:
    if value is None:
        return NA
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return f"{value:.{precision}g}"  # str.format ignores locale


def render(columns: Sequence[str], rows: Iterable[Sequence], fmt: str, precision: int) -> str:
    cells = [[_cell(v, precision) for v in row] for row in rows]
    if fmt == "csv":
        return "\n".join([",".join(columns)] + [",".join(r) for r in cells]) + "\n"
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _eval_points(cfg: RunConfig):
    for t, y, x in itertools.product(cfg.eval.t, cfg.eval.y, cfg.eval.x):
        yield EvalPoint(t, x, y)


def _failure_code(exc: Exception) -> tuple[str, int]:
    if isinstance(exc, DomainError):
        return OUT_OF_DOMAIN, EXIT_CONFIG
    return DIVERGENT, EXIT_DIVERGENCE


# -- subcommands ------------------------------------------------------------------


def cmd_portfolio(cfg: RunConfig) -> tuple[list[str], list[list], int]:
    prior, mkt, util, quad = cfg.build_prior(), cfg.build_market(), cfg.build_utility(), cfg.build_quad()
    rows, code = [], EXIT_OK
    for pt in _eval_points(cfg):
        head = [pt.t, pt.y, pt.x]
        try:
            rep = policy_report(prior, util, mkt, pt, quad)
            value = value_function(prior, util, mkt, pt, quad)
            rows.append(head + [rep.pi_hat, rep.pi_myopic, rep.hedging_demand, rep.ratio, value])
        except HaraError as exc:
            mark, c = _failure_code(exc)
            code = max(code, c)
            rows.append(head + [mark] * 5)
    return list(PORTFOLIO_COLUMNS), rows, code


def cmd_sweep(cfg: RunConfig) -> tuple[list[str], list[list], int]:
    gammas = cfg.eval.gammas
    if gammas is None:
        raise ConfigError("eval.gammas", "required for sweep")
    if cfg.utility.family != "power":
        raise ConfigError("utility.family", "sweep runs over power utilities")
    prior, mkt, quad = cfg.build_prior(), cfg.build_market(), cfg.build_quad()
    for g in gammas:
        try:
            Power(g, cfg.utility.beta, cfg.utility.eta)
        except ValueError as exc:
            raise ConfigError("eval.gammas", f"gamma={g}: {exc}") from None
    rows, code = [], EXIT_OK
    for pt in _eval_points(cfg):
        for r in gamma_sweep(prior, mkt, pt, cfg.utility.eta, gammas, cfg.utility.beta, quad):
            status = "ok"
            if r.error is not None:
                status = OUT_OF_DOMAIN if r.error.startswith("DomainError") else DIVERGENT
                code = max(code, EXIT_CONFIG if status == OUT_OF_DOMAIN else EXIT_DIVERGENCE)
            rows.append([pt.t, pt.y, pt.x, r.gamma, r.pi_hat, r.pi_myopic, r.hedging, r.ratio, status])
    return list(SWEEP_COLUMNS), rows, code


def cmd_verify(cfg: RunConfig):
    prior, mkt, quad = cfg.build_prior(), cfg.build_market(), cfg.build_quad()
    gammas = cfg.eval.gammas if cfg.eval.gammas is not None else default_gammas()
    checks = run_suite(
        prior, mkt, cfg.eval.t, cfg.eval.x, cfg.eval.y, gammas, cfg.utility.eta, cfg.utility.beta, quad
    )
    return checks, EXIT_OK if suite_passed(checks) else EXIT_VERIFY


def cmd_simulate(cfg: RunConfig, seed: int | None = None):
    sim_cfg = cfg.build_sim(seed)
    report = simulate(sim_cfg)
    rows = []
    for name, s in report.strategies.items():
        rows.append(["strategy", name, s.mean_utility, s.std_error, None, None, s.certainty_equivalent, s.n_valid, s.violations])
    for name, p in report.paired.items():
        rows.append(["paired", name, p.mean, p.std_error, p.ci_low, p.ci_high, None, p.n, None])
    return report, list(SIM_COLUMNS), rows


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hara", description="Optimal HARA portfolios under a learned market price of risk.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("portfolio", "optimal and myopic portfolios at each eval point"),
        ("sweep", "power portfolios over the eval.gammas grid"),
        ("verify", "run the structural property checks"),
        ("simulate", "Monte Carlo comparison of strategies"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", help="write output here instead of stdout (overrides output.csv)")
        p.add_argument("--seed", type=int, help="overrides sim.seed")
        p.add_argument("--format", choices=("csv", "table"), default=None, help="csv (default when writing a file) or table")
    return parser


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
        if args.seed is not None:
            cfg = cfg.replace("sim", seed=args.seed)
        out = args.out or cfg.output.csv
        fmt = args.format or ("csv" if out else "table")
        prec = cfg.output.precision

        if args.command == "verify":
            checks, code = cmd_verify(cfg)
            if fmt == "csv":
                text = render(("check", "status", "detail"), [(c.name, c.status, c.detail) for c in checks], fmt, prec)
            else:
                text = format_checks(checks) + f"\n{'PASSED' if code == EXIT_OK else 'FAILED'}\n"
        elif args.command == "simulate":
            report, cols, rows = cmd_simulate(cfg, args.seed)
            text = render(cols, rows, fmt, prec)
            if cfg.output.paths_csv:
                report.write_paths_csv(cfg.output.paths_csv, prec)
            code = EXIT_OK
        else:
            cols, rows, code = (cmd_portfolio if args.command == "portfolio" else cmd_sweep)(cfg)
            text = render(cols, rows, fmt, prec)
        with _sink(out) as fh:
            fh.write(text)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, HaraError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
