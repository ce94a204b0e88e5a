"""Command-line interface: run one episode, run a suite, or plot a results CSV.

A JSON config file may supply any of the experiment keys (same names as the
long flags, with underscores); explicit flags override the file.  Exit codes:
0 success, 2 configuration error, 3 one or more episodes failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, DecintError
from .fitting import FitConfig
from .harness import (
    ExperimentConfig,
    aggregate_records,
    emit_csv,
    expand_grid,
    parse_csv,
    run_episode,
    run_suite,
    write_csv,
)
from .pdc import PdcConfig
from .plotting import render_suite_figures
from .scm import NoiseMode, Scenario
from .strategies import StrategyKind

_SCENARIOS = [s.value for s in Scenario]
_STRATEGIES = [s.value for s in StrategyKind]
_NOISE_MODES = [m.value for m in NoiseMode]


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file supplying any of these keys")
    p.add_argument("--scenario", choices=_SCENARIOS)
    p.add_argument("--strategy", choices=_STRATEGIES)
    p.add_argument("--k0", type=float, help="decisive threshold for H0 (> 1)")
    p.add_argument("--k1", type=float, help="decisive threshold for H1 (in (0,1)); defaults to 1/k0")
    p.add_argument("--beta", type=float, help="indicator smoothing scale")
    p.add_argument("--mc-samples", type=int, help="Monte-Carlo draws per hypothesis")
    p.add_argument("--n-obs", type=int, help="observational sample size")
    p.add_argument("--budget", type=int, help="number of interventions")
    p.add_argument("--bounds", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--noise-mode", choices=_NOISE_MODES)
    p.add_argument("--seeds", type=int, help="use seeds 0..N-1")
    p.add_argument("--seed-list", type=int, nargs="+", help="explicit seed values")
    p.add_argument("--fit-components", type=int, help="mixture components in the fits")
    p.add_argument("--out", type=Path, help="output CSV path")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decint",
        description="Active intervention selection for bivariate causal hypothesis testing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single episode and emit its CSV")
    _add_experiment_flags(run)

    suite = sub.add_parser(
        "suite", help="run a grid of episodes, write CSV and figures"
    )
    _add_experiment_flags(suite)
    suite.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    suite.add_argument(
        "--no-plots", action="store_true", help="skip figure rendering next to the CSV"
    )

    plot = sub.add_parser("plot", help="render figures from an existing results CSV")
    plot.add_argument("csv", type=Path)
    plot.add_argument("--out-dir", type=Path, default=None, help="defaults next to the CSV")
    plot.add_argument("--fmt", default="pdf", choices=["pdf", "svg"])
    return parser


def _load_config_file(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _setting(args: argparse.Namespace, file_cfg: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_cfg:
        return file_cfg[key]
    return default


def _experiment_config(
    args: argparse.Namespace, require_single: bool, file_cfg: dict | None = None
) -> ExperimentConfig:
    if file_cfg is None:
        file_cfg = _load_config_file(args.config)
    scenario = _setting(args, file_cfg, "scenario")
    strategy = _setting(args, file_cfg, "strategy")
    if require_single and scenario is None:
        raise ConfigError("run requires --scenario")
    if require_single and strategy is None:
        raise ConfigError("run requires --strategy")

    k0 = float(_setting(args, file_cfg, "k0", 10.0))
    k1_raw = _setting(args, file_cfg, "k1")
    k1 = float(k1_raw) if k1_raw is not None else 1.0 / k0
    pdc = PdcConfig(
        k0=k0,
        k1=k1,
        beta=float(_setting(args, file_cfg, "beta", 0.2)),
        n_mc=int(_setting(args, file_cfg, "mc_samples", 4096)),
    )
    fit = FitConfig(n_components=int(_setting(args, file_cfg, "fit_components", 3)))

    seeds = _setting(args, file_cfg, "seed_list")
    if seeds is None:
        n_seeds = _setting(args, file_cfg, "seeds")
        seeds = tuple(range(int(n_seeds))) if n_seeds is not None else None

    bounds = _setting(args, file_cfg, "bounds", (-5.0, 5.0))
    try:
        cfg = ExperimentConfig(
            scenario=Scenario(scenario) if scenario else Scenario.EFFECT_TO_CAUSE,
            strategy=StrategyKind(strategy) if strategy else StrategyKind.PDC_MAX,
            pdc=pdc,
            fit=fit,
            n_obs=int(_setting(args, file_cfg, "n_obs", 5000)),
            budget=int(_setting(args, file_cfg, "budget", 50)),
            bounds=(float(bounds[0]), float(bounds[1])),
            noise_mode=NoiseMode(_setting(args, file_cfg, "noise_mode", "fixed")),
            seeds=tuple(int(s) for s in seeds) if seeds is not None else ExperimentConfig().seeds,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _experiment_config(args, require_single=True)
    records = run_episode(cfg, cfg.seeds[0])
    if args.out is not None:
        write_csv(records, args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(emit_csv(records).decode("utf-8"))
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    base = _experiment_config(args, require_single=False, file_cfg=file_cfg)
    scenarios = [base.scenario] if (args.scenario or "scenario" in file_cfg) else list(Scenario)
    strategies = [base.strategy] if (args.strategy or "strategy" in file_cfg) else list(StrategyKind)
    configs = expand_grid(scenarios, strategies, base)
    result = run_suite(configs, jobs=max(1, args.jobs))

    out = args.out if args.out is not None else Path("results.csv")
    write_csv(result.records, out)
    print(f"wrote {out} ({len(result.records)} rows)")
    if not args.no_plots:
        paths = render_suite_figures(result.aggregates, out.parent, stem=out.stem)
        for p in paths:
            print(f"wrote {p}")
    if result.failures:
        for f in result.failures:
            print(
                f"episode failed: scenario={f.scenario} strategy={f.strategy} "
                f"k0={f.k0:g} seed={f.seed}: {f.error}",
                file=sys.stderr,
            )
        return 3
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    records = parse_csv(args.csv)
    aggregates = aggregate_records(records)
    out_dir = args.out_dir if args.out_dir is not None else args.csv.parent
    paths = render_suite_figures(aggregates, out_dir, stem=args.csv.stem, fmt=args.fmt)
    for p in paths:
        print(f"wrote {p}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "suite":
            return _cmd_suite(args)
        return _cmd_plot(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DecintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
