"""Episode loop, multi-seed suites, and CSV emission.

One episode follows a fixed protocol: draw observational data from the
ground-truth environment, fit the two hypothesis-conditional models once,
start from a uniform hypothesis posterior, then for each of ``budget`` rounds
select an intervention with the configured strategy, record the estimated
decisive-and-correct probability at the chosen point, sample the outcome from
the real environment, and fold the new pair into the running log Bayes factor
and posterior.

Per-episode randomness is split into five labelled child streams (noise
specs + observational draws, interventional environment draws, fitting
restarts, Monte-Carlo noise, random-strategy draws) so that changing one
stage never perturbs another.  Episodes are independent and may run in
parallel; all outputs are deterministic functions of (config, seed).
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bayes import HypothesisPosterior, classify_evidence_log, point_log_bf
from .errors import ConfigError
from .fitting import FitConfig, FittedModels, fit_models
from .pdc import PdcConfig, draw_mc_noise, estimate_pdc, optimize_intervention
from .scm import (
    Dataset,
    DatasetKind,
    NoiseMode,
    Scenario,
    ScenarioSpec,
    make_scenario_spec,
    sample_interventional,
    sample_observational,
)
from .strategies import StrategyKind, optimize_info_gain, select_random

CSV_HEADER = (
    "scenario,strategy,k0,seed,step,x,y,log_bf01,posterior_h0,posterior_h1,"
    "posterior_gt,pdc_est,evidence,wall_ms"
)

DEFAULT_SEEDS = tuple(range(10))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a suite of episodes."""

    scenario: Scenario = Scenario.EFFECT_TO_CAUSE
    strategy: StrategyKind = StrategyKind.PDC_MAX
    pdc: PdcConfig = field(default_factory=PdcConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    n_obs: int = 5000
    budget: int = 50
    bounds: tuple[float, float] = (-5.0, 5.0)
    noise_mode: NoiseMode = NoiseMode.FIXED_POSITIONS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    link_a: float = 2.0
    link_b: float = 1.0
    link_c: float = 2.0
    link_d: float = 1.0

    def validate(self) -> None:
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if self.n_obs < 10 * self.fit.n_components:
            raise ConfigError(
                f"n_obs must be >= {10 * self.fit.n_components} for k={self.fit.n_components}"
            )
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not self.bounds[0] < self.bounds[1]:
            raise ConfigError(f"invalid bounds {self.bounds}")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.value,
            "strategy": self.strategy.value,
            "pdc": self.pdc.to_dict(),
            "fit": self.fit.to_dict(),
            "n_obs": self.n_obs,
            "budget": self.budget,
            "bounds": list(self.bounds),
            "noise_mode": self.noise_mode.value,
            "seeds": list(self.seeds),
            "link_a": self.link_a,
            "link_b": self.link_b,
            "link_c": self.link_c,
            "link_d": self.link_d,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "ExperimentConfig":
        kwargs = dict(record)
        if "scenario" in kwargs:
            kwargs["scenario"] = Scenario(kwargs["scenario"])
        if "strategy" in kwargs:
            kwargs["strategy"] = StrategyKind(kwargs["strategy"])
        if "noise_mode" in kwargs:
            kwargs["noise_mode"] = NoiseMode(kwargs["noise_mode"])
        if "pdc" in kwargs:
            kwargs["pdc"] = PdcConfig.from_dict(kwargs["pdc"])
        if "fit" in kwargs:
            kwargs["fit"] = FitConfig.from_dict(kwargs["fit"])
        if "bounds" in kwargs:
            kwargs["bounds"] = tuple(kwargs["bounds"])
        if "seeds" in kwargs:
            kwargs["seeds"] = tuple(int(s) for s in kwargs["seeds"])
        return cls(**kwargs)


@dataclass(frozen=True)
class StepRecord:
    """One intervention round, tagged with its episode identity."""

    scenario: str
    strategy: str
    k0: float
    seed: int
    step: int
    x: float
    y: float
    log_bf01: float
    posterior_h0: float
    posterior_h1: float
    posterior_gt: float
    pdc_est: float
    evidence: str
    wall_ms: float


@dataclass(frozen=True)
class EpisodeFailure:
    scenario: str
    strategy: str
    k0: float
    seed: int
    error: str


@dataclass(frozen=True)
class AggregateRow:
    """Mean/std of each metric over seeds at one (scenario, strategy, k0, step)."""

    scenario: str
    strategy: str
    k0: float
    step: int
    n_episodes: int
    mean_log_bf01: float
    std_log_bf01: float
    mean_posterior_h0: float
    std_posterior_h0: float
    mean_posterior_gt: float
    std_posterior_gt: float
    mean_pdc_est: float
    std_pdc_est: float


@dataclass(frozen=True)
class SuiteResult:
    records: list[StepRecord]
    aggregates: list[AggregateRow]
    failures: list[EpisodeFailure]


@dataclass(frozen=True)
class EpisodeSetup:
    """Environment and frozen fitted models shared by every strategy at one seed."""

    spec: ScenarioSpec
    observations: Dataset
    models: FittedModels


@dataclass(frozen=True)
class _EpisodeStreams:
    data: np.random.Generator
    environment: np.random.Generator
    fitting: np.random.Generator
    mc_noise: np.random.Generator
    strategy: np.random.Generator


def _episode_streams(seed: int) -> _EpisodeStreams:
    children = np.random.SeedSequence(seed).spawn(5)
    return _EpisodeStreams(*(np.random.default_rng(c) for c in children))


def environment_key(cfg: ExperimentConfig) -> tuple:
    """Configs sharing this key reuse one environment and one set of fits per seed."""
    return (
        cfg.scenario.value,
        cfg.noise_mode.value,
        cfg.n_obs,
        cfg.link_a,
        cfg.link_b,
        cfg.link_c,
        cfg.link_d,
        cfg.fit,
    )


def build_environment(cfg: ExperimentConfig, seed: int) -> EpisodeSetup:
    """Draw the ground truth and fit both models; independent of strategy and thresholds."""
    streams = _episode_streams(seed)
    spec = make_scenario_spec(
        cfg.scenario,
        streams.data,
        noise_mode=cfg.noise_mode,
        k=cfg.fit.n_components,
        link_f=(cfg.link_a, cfg.link_b),
        link_g=(cfg.link_c, cfg.link_d),
    )
    obs = sample_observational(spec, cfg.n_obs, streams.data)
    models = fit_models(obs, cfg.fit, streams.fitting)
    return EpisodeSetup(spec=spec, observations=obs, models=models)


def run_episode(
    cfg: ExperimentConfig, seed: int, setup: EpisodeSetup | None = None
) -> list[StepRecord]:
    """Run one full episode; returns one record per intervention round.

    With ``budget == 0`` no intervention happens and the posterior stays
    uniform.  Fully deterministic given (cfg, seed).
    """
    cfg.validate()
    if setup is None:
        setup = build_environment(cfg, seed)
    streams = _episode_streams(seed)
    models = setup.models
    spec = setup.spec
    bounds = cfg.bounds

    cum_log_bf = 0.0  # uniform prior: posterior log odds == cumulative log BF
    xs: list[float] = []
    ys: list[float] = []
    records: list[StepRecord] = []
    for step in range(1, cfg.budget + 1):
        tic = time.perf_counter()
        posterior = HypothesisPosterior(cum_log_bf)
        d_int = Dataset(np.asarray(xs), np.asarray(ys), DatasetKind.INTERVENTIONAL)
        if cfg.strategy is StrategyKind.PDC_MAX:
            x, pdc_est = optimize_intervention(
                models, d_int, posterior, cfg.pdc, bounds, streams.mc_noise
            )
        elif cfg.strategy is StrategyKind.INFO_GAIN:
            x, _ = optimize_info_gain(
                models, d_int, posterior, cfg.pdc, bounds, streams.mc_noise
            )
            noise = draw_mc_noise(models, cfg.pdc, streams.mc_noise)
            pdc_est = estimate_pdc(x, models, d_int, posterior, cfg.pdc, noise)
        elif cfg.strategy is StrategyKind.RANDOM:
            x = select_random(bounds, streams.strategy)
            noise = draw_mc_noise(models, cfg.pdc, streams.mc_noise)
            pdc_est = estimate_pdc(x, models, d_int, posterior, cfg.pdc, noise)
        else:  # pragma: no cover - enum is exhaustive
            raise ConfigError(f"unknown strategy: {cfg.strategy!r}")

        y = sample_interventional(spec, x, streams.environment)
        xs.append(x)
        ys.append(y)
        cum_log_bf += point_log_bf(models, x, y)
        post = HypothesisPosterior(cum_log_bf)
        posterior_gt = post.p_h1 if spec.scenario.has_causal_edge else post.p_h0
        wall_ms = (time.perf_counter() - tic) * 1e3
        records.append(
            StepRecord(
                scenario=cfg.scenario.value,
                strategy=cfg.strategy.value,
                k0=cfg.pdc.k0,
                seed=seed,
                step=step,
                x=x,
                y=y,
                log_bf01=cum_log_bf,
                posterior_h0=post.p_h0,
                posterior_h1=post.p_h1,
                posterior_gt=posterior_gt,
                pdc_est=pdc_est,
                evidence=classify_evidence_log(cum_log_bf).value,
                wall_ms=wall_ms,
            )
        )
    return records


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _run_group(args: tuple[list[ExperimentConfig], int]):
    """Run every config of one (environment key, seed) group, reusing the setup."""
    cfgs, seed = args
    records: list[StepRecord] = []
    failures: list[EpisodeFailure] = []
    try:
        setup = build_environment(cfgs[0], seed)
    except Exception as exc:  # noqa: BLE001 - suite keeps going on episode failure
        for cfg in cfgs:
            failures.append(_failure(cfg, seed, exc))
        return records, failures
    for cfg in cfgs:
        try:
            records.extend(run_episode(cfg, seed, setup))
        except Exception as exc:  # noqa: BLE001
            failures.append(_failure(cfg, seed, exc))
    return records, failures


def _failure(cfg: ExperimentConfig, seed: int, exc: Exception) -> EpisodeFailure:
    return EpisodeFailure(
        scenario=cfg.scenario.value,
        strategy=cfg.strategy.value,
        k0=cfg.pdc.k0,
        seed=seed,
        error=f"{type(exc).__name__}: {exc}",
    )


def run_suite(configs: Sequence[ExperimentConfig], jobs: int = 1) -> SuiteResult:
    """Run every (config, seed) episode and aggregate the metrics.

    Configs differing only in strategy or thresholds share the environment
    and the fitted models at each seed.  Episode failures are recorded and
    the suite keeps going.  Results do not depend on ``jobs``.
    """
    if not configs:
        raise ConfigError("suite needs at least one config")
    for cfg in configs:
        cfg.validate()

    groups: dict[tuple, list[ExperimentConfig]] = {}
    for cfg in configs:
        for seed in cfg.seeds:
            groups.setdefault((environment_key(cfg), seed), []).append(cfg)
    tasks = [(cfgs, key[1]) for key, cfgs in groups.items()]

    records: list[StepRecord] = []
    failures: list[EpisodeFailure] = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_group, tasks))
    else:
        outputs = [_run_group(t) for t in tasks]
    for recs, fails in outputs:
        records.extend(recs)
        failures.extend(fails)

    records.sort(key=_record_order)
    failures.sort(key=lambda f: (f.scenario, f.strategy, f.k0, f.seed))
    return SuiteResult(records=records, aggregates=aggregate_records(records), failures=failures)


def _record_order(r: StepRecord) -> tuple:
    return (r.scenario, r.strategy, r.k0, r.seed, r.step)


def aggregate_records(records: Iterable[StepRecord]) -> list[AggregateRow]:
    """Per (scenario, strategy, k0, step) mean and population std of each metric."""
    grouped: dict[tuple, list[StepRecord]] = {}
    for r in records:
        grouped.setdefault((r.scenario, r.strategy, r.k0, r.step), []).append(r)
    rows = []
    for key in sorted(grouped):
        group = grouped[key]
        metrics = {
            "log_bf01": np.array([r.log_bf01 for r in group]),
            "posterior_h0": np.array([r.posterior_h0 for r in group]),
            "posterior_gt": np.array([r.posterior_gt for r in group]),
            "pdc_est": np.array([r.pdc_est for r in group]),
        }
        stats = {}
        for name, values in metrics.items():
            stats[f"mean_{name}"] = float(values.mean())
            stats[f"std_{name}"] = float(values.std(ddof=0))
        rows.append(
            AggregateRow(
                scenario=key[0],
                strategy=key[1],
                k0=key[2],
                step=key[3],
                n_episodes=len(group),
                **stats,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def emit_csv(records: Iterable[StepRecord]) -> bytes:
    """Serialize records to CSV bytes (RFC-4180 quoting, CRLF line ends).

    Rows are sorted by (scenario, strategy, k0, seed, step) and floats are
    written with shortest round-trip precision, so equal record lists always
    produce identical bytes and parsing recovers the exact values.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in sorted(records, key=_record_order):
        writer.writerow(
            [
                r.scenario,
                r.strategy,
                repr(r.k0),
                r.seed,
                r.step,
                repr(r.x),
                repr(r.y),
                repr(r.log_bf01),
                repr(r.posterior_h0),
                repr(r.posterior_h1),
                repr(r.posterior_gt),
                repr(r.pdc_est),
                r.evidence,
                repr(r.wall_ms),
            ]
        )
    return buf.getvalue().encode("utf-8")


def write_csv(records: Iterable[StepRecord], path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_bytes(emit_csv(records))
    except OSError as exc:
        raise OSError(f"could not write CSV to {path}: {exc}") from exc
    return path


def parse_csv(source: bytes | str | Path) -> list[StepRecord]:
    """Inverse of :func:`emit_csv` (accepts bytes, CSV text, or a file path)."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif "\n" not in source and Path(source).exists():
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration as exc:
        raise ValueError("empty CSV input") from exc
    if header != CSV_HEADER.split(","):
        raise ValueError(f"unexpected CSV header: {header!r}")
    records = []
    for row in reader:
        if not row:
            continue
        records.append(
            StepRecord(
                scenario=row[0],
                strategy=row[1],
                k0=float(row[2]),
                seed=int(row[3]),
                step=int(row[4]),
                x=float(row[5]),
                y=float(row[6]),
                log_bf01=float(row[7]),
                posterior_h0=float(row[8]),
                posterior_h1=float(row[9]),
                posterior_gt=float(row[10]),
                pdc_est=float(row[11]),
                evidence=row[12],
                wall_ms=float(row[13]),
            )
        )
    return records


def expand_grid(
    scenarios: Sequence[Scenario],
    strategies: Sequence[StrategyKind],
    base: ExperimentConfig,
    k0_values: Sequence[float] | None = None,
) -> list[ExperimentConfig]:
    """Cartesian product of scenarios x strategies (x decisive thresholds).

    ``k0_values`` entries set matched thresholds ``k1 = 1/k0``.
    """
    configs = []
    for scenario in scenarios:
        for strategy in strategies:
            if k0_values is None:
                configs.append(replace(base, scenario=scenario, strategy=strategy))
            else:
                for k0 in k0_values:
                    pdc = replace(base.pdc, k0=float(k0), k1=1.0 / float(k0))
                    configs.append(
                        replace(base, scenario=scenario, strategy=strategy, pdc=pdc)
                    )
    return configs
