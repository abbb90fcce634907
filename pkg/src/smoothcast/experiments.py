"""Run harness: scenarios, bound-verification sweeps, and CSV artifacts.

Everything here is deterministic given the run configuration (seed included);
identical configs produce byte-identical CSV files.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ConfigurationError, LossSpec
from .datasets import SwitchingDataset, SwitchingDatasetConfig, generate_switching_dataset
from .longterm import ExpertForecastStream, LongTermAggregator
from .regression import OnlineSmoothingRegressor
from .regret import (
    RegretLedger,
    longterm_regret_bound,
    regression_regret_bound,
    verify_mixloss_identity,
)

SCENARIO_KINDS = ("synthetic", "adversarial")

# Worst slack accepted per named check when grading a sweep report.
CHECK_TOLERANCES = {
    "cumulative_excess_bound": 1e-9,
    "birth_time_bound": 1e-9,
    "telescoping_bound": 1e-9,
    "substitution_grid": 1e-9,
    "chained_mixloss": 1e-9,
    "weight_mass": 1e-10,
    "mixloss_identity": 1e-10,
}
# Random (weights, losses, q) triples drawn per run for the identity check.
IDENTITY_SAMPLES_PER_RUN = 25


# ---------------------------------------------------------------------------
# Long-horizon scenarios


class LongTermScenario:
    """Outcome sequence plus per-step expert forecast streams.

    `synthetic`: outcomes follow a two-tone seasonal signal with mild noise;
    expert streams cycle through five behaviours (exact, lagged, damped,
    zero, noisy).  `adversarial`: outcomes alternate between the interval
    ends +-bound, and the expert pool includes constant, zero, phase-matched
    and anti-phase streams, driving losses across their whole range.
    """

    def __init__(
        self,
        kind: str,
        n_experts: int,
        horizon: int,
        steps: int,
        bound: float,
        seed: int,
        stream_length: Optional[int] = None,
    ) -> None:
        if kind not in SCENARIO_KINDS:
            raise ConfigurationError(f"kind must be one of {SCENARIO_KINDS}, got {kind!r}")
        self.kind = kind
        self.n_experts = n_experts
        self.horizon = horizon
        self.steps = steps
        self.bound = bound
        self.seed = seed
        self.stream_length = 4 * horizon if stream_length is None else stream_length
        self._rng = np.random.default_rng(seed)
        if kind == "synthetic":
            noise = 0.04 * bound * self._rng.standard_normal(steps)
            self.outcomes = np.clip(
                self._signal(np.arange(1, steps + 1)) + noise, -bound, bound
            )
        else:
            signs = np.where(np.arange(1, steps + 1) % 2 == 0, 1.0, -1.0)
            self.outcomes = bound * signs

    def _signal(self, times: np.ndarray) -> np.ndarray:
        b = self.bound
        return b * (
            0.8 * np.sin(2.0 * np.pi * times / 23.0)
            + 0.15 * np.sin(2.0 * np.pi * times / 7.1)
        )

    def outcome_window(self, t: int) -> np.ndarray:
        """Outcomes for times t-horizon+1 .. t (valid once t > horizon)."""
        return self.outcomes[t - self.horizon : t]

    def streams_at(self, t: int) -> list[ExpertForecastStream]:
        times = np.arange(t + 1, t + self.stream_length + 1)
        out = []
        for expert_id in range(1, self.n_experts + 1):
            kind = expert_id % 5
            if self.kind == "synthetic":
                if kind == 1:
                    vals = self._signal(times)
                elif kind == 2:
                    vals = self._signal(times - 2)
                elif kind == 3:
                    vals = 0.6 * self._signal(times)
                elif kind == 4:
                    vals = np.zeros(times.size)
                else:
                    vals = self._signal(times) + 0.3 * self.bound * self._rng.standard_normal(
                        times.size
                    )
            else:
                parity = np.where(times % 2 == 0, 1.0, -1.0)
                if kind == 1:
                    vals = np.full(times.size, self.bound)
                elif kind == 2:
                    vals = np.full(times.size, -self.bound)
                elif kind == 3:
                    vals = self.bound * parity
                elif kind == 4:
                    vals = np.zeros(times.size)
                else:
                    vals = -self.bound * parity
            out.append(
                ExpertForecastStream(
                    expert_id=expert_id,
                    issue_time=t,
                    forecasts=np.clip(vals, -self.bound, self.bound),
                )
            )
        return out


@dataclass
class LongTermRunResult:
    aggregator: LongTermAggregator
    ledger: RegretLedger
    forecasts: np.ndarray

    @property
    def final_max_regret(self) -> float:
        return self.ledger.max_regret()


def run_longterm_scenario(
    scenario: LongTermScenario,
    eta: Optional[float] = None,
    rule: str = "vovk",
    check_substitution: bool = True,
) -> LongTermRunResult:
    """Drive a long-horizon aggregation run over the whole scenario."""
    spec = (
        LossSpec.with_mixable_rate(scenario.bound)
        if eta is None
        else LossSpec(bound=scenario.bound, eta=eta)
    )
    agg = LongTermAggregator(
        n_experts=scenario.n_experts,
        horizon=scenario.horizon,
        spec=spec,
        rule=rule,
        check_substitution=check_substitution,
    )
    d = scenario.horizon
    forecasts = np.zeros((scenario.steps, d))
    for t in range(1, scenario.steps + 1):
        window = scenario.outcome_window(t) if t > d else None
        result = agg.step(window, scenario.streams_at(t))
        forecasts[t - 1] = result.forecast
    return LongTermRunResult(aggregator=agg, ledger=agg.ledger, forecasts=forecasts)


# ---------------------------------------------------------------------------
# Switching-regression experiment


def default_trace_births(steps: int, window: int, count: int = 5) -> list[int]:
    """Interior birth times at evenly spaced quantiles of [window+1, steps-1].

    Empty when the run is too short for any expert to outlive its window.
    """
    if steps - 1 < window + 1:
        return []
    grid = np.linspace(window + 1, steps - 1, count + 2)
    return [int(round(v)) for v in grid[1:-1]]


@dataclass
class FigureResult:
    dataset: SwitchingDataset
    regressor: OnlineSmoothingRegressor
    trace_births: list[int]
    cum_algo: np.ndarray
    cum_baseline: np.ndarray
    bound_curve: np.ndarray
    traces: dict[int, np.ndarray]

    @property
    def steps(self) -> int:
        return self.cum_algo.size

    def final_algo_loss(self) -> float:
        return float(self.cum_algo[-1])

    def final_baseline_loss(self) -> float:
        return float(self.cum_baseline[-1])


def baseline_cumulative_losses(dataset: SwitchingDataset) -> np.ndarray:
    """Cumulative square loss of the single least-squares fit to all the data.

    The baseline is clairvoyant about the whole run (fit once on every
    sample); its predictions are clamped into the outcome interval.
    """
    coef, *_ = np.linalg.lstsq(dataset.x, dataset.y, rcond=None)
    preds = np.clip(dataset.x @ coef, -dataset.config.bound, dataset.config.bound)
    return np.cumsum((dataset.y - preds) ** 2)


def run_switching_experiment(
    dataset: SwitchingDataset,
    eta: Optional[float] = None,
    window: int = 40,
    ridge: float = 0.01,
    rule: str = "vovk",
    trace_births: Optional[Sequence[int]] = None,
    check_substitution: bool = False,
) -> FigureResult:
    """Run the smoothing regressor over a switching dataset, with traces."""
    cfg = dataset.config
    spec = (
        LossSpec.with_mixable_rate(cfg.bound)
        if eta is None
        else LossSpec(bound=cfg.bound, eta=eta)
    )
    births = (
        default_trace_births(cfg.steps, window)
        if trace_births is None
        else [int(b) for b in trace_births]
    )
    for b in births:
        if not 1 <= b <= cfg.steps:
            raise ConfigurationError(f"trace birth time {b} outside [1, {cfg.steps}]")
    reg = OnlineSmoothingRegressor(
        spec=spec,
        n_features=cfg.n_features,
        window=window,
        ridge=ridge,
        rule=rule,
        track_experts=births,
        check_substitution=check_substitution,
    )
    cum_algo = np.zeros(cfg.steps)
    running = 0.0
    for t in range(cfg.steps):
        step = reg.step(dataset.x[t], dataset.y[t])
        running += step.algo_loss
        cum_algo[t] = running
    bound_curve = (2.0 / spec.eta) * np.log(np.arange(1, cfg.steps + 1))
    traces = {b: np.asarray(reg.traces[b]) for b in births}
    return FigureResult(
        dataset=dataset,
        regressor=reg,
        trace_births=births,
        cum_algo=cum_algo,
        cum_baseline=baseline_cumulative_losses(dataset),
        bound_curve=bound_curve,
        traces=traces,
    )


def figure_csv_text(result: FigureResult) -> str:
    """Render the experiment as CSV: t, loss_alg, bound, baseline_regret, regret_tau_*."""
    births = result.trace_births
    header = ["t", "loss_alg", "bound", "baseline_regret"] + [
        f"regret_tau_{b}" for b in births
    ]
    lines = [",".join(header)]
    steps = result.steps
    for i in range(steps):
        t = i + 1
        row = [
            str(t),
            repr(float(result.cum_algo[i])),
            repr(float(result.bound_curve[i])),
            repr(float(result.cum_algo[i] - result.cum_baseline[i])),
        ]
        for b in births:
            trace = result.traces[b]
            row.append("" if t < b else repr(float(trace[t - b])))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_figure_csv(result: FigureResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(figure_csv_text(result))


# ---------------------------------------------------------------------------
# Bound-verification sweep


@dataclass(frozen=True)
class SweepRunSpec:
    kind: str  # "longterm" or "regression"
    scenario: str = "synthetic"  # longterm only
    n_experts: int = 1
    horizon: int = 1
    steps: int = 200
    seed: int = 1
    bound: float = 1.0
    eta: Optional[float] = None
    window: int = 40
    ridge: float = 0.01
    rule: str = "vovk"
    segments: int = 3
    n_features: int = 5

    @property
    def config_id(self) -> str:
        if self.kind == "longterm":
            return (
                f"longterm-{self.scenario}-N{self.n_experts}-d{self.horizon}-T{self.steps}"
            )
        return f"regression-k{self.n_features}-h{self.window}-K{self.segments}-T{self.steps}"


@dataclass(frozen=True)
class CheckRow:
    config_id: str
    seed: int
    check_name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.slack <= CHECK_TOLERANCES[self.check_name]


@dataclass
class SweepReport:
    rows: list[CheckRow] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def worst_by_check(self) -> dict[str, float]:
        worst: dict[str, float] = {}
        for row in self.rows:
            cur = worst.get(row.check_name)
            if cur is None or row.slack > cur:
                worst[row.check_name] = row.slack
        return worst


def default_longterm_sweep(
    n_experts_grid: Sequence[int] = (1, 3, 5),
    horizon_grid: Sequence[int] = (1, 5, 10),
    steps_grid: Sequence[int] = (200, 500),
    synthetic_seeds: Sequence[int] = (1, 2),
) -> list[SweepRunSpec]:
    """The bound-verification grid: every (N, horizon, steps) combination,
    each run on the synthetic scenario per seed plus once adversarially."""
    specs = []
    for n in n_experts_grid:
        for d in horizon_grid:
            for steps in steps_grid:
                for seed in synthetic_seeds:
                    specs.append(
                        SweepRunSpec(
                            kind="longterm",
                            scenario="synthetic",
                            n_experts=n,
                            horizon=d,
                            steps=steps,
                            seed=seed,
                        )
                    )
                specs.append(
                    SweepRunSpec(
                        kind="longterm",
                        scenario="adversarial",
                        n_experts=n,
                        horizon=d,
                        steps=steps,
                        seed=0,
                    )
                )
    return specs


def default_regression_sweep() -> list[SweepRunSpec]:
    return [
        SweepRunSpec(kind="regression", steps=200, seed=1, window=20, n_features=5),
        SweepRunSpec(kind="regression", steps=200, seed=2, window=20, n_features=5),
        SweepRunSpec(kind="regression", steps=500, seed=1, window=40, n_features=5),
        SweepRunSpec(kind="regression", steps=500, seed=2, window=40, n_features=5),
    ]


def _identity_check_worst(spec: LossSpec, rng: np.random.Generator, samples: int) -> float:
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(2, 12))
        w = rng.dirichlet(np.ones(n))
        q = rng.dirichlet(np.ones(n))
        losses = rng.uniform(0.0, 4.0 * spec.bound**2, size=n)
        check = verify_mixloss_identity(q, w, losses, spec)
        worst = max(worst, check.residual)
    return worst


def run_sweep_entry(entry: SweepRunSpec) -> list[CheckRow]:
    """Run one sweep entry and emit its check rows."""
    spec = (
        LossSpec.with_mixable_rate(entry.bound)
        if entry.eta is None
        else LossSpec(bound=entry.bound, eta=entry.eta)
    )
    rows: list[CheckRow] = []

    def note(check: str, lhs: float, rhs: float = 0.0) -> None:
        rows.append(
            CheckRow(
                config_id=entry.config_id,
                seed=entry.seed,
                check_name=check,
                lhs=lhs,
                rhs=rhs,
            )
        )

    if entry.kind == "longterm":
        scenario = LongTermScenario(
            kind=entry.scenario,
            n_experts=entry.n_experts,
            horizon=entry.horizon,
            steps=entry.steps,
            bound=entry.bound,
            seed=entry.seed,
        )
        result = run_longterm_scenario(
            scenario, eta=spec.eta, rule=entry.rule, check_substitution=True
        )
        ledger = result.ledger
        note(
            "cumulative_excess_bound",
            ledger.max_regret(),
            longterm_regret_bound(entry.n_experts, entry.steps, entry.horizon, spec.eta),
        )
        note("birth_time_bound", ledger.birth_bound_slack(entry.n_experts))
        note("telescoping_bound", ledger.worst_slack.get("telescoping_bound", 0.0))
        note("substitution_grid", ledger.worst_slack.get("substitution_grid", 0.0))
        note("chained_mixloss", ledger.worst_slack.get("chained_mixloss", 0.0))
        note("weight_mass", ledger.worst_slack.get("weight_mass", 0.0))
    elif entry.kind == "regression":
        dataset = generate_switching_dataset(
            SwitchingDatasetConfig(
                steps=entry.steps,
                n_features=entry.n_features,
                segments=entry.segments,
                bound=entry.bound,
                seed=entry.seed,
            )
        )
        result = run_switching_experiment(
            dataset,
            eta=spec.eta,
            window=entry.window,
            ridge=entry.ridge,
            rule=entry.rule,
            check_substitution=True,
        )
        ledger = result.regressor.ledger
        note(
            "cumulative_excess_bound",
            ledger.max_regret(),
            regression_regret_bound(entry.steps, spec.eta),
        )
        note("birth_time_bound", ledger.birth_bound_slack(1))
        note("telescoping_bound", ledger.worst_slack.get("telescoping_bound", 0.0))
        note("substitution_grid", ledger.worst_slack.get("substitution_grid", 0.0))
        note("chained_mixloss", ledger.worst_slack.get("chained_mixloss", 0.0))
        note("weight_mass", ledger.worst_slack.get("weight_mass", 0.0))
    else:
        raise ConfigurationError(f"unknown sweep kind {entry.kind!r}")

    rng = np.random.default_rng((entry.seed + 1) * 7919)
    note("mixloss_identity", _identity_check_worst(spec, rng, IDENTITY_SAMPLES_PER_RUN))
    return rows


def run_bound_sweep(entries: Sequence[SweepRunSpec]) -> SweepReport:
    start = time.perf_counter()
    report = SweepReport()
    for entry in entries:
        report.rows.extend(run_sweep_entry(entry))
    report.elapsed_seconds = time.perf_counter() - start
    return report


def sweep_csv_text(report: SweepReport) -> str:
    lines = ["config_id,seed,check_name,lhs,rhs,slack,pass"]
    for row in report.rows:
        lines.append(
            ",".join(
                [
                    row.config_id,
                    str(row.seed),
                    row.check_name,
                    repr(float(row.lhs)),
                    repr(float(row.rhs)),
                    repr(float(row.slack)),
                    "true" if row.passed else "false",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_sweep_csv(report: SweepReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(sweep_csv_text(report))
