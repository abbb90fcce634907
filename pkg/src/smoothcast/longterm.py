"""Delayed-feedback aggregation of multi-step-ahead forecast streams.

Experts issue, at every step t, a stream of forecasts for the next several
time points.  Outcomes for a step's forecast vector only become observable
`horizon` steps later, so weight updates act on weights prepared `horizon`
steps in the past, and each issued forecast vector is scored as the average
square loss over its window.

The engine maintains one auxiliary expert per (stream id, birth step) pair.
An expert born at step tau is scored, from step tau + horizon on, against
the window its birth-step stream covered; its charge is discounted by the
per-offset confidences, with the undiscounted share replaced by the
aggregate's own per-coordinate loss.  Experts not yet born are carried as a
single reservoir mass with prior tail sum_{tau > t} 1/(tau (tau+1)) =
1/(t+1), charged the aggregate loss until they materialize, which keeps the
scheme equivalent to running the full infinite expert family densely.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import (
    ConfigurationError,
    DimensionError,
    DomainError,
    LossSpec,
    StateError,
    admissible_eta_limit,
    substitute,
)
from .regret import RegretLedger, longterm_regret_bound

# Offsets beyond this multiple of the horizon get zero confidence by default.
DEFAULT_CONFIDENT_OFFSET_FACTOR = 4
# Tolerance on forecast/outcome range checks (absorbs clipping round-off).
_RANGE_SLACK = 1e-12
# Worst acceptable drift of total weight mass from 1 per step.
MASS_TOL = 1e-10


@dataclass(frozen=True)
class ExpertForecastStream:
    """One expert's forecast stream issued at a single step.

    forecasts[j] targets absolute time issue_time + j + 1.  confidences, if
    given, must align with forecasts and lie in [0, 1]; when omitted the
    engine applies its default confidence policy.
    """

    expert_id: int
    issue_time: int
    forecasts: np.ndarray
    confidences: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "forecasts", np.asarray(self.forecasts, dtype=float))
        if self.confidences is not None:
            object.__setattr__(self, "confidences", np.asarray(self.confidences, dtype=float))

    def validate(self, bound: float) -> None:
        c = self.forecasts
        if c.ndim != 1:
            raise DimensionError("forecasts must be one-dimensional")
        if c.size and not np.all(np.isfinite(c)):
            raise DomainError("forecasts must be finite")
        if c.size and float(np.max(np.abs(c))) > bound * (1.0 + _RANGE_SLACK):
            raise DomainError(
                f"stream (expert {self.expert_id}, step {self.issue_time}) has forecasts "
                f"outside [-{bound}, {bound}]"
            )
        if self.confidences is not None:
            p = self.confidences
            if p.shape != c.shape:
                raise DimensionError("confidences must align with forecasts")
            if p.size and (np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p))):
                raise DomainError("confidences must lie in [0, 1]")


def default_confidences(n_offsets: int, max_confident_offset: int) -> np.ndarray:
    """Full confidence up to max_confident_offset, zero beyond."""
    p = np.zeros(n_offsets)
    p[: min(n_offsets, max_confident_offset)] = 1.0
    return p


def delayed_weight_update(
    weights: np.ndarray,
    reservoir: float,
    charged_losses: np.ndarray,
    reservoir_loss: float,
    eta: float,
) -> tuple[np.ndarray, float, float]:
    """One exponential update over materialized experts plus the unborn reservoir.

    The normalizer splits into the materialized sum and the reservoir term
    charged with the aggregate's own loss.  Returns the updated weights, the
    updated reservoir mass, and the mix loss -(1/eta) ln(normalizer).
    """
    z = eta * np.asarray(charged_losses, dtype=float)
    z_res = eta * reservoir_loss
    shift = z_res if reservoir > 0 else np.inf
    active = weights > 0
    if np.any(active):
        shift = min(shift, float(z[active].min()))
    if not np.isfinite(shift):
        raise StateError("no probability mass left to update")
    factors = np.exp(-(z - shift), where=active, out=np.zeros_like(z))
    scaled = weights * factors
    res_scaled = reservoir * float(np.exp(-(z_res - shift))) if reservoir > 0 else 0.0
    total = float(scaled.sum()) + res_scaled
    mix = (shift - np.log(total)) / eta
    return scaled / total, res_scaled / total, float(mix)


def confidence_weighted_normalization(
    confidences: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, bool]:
    """Effective weights p_i w_i / sum_j p_j w_j for one forecast coordinate.

    Returns (effective weights, degenerate flag); the flag is set when no
    confidence mass survives, in which case the weights come back as zeros.
    """
    num = np.asarray(confidences, dtype=float) * np.asarray(weights, dtype=float)
    if num.shape != np.shape(confidences):
        raise DimensionError("confidences and weights must align")
    total = float(num.sum())
    if total <= 0.0:
        return np.zeros_like(num), True
    return num / total, False


class LongTermUpdate(NamedTuple):
    algo_loss: float
    mix_loss: float
    algo_coords: np.ndarray
    charged_losses: np.ndarray


class LongTermStep(NamedTuple):
    forecast: np.ndarray
    update: Optional[LongTermUpdate]


@dataclass
class _Snapshot:
    weights: np.ndarray
    reservoir: float


class LongTermAggregator:
    """Online aggregator over delayed multi-step forecast streams.

    Drives the per-step cycle: score the forecast issued `horizon` steps ago
    once its outcome window closes, update expert weights with
    confidence-discounted charges, materialize the step's newborn experts
    out of the reservoir, and issue the next forecast vector by per-offset
    substitution over segment forecasts extracted from live streams.
    """

    def __init__(
        self,
        n_experts: int,
        horizon: int,
        spec: LossSpec,
        rule: str = "vovk",
        max_confident_offset: Optional[int] = None,
        check_substitution: bool = True,
        check_grid_points: int = 201,
    ) -> None:
        if n_experts < 1:
            raise ConfigurationError("n_experts must be at least 1")
        if horizon < 1:
            raise ConfigurationError("horizon must be at least 1")
        limit = admissible_eta_limit(spec, rule)
        if spec.eta > limit * (1.0 + 1e-12):
            raise ConfigurationError(
                f"eta={spec.eta} is outside the admissible range (0, {limit}] for rule {rule!r}"
            )
        self.n_experts = n_experts
        self.horizon = horizon
        self.spec = spec
        self.rule = rule
        self.max_confident_offset = (
            DEFAULT_CONFIDENT_OFFSET_FACTOR * horizon
            if max_confident_offset is None
            else max_confident_offset
        )
        if self.max_confident_offset < 1:
            raise ConfigurationError("max_confident_offset must be at least 1")
        self.check_substitution = check_substitution
        self.check_grid_points = check_grid_points
        self._grid = np.linspace(-spec.bound, spec.bound, check_grid_points)

        self.clock = 0
        self._phase = "update"
        # Row-major expert storage, one row per (stream id, birth step), birth order.
        self._rows = 0
        self._tau = np.zeros(0, dtype=int)
        self._ids = np.zeros(0, dtype=int)
        self._lengths = np.zeros(0, dtype=int)
        self._values = np.zeros((0, 0))
        self._conf = np.zeros((0, 0))
        # Weight vectors prepared for steps clock+1 .. clock+horizon, oldest first.
        self._snapshots: deque[_Snapshot] = deque(
            _Snapshot(np.zeros(0), 1.0) for _ in range(horizon)
        )
        # Forecast vectors issued at steps clock-horizon+1 .. clock, oldest first.
        self._issued_vectors: deque[np.ndarray] = deque()
        # Latest issued forecast per absolute target time, for degenerate fallback.
        self._issued_for_time: dict[int, float] = {}
        self.ledger = RegretLedger(eta=spec.eta, horizon=horizon)

    # -- public state views ----------------------------------------------------

    def expert_keys(self) -> list[tuple[int, int]]:
        """Materialized experts as (stream id, birth step), registration order."""
        return list(zip(self._ids.tolist(), self._tau.tolist()))

    def alive_weights(self) -> dict[tuple[int, int], float]:
        """Forecasting-snapshot weight of every materialized expert."""
        snap = self._snapshots[-1]
        return dict(zip(self.expert_keys(), snap.weights.tolist()))

    @property
    def reservoir_mass(self) -> float:
        return self._snapshots[-1].reservoir

    def effective_weights(self, offset: int) -> tuple[list[tuple[int, int]], np.ndarray, bool]:
        """Confidence-weighted normalized weights for one forecast coordinate.

        Valid after the current step's forecast; offset is 1-based within the
        horizon window of the step at the current clock.
        """
        if not 1 <= offset <= self.horizon:
            raise DomainError(f"offset must lie in [1, {self.horizon}]")
        if self.clock < 1:
            raise StateError("no forecast issued yet")
        conf, _ = self._segment_matrix(self.clock)
        eff, degenerate = confidence_weighted_normalization(
            conf[:, offset - 1], self._snapshots[-1].weights
        )
        return self.expert_keys(), eff, degenerate

    # -- per-step operations ---------------------------------------------------

    def step(
        self, outcomes: Optional[Sequence[float]], streams: Sequence[ExpertForecastStream]
    ) -> LongTermStep:
        """Advance one step: score and update, materialize newborns, forecast."""
        t = self.clock + 1
        update = self.observe_and_update(t, outcomes)
        self.birth_experts(t, streams)
        forecast = self.forecast_horizon(t)
        return LongTermStep(forecast=forecast, update=update)

    def observe_and_update(
        self, t: int, outcomes: Optional[Sequence[float]]
    ) -> Optional[LongTermUpdate]:
        """Score the forecast whose window closed at t and refresh the weights.

        For t <= horizon there is nothing to score: all losses are zero and the
        prepared weights are carried forward unchanged.  Otherwise `outcomes`
        must hold the horizon outcomes for times t-horizon+1 .. t.
        """
        if self._phase != "update" or t != self.clock + 1:
            raise StateError(f"observe_and_update called out of order at t={t}")
        d = self.horizon
        snap = self._snapshots.popleft()

        if t <= d:
            if outcomes is not None:
                raise StateError(f"no outcome window closes before step {d + 1}")
            self._snapshots.append(_Snapshot(snap.weights.copy(), snap.reservoir))
            self.ledger.record_step(0.0, 0.0)
            self.ledger.note_max_excess()
            self._phase = "birth"
            return None

        if outcomes is None:
            raise StateError(f"outcomes required from step {d + 1} on")
        y = np.asarray(outcomes, dtype=float)
        if y.shape != (d,):
            raise DimensionError(f"expected {d} outcomes, got shape {y.shape}")
        if not np.all(np.isfinite(y)) or float(np.max(np.abs(y))) > self.spec.bound * (
            1.0 + _RANGE_SLACK
        ):
            raise DomainError(f"outcomes must lie in [-{self.spec.bound}, {self.spec.bound}]")
        if not self._issued_vectors:
            raise StateError("no forecast vector available to score")
        gamma_prev = self._issued_vectors.popleft()
        algo_coords = (y - gamma_prev) ** 2
        h = float(algo_coords.mean())

        charged = np.full(self._rows, h)
        scored = np.nonzero((self._tau <= t - d) & (t - d - self._tau + 1 <= self._lengths))[0]
        if scored.size:
            offs = (t - d - self._tau[scored])[:, None] + np.arange(1, d + 1)[None, :]
            valid = offs <= self._lengths[scored, None]
            cols = np.clip(offs - 1, 0, self._values.shape[1] - 1)
            conf = np.where(valid, self._conf[scored[:, None], cols], 0.0)
            vals = np.where(valid, self._values[scored[:, None], cols], 0.0)
            coord_loss = (y[None, :] - vals) ** 2
            charged[scored] = np.mean(
                conf * coord_loss + (1.0 - conf) * algo_coords[None, :], axis=1
            )

        new_w, new_res, mix = delayed_weight_update(
            snap.weights, snap.reservoir, charged, h, self.spec.eta
        )
        self._snapshots.append(_Snapshot(new_w, new_res))

        self.ledger.record_step(h, mix)
        if self._rows:
            self.ledger.cum_excess += h - charged
        self.ledger.note_max_excess()
        self.ledger.note_slack("chained_mixloss", h - mix)
        self.ledger.note_slack("weight_mass", abs(float(new_w.sum()) + new_res - 1.0))
        self.ledger.note_slack(
            "cumulative_excess_bound",
            self.ledger.max_regret()
            - longterm_regret_bound(self.n_experts, t, d, self.spec.eta),
        )
        self.ledger.note_slack("telescoping_bound", self.ledger.telescoping_slack())

        update = LongTermUpdate(
            algo_loss=h, mix_loss=mix, algo_coords=algo_coords, charged_losses=charged
        )
        self._phase = "birth"
        return update

    def birth_experts(self, issue_time: int, streams: Sequence[ExpertForecastStream]) -> None:
        """Materialize the step's newborn experts out of the reservoir.

        Exactly one stream per expert id must be supplied, all stamped with
        issue_time == the step being processed.  Every pending weight
        snapshot grants each newborn reservoir_mass / (n_experts *
        (issue_time + 1)), the share the dense infinite-prior bookkeeping
        assigns it.
        """
        if self._phase != "birth" or issue_time != self.clock + 1:
            raise StateError(f"birth_experts called out of order at t={issue_time}")
        if len(streams) != self.n_experts:
            raise ConfigurationError(
                f"expected {self.n_experts} streams, got {len(streams)}"
            )
        seen: set[int] = set()
        for s in streams:
            if s.issue_time != issue_time:
                raise StateError(
                    f"stream for expert {s.expert_id} stamped {s.issue_time}, expected {issue_time}"
                )
            if s.expert_id in seen:
                raise StateError(f"duplicate stream for expert {s.expert_id} at t={issue_time}")
            if not 1 <= s.expert_id <= self.n_experts:
                raise ConfigurationError(f"expert_id {s.expert_id} outside 1..{self.n_experts}")
            seen.add(s.expert_id)
            s.validate(self.spec.bound)
        ordered = sorted(streams, key=lambda s: s.expert_id)

        max_len = max((s.forecasts.size for s in ordered), default=0)
        self._ensure_capacity(self._rows + self.n_experts, max_len)
        for s in ordered:
            r = self._rows
            n_off = s.forecasts.size
            self._tau[r] = issue_time
            self._ids[r] = s.expert_id
            self._lengths[r] = n_off
            if n_off:
                self._values[r, :n_off] = s.forecasts
                conf = (
                    default_confidences(n_off, self.max_confident_offset)
                    if s.confidences is None
                    else s.confidences
                )
                self._conf[r, :n_off] = conf
            self._rows += 1

        for snap in self._snapshots:
            grant = snap.reservoir / (self.n_experts * (issue_time + 1))
            snap.weights = np.concatenate(
                [snap.weights, np.full(self.n_experts, grant)]
            )
            snap.reservoir -= self.n_experts * grant

        log_prior = -np.log(self.n_experts * issue_time * (issue_time + 1.0))
        self.ledger.register_experts(
            [issue_time] * self.n_experts, [log_prior] * self.n_experts
        )
        self._phase = "forecast"

    def forecast_horizon(self, t: int) -> np.ndarray:
        """Issue the step's forecast vector for times t+1 .. t+horizon."""
        if self._phase != "forecast" or t != self.clock + 1:
            raise StateError(f"forecast_horizon called out of order at t={t}")
        d = self.horizon
        snap = self._snapshots[-1]
        conf, vals = self._segment_matrix(t)
        num = conf * snap.weights[:, None]
        den = num.sum(axis=0)

        gamma = np.empty(d)
        live = den > 0
        for s in np.nonzero(~live)[0]:
            gamma[s] = self._issued_for_time.get(t + s + 1, 0.0)
        if np.any(live):
            gamma[live] = self._substitute_columns(vals[:, live], num[:, live])
        np.clip(gamma, -self.spec.bound, self.spec.bound, out=gamma)

        if self.check_substitution and np.any(live):
            worst = self._grid_violation(vals[:, live], num[:, live], den[live], gamma[live])
            self.ledger.note_slack("substitution_grid", worst)

        self._issued_vectors.append(gamma.copy())
        for s in range(d):
            self._issued_for_time[t + s + 1] = float(gamma[s])
        self._issued_for_time.pop(t, None)
        self.clock = t
        self._phase = "update"
        return gamma.copy()

    # -- internals -------------------------------------------------------------

    def _ensure_capacity(self, rows: int, cols: int) -> None:
        cur_rows, cur_cols = self._values.shape
        new_rows = cur_rows
        while new_rows < rows:
            new_rows = max(2 * new_rows, 64)
        new_cols = max(cur_cols, cols)
        if new_rows != cur_rows or new_cols != cur_cols:
            values = np.zeros((new_rows, new_cols))
            conf = np.zeros((new_rows, new_cols))
            values[:cur_rows, :cur_cols] = self._values
            conf[:cur_rows, :cur_cols] = self._conf
            self._values = values
            self._conf = conf
            self._tau = np.concatenate(
                [self._tau, np.zeros(new_rows - self._tau.size, dtype=int)]
            )
            self._ids = np.concatenate(
                [self._ids, np.zeros(new_rows - self._ids.size, dtype=int)]
            )
            self._lengths = np.concatenate(
                [self._lengths, np.zeros(new_rows - self._lengths.size, dtype=int)]
            )

    @property
    def _tau_view(self) -> np.ndarray:
        return self._tau[: self._rows]

    def _segment_matrix(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Confidence and forecast matrices [rows, horizon] for step t's window.

        Row r, column s holds the forecast expert r's birth stream issued for
        absolute time t + s + 1 (offset t - tau_r + s + 1 into the stream),
        with zero confidence wherever the stream does not reach.
        """
        d = self.horizon
        R = self._rows
        conf = np.zeros((R, d))
        vals = np.zeros((R, d))
        tau = self._tau[:R]
        lengths = self._lengths[:R]
        reach = np.nonzero(t - tau + 1 <= lengths)[0]
        if reach.size:
            offs = (t - tau[reach])[:, None] + np.arange(1, d + 1)[None, :]
            valid = offs <= lengths[reach, None]
            cols = np.clip(offs - 1, 0, self._values.shape[1] - 1)
            conf[reach] = np.where(valid, self._conf[reach[:, None], cols], 0.0)
            vals[reach] = np.where(valid, self._values[reach[:, None], cols], 0.0)
        return conf, vals

    def _substitute_columns(self, vals: np.ndarray, num: np.ndarray) -> np.ndarray:
        """Column-wise substitution with unnormalized nonnegative weights."""
        eta, bound = self.spec.eta, self.spec.bound
        if self.rule == "mean":
            return np.einsum("rs,rs->s", vals, num) / num.sum(axis=0)
        mask = num > 0
        near = np.where(mask, -eta * (bound - vals) ** 2, -np.inf)
        far = np.where(mask, -eta * (bound + vals) ** 2, -np.inf)
        m_near = near.max(axis=0)
        m_far = far.max(axis=0)
        log_near = m_near + np.log(
            np.sum(num * np.exp(near - m_near[None, :], where=mask, out=np.zeros_like(near)), axis=0)
        )
        log_far = m_far + np.log(
            np.sum(num * np.exp(far - m_far[None, :], where=mask, out=np.zeros_like(far)), axis=0)
        )
        return (log_near - log_far) / (4.0 * eta * bound)

    def _grid_violation(
        self, vals: np.ndarray, num: np.ndarray, den: np.ndarray, gamma: np.ndarray
    ) -> float:
        """Worst loss-above-superprediction over the outcome grid, all columns."""
        eta = self.spec.eta
        ys = self._grid
        mask = num > 0
        rows = np.nonzero(mask.any(axis=1))[0]
        vals = vals[rows]
        num = num[rows]
        mask = mask[rows]
        expo = -eta * (ys[:, None, None] - vals[None, :, :]) ** 2
        expo = np.where(mask[None, :, :], expo, -np.inf)
        m = expo.max(axis=1)
        s = np.einsum("rs,grs->gs", num, np.exp(expo - m[:, None, :], where=mask[None], out=np.zeros_like(expo)))
        g = -(m + np.log(s) - np.log(den)[None, :]) / eta
        viol = (ys[:, None] - gamma[None, :]) ** 2 - g
        return float(viol.max())
