"""Online regression by aggregating sliding-window ridge experts.

A fresh expert is spawned after every step: the expert born at step tau + 1
carries the clamped linear predictor fitted by ridge regression on the most
recent `window` samples (a zero predictor while fewer than `window` samples
exist).  All spawned experts are aggregated with exponential weights under
the square-loss substitution machinery from `core`; experts not yet spawned
are carried as a reservoir mass charged the aggregate's own loss, exactly as
in the long-horizon engine but with a one-step feedback delay.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .core import (
    ConfigurationError,
    DimensionError,
    DomainError,
    LossSpec,
    StateError,
    admissible_eta_limit,
    substitute,
    verify_substitution,
)
from .longterm import delayed_weight_update
from .regret import RegretLedger, regression_regret_bound

_RANGE_SLACK = 1e-12


def ridge_fit(xs: np.ndarray, ys: np.ndarray, ridge: float) -> np.ndarray:
    """Solve (ridge * I + X'X) w = X'y for the window (X, y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 2 or ys.ndim != 1 or xs.shape[0] != ys.size:
        raise DimensionError("need xs of shape (samples, features) and aligned ys")
    if ridge <= 0:
        raise ConfigurationError("ridge must be positive")
    k = xs.shape[1]
    gram = ridge * np.eye(k) + xs.T @ xs
    return scipy.linalg.solve(gram, xs.T @ ys, assume_a="pos")


class RegressionExpert(NamedTuple):
    birth_time: int
    coef: np.ndarray

    def predict(self, x: np.ndarray, bound: Optional[float] = None) -> float:
        value = float(np.dot(self.coef, x))
        if bound is not None:
            value = float(np.clip(value, -bound, bound))
        return value


class RegressionStep(NamedTuple):
    forecast: float
    algo_loss: float
    mix_loss: float


class OnlineSmoothingRegressor:
    """Aggregates one sliding-window ridge expert per past step.

    Per step: predict by substitution over all spawned experts' clamped
    linear forecasts, observe the outcome, charge every spawned expert its
    own square loss and the reservoir the aggregate's loss, update the
    exponential weights, then spawn the next expert from the current sample
    window.  With the default rate eta = 1/(2 bound^2) the cumulative excess
    over any spawned expert never exceeds (2/eta) ln(steps).
    """

    def __init__(
        self,
        spec: LossSpec,
        n_features: int,
        window: int = 40,
        ridge: float = 0.01,
        rule: str = "vovk",
        track_experts: Sequence[int] = (),
        check_substitution: bool = False,
        check_grid_points: int = 201,
    ) -> None:
        if n_features < 1:
            raise ConfigurationError("n_features must be at least 1")
        if window < 1:
            raise ConfigurationError("window must be at least 1")
        if ridge <= 0:
            raise ConfigurationError("ridge must be positive")
        limit = admissible_eta_limit(spec, rule)
        if spec.eta > limit * (1.0 + 1e-12):
            raise ConfigurationError(
                f"eta={spec.eta} is outside the admissible range (0, {limit}] for rule {rule!r}"
            )
        self.spec = spec
        self.n_features = n_features
        self.window = window
        self.ridge = ridge
        self.rule = rule
        self.check_substitution = check_substitution
        self.check_grid_points = check_grid_points

        self.clock = 0
        self._samples: deque[tuple[np.ndarray, float]] = deque(maxlen=window)
        self._coef_buf = np.zeros((64, n_features))
        self._n_experts = 1
        self._births = [1]
        self.weights = np.array([0.5])
        self.reservoir = 0.5
        self.ledger = RegretLedger(eta=spec.eta, horizon=1)
        self.ledger.register_experts([1], [float(-np.log(2.0))])
        # Cumulative excess trace per tracked expert birth time.
        self.traces: dict[int, list[float]] = {int(tau): [] for tau in track_experts}

    @property
    def n_experts(self) -> int:
        return self._n_experts

    def experts(self) -> list[RegressionExpert]:
        return [
            RegressionExpert(birth_time=b, coef=self._coef_buf[i].copy())
            for i, b in enumerate(self._births)
        ]

    def expert_predictions(self, x: np.ndarray) -> np.ndarray:
        """Clamped linear forecasts of every spawned expert at x."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise DimensionError(f"expected x of shape ({self.n_features},), got {x.shape}")
        return np.clip(self._coef_buf[: self._n_experts] @ x, -self.spec.bound, self.spec.bound)

    def predict(self, x: np.ndarray) -> float:
        """Substitution forecast of the current expert pool at x."""
        preds = self.expert_predictions(x)
        total = float(self.weights.sum())
        if total <= 0:
            raise StateError("no weight mass on spawned experts")
        return substitute(preds, self.weights / total, self.spec, self.rule)

    def step(self, x: np.ndarray, y: float) -> RegressionStep:
        """Predict at x, observe y, update weights, spawn the next expert."""
        y = float(y)
        if not np.isfinite(y) or abs(y) > self.spec.bound * (1.0 + _RANGE_SLACK):
            raise DomainError(f"outcome must lie in [-{self.spec.bound}, {self.spec.bound}]")
        t = self.clock + 1
        preds = self.expert_predictions(x)
        total = float(self.weights.sum())
        if total <= 0:
            raise StateError("no weight mass on spawned experts")
        normalized = self.weights / total
        forecast = substitute(preds, normalized, self.spec, self.rule)
        algo_loss = float((y - forecast) ** 2)
        losses = (y - preds) ** 2

        if self.check_substitution:
            check = verify_substitution(
                forecast, preds, normalized, self.spec, grid_points=self.check_grid_points
            )
            self.ledger.note_slack("substitution_grid", check.worst_violation)

        self.weights, self.reservoir, mix = delayed_weight_update(
            self.weights, self.reservoir, losses, algo_loss, self.spec.eta
        )

        self.ledger.record_step(algo_loss, mix)
        self.ledger.cum_excess += algo_loss - losses
        self.ledger.note_max_excess()
        self.ledger.note_slack("chained_mixloss", algo_loss - mix)
        self.ledger.note_slack(
            "weight_mass", abs(float(self.weights.sum()) + self.reservoir - 1.0)
        )
        self.ledger.note_slack(
            "cumulative_excess_bound",
            self.ledger.max_regret() - regression_regret_bound(t, self.spec.eta),
        )
        self.ledger.note_slack("telescoping_bound", self.ledger.telescoping_slack())

        self._samples.append((np.asarray(x, dtype=float).copy(), y))
        self._spawn(t + 1)
        for tau, trace in self.traces.items():
            if tau <= t:
                trace.append(float(self.ledger.cum_excess[tau - 1]))
        self.clock = t
        return RegressionStep(forecast=forecast, algo_loss=algo_loss, mix_loss=mix)

    def _spawn(self, birth_time: int) -> None:
        if len(self._samples) >= self.window:
            xs = np.stack([s[0] for s in self._samples])
            ys = np.array([s[1] for s in self._samples])
            coef = ridge_fit(xs, ys, self.ridge)
        else:
            coef = np.zeros(self.n_features)
        if self._n_experts == self._coef_buf.shape[0]:
            grown = np.zeros((2 * self._coef_buf.shape[0], self.n_features))
            grown[: self._n_experts] = self._coef_buf
            self._coef_buf = grown
        self._coef_buf[self._n_experts] = coef
        self._n_experts += 1
        self._births.append(birth_time)
        grant = self.reservoir / (birth_time + 1)
        self.weights = np.append(self.weights, grant)
        self.reservoir -= grant
        self.ledger.register_experts(
            [birth_time], [float(-np.log(birth_time * (birth_time + 1.0)))]
        )
