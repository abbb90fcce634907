"""Regret accounting and bound verification.

Provides the closed-form regret bounds for the two engines, the mix-loss
decomposition identity that drives every bound proof, a reference simulator
for the delayed exponential update, and the ledger engines use to record
per-step losses and per-expert cumulative excess while a run is in flight.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .core import (
    DimensionError,
    DomainError,
    LossSpec,
    exp_weight_update,
    relative_entropy,
    validate_weights,
)

# Residual allowed on the exact mix-loss decomposition identity.
IDENTITY_TOL = 1e-10
# Slack allowed on simulated telescoping bounds.
BOUND_TOL = 1e-9


def discounted_excess(algo_coords, expert_coords, confidences) -> float:
    """Confidence-weighted average of per-coordinate loss gaps.

    (1/d) * sum_s p_s * (h_s - l_s): the share of the aggregate's loss the
    expert is actually held accountable for on a d-coordinate window.
    """
    h = np.atleast_1d(np.asarray(algo_coords, dtype=float))
    l = np.atleast_1d(np.asarray(expert_coords, dtype=float))
    p = np.atleast_1d(np.asarray(confidences, dtype=float))
    if not (h.shape == l.shape == p.shape):
        raise DimensionError("coordinate arrays must share one shape")
    if np.any(p < 0) or np.any(p > 1):
        raise DomainError("confidences must lie in [0, 1]")
    return float(np.mean(p * (h - l)))


def longterm_regret_bound(n_experts: int, steps: int, horizon: int, eta: float) -> float:
    """Worst-case cumulative excess of the delayed-feedback aggregator.

    (horizon/eta) * (ln n_experts + 2 ln(steps - horizon + 1)), covering every
    expert stream born at any time within the run.
    """
    if n_experts < 1 or horizon < 1:
        raise DomainError("n_experts and horizon must be at least 1")
    if steps < horizon + 1:
        raise DomainError(f"steps must exceed horizon, got steps={steps} horizon={horizon}")
    if eta <= 0:
        raise DomainError("eta must be positive")
    return (horizon / eta) * (math.log(n_experts) + 2.0 * math.log(steps - horizon + 1))


def regression_regret_bound(steps: int, eta: float) -> float:
    """Per-expert regret cap of the online smoothing regressor: (2/eta) ln steps."""
    if steps < 1:
        raise DomainError("steps must be at least 1")
    if eta <= 0:
        raise DomainError("eta must be positive")
    return (2.0 / eta) * math.log(steps)


def expert_birth_bound(birth_time: int, horizon: int, n_experts: int, eta: float) -> float:
    """Telescoped excess cap for one expert stream born at birth_time.

    (horizon/eta) * ln(n_experts * birth_time * (birth_time + 1)); never larger
    than the run-wide bound once birth_time + horizon <= steps.
    """
    if birth_time < 1:
        raise DomainError("birth_time must be at least 1")
    return (horizon / eta) * math.log(n_experts * birth_time * (birth_time + 1.0))


def mixloss(weights, losses, eta: float) -> float:
    """-(1/eta) ln sum_i w_i exp(-eta l_i), shift-stabilized on the support."""
    p = validate_weights(weights)
    l = np.atleast_1d(np.asarray(losses, dtype=float))
    if l.shape != p.shape:
        raise DimensionError(f"losses have length {l.size} but weights have length {p.size}")
    z = eta * l
    support = p > 0
    shift = float(z[support].min())
    total = float(np.sum(p[support] * np.exp(-(z[support] - shift))))
    return (shift - math.log(total)) / eta


class IdentityCheck(NamedTuple):
    residual: float
    passed: bool


def verify_mixloss_identity(
    q,
    weights,
    losses,
    spec: LossSpec,
    tol: float = IDENTITY_TOL,
) -> IdentityCheck:
    """Exact decomposition of mix loss against any comparison vector q.

    mixloss(w, l) - q.l = (1/eta) * (D(q||w) - D(q||w')), where w' is the
    exponential update of w on l.  Returns the absolute residual; it should
    sit at rounding level for any valid inputs.
    """
    q = validate_weights(q)
    w = validate_weights(weights)
    l = np.atleast_1d(np.asarray(losses, dtype=float))
    m = mixloss(w, l, spec.eta)
    w_next = exp_weight_update(w, l, spec)
    lhs = m - float(np.dot(q, l))
    rhs = (relative_entropy(q, w) - relative_entropy(q, w_next)) / spec.eta
    residual = abs(lhs - rhs)
    return IdentityCheck(residual=residual, passed=residual <= tol)


class DelayedBoundCheck(NamedTuple):
    lhs: float
    rhs: float
    slack: float
    passed: bool
    telescoping_residual: float


def verify_delayed_regret_bound(
    losses,
    prior,
    horizon: int,
    eta: float,
    q,
    tol: float = BOUND_TOL,
) -> DelayedBoundCheck:
    """Simulate the horizon-delayed exponential update and check its regret cap.

    The update at step t applies losses[t] to the weights prepared at step
    t - horizon (the first `horizon` steps all start from `prior`).  The
    telescoped bound states

        sum_t mixloss_t - sum_t q . losses[t]
            <= (horizon/eta) * max_{i, t <= horizon} ln(1 / w_updated[t][i]),

    and the returned telescoping_residual is the gap between the entropy
    telescope's two exact evaluations (zero up to rounding).
    """
    l = np.asarray(losses, dtype=float)
    if l.ndim != 2:
        raise DimensionError("losses must be a (steps, experts) matrix")
    steps, n = l.shape
    w1 = validate_weights(prior)
    q = validate_weights(q)
    if w1.size != n or q.size != n:
        raise DimensionError("prior and q must have one entry per expert")
    if horizon < 1 or steps <= horizon:
        raise DomainError("need steps > horizon >= 1")
    spec = LossSpec(bound=1.0, eta=eta)

    # pending[j] is the weight vector that will act j steps from now.
    pending = [w1.copy() for _ in range(horizon)]
    updated: list[np.ndarray] = []
    mix = np.empty(steps)
    for t in range(steps):
        w_t = pending[0]
        mix[t] = mixloss(w_t, l[t], eta)
        w_up = exp_weight_update(w_t, l[t], spec)
        updated.append(w_up)
        pending = pending[1:] + [w_up]

    lhs = float(mix.sum() - q @ l.sum(axis=0))
    head = np.stack(updated[:horizon])
    support = head > 0
    if np.any(~support):
        rhs = math.inf
    else:
        rhs = (horizon / eta) * float(np.max(-np.log(head)))

    # Entropy telescope: the sum of per-step drops from step horizon+1 on
    # equals the head entropies minus the tail entropies.
    per_step = 0.0
    for t in range(horizon, steps):
        per_step += relative_entropy(q, updated[t - horizon]) - relative_entropy(q, updated[t])
    head_sum = sum(relative_entropy(q, updated[t]) for t in range(horizon))
    tail_sum = sum(relative_entropy(q, updated[t]) for t in range(steps - horizon, steps))
    residual = abs(per_step - (head_sum - tail_sum))

    slack = lhs - rhs
    return DelayedBoundCheck(
        lhs=lhs, rhs=rhs, slack=slack, passed=slack <= tol, telescoping_residual=residual
    )


def windowed_average_regret(
    algo_losses: Sequence[float],
    expert_losses: Sequence[float],
    birth_time: int,
    window: int,
) -> float:
    """Average over window offsets of the trailing excess sums.

    For offset s in 1..window, sums algo_losses[u] - expert_losses[u] over
    u = t - s + 1 with t ranging over birth_time+1..steps, treating steps
    before the expert's birth as zero excess, then averages the offsets.
    """
    h = np.asarray(algo_losses, dtype=float)
    l = np.asarray(expert_losses, dtype=float)
    if h.shape != l.shape:
        raise DimensionError("loss arrays must share one shape")
    steps = h.size
    if not (1 <= birth_time <= steps):
        raise DomainError("birth_time must fall inside the run")
    if window < 1:
        raise DomainError("window must be at least 1")
    excess = h - l
    excess[: birth_time - 1] = 0.0
    total = 0.0
    for s in range(1, window + 1):
        lo = max(birth_time + 1 - s, 0)  # 0-based index of u = birth_time + 2 - s
        hi = steps - s + 1
        if hi > lo:
            total += float(excess[lo:hi].sum())
    return total / window


class RegretLedger:
    """Streaming record of one aggregation run.

    Stores per-step aggregate and mix losses, per-expert cumulative excess
    (aggregate loss minus charged loss, summed from the expert's birth), the
    the per-step max across experts of that excess, the expert birth times and log prior
    weights, and the worst slack seen for each named online check.  Engines
    append to it as they run; reports are derived afterwards without
    replaying the run.
    """

    def __init__(self, eta: float, horizon: int) -> None:
        if eta <= 0 or horizon < 1:
            raise DomainError("need eta > 0 and horizon >= 1")
        self.eta = eta
        self.horizon = horizon
        self.algo_losses: list[float] = []
        self.mix_losses: list[float] = []
        self._total_algo = 0.0
        self._total_mix = 0.0
        self._birth_times: list[int] = []
        self._log_priors: list[float] = []
        self.cum_excess = np.zeros(0)
        self.max_excess_history: list[float] = []
        self.worst_slack: dict[str, float] = {}

    # -- expert registration -------------------------------------------------

    def register_experts(self, birth_times: Sequence[int], log_priors: Sequence[float]) -> None:
        birth_times = list(birth_times)
        log_priors = list(log_priors)
        if len(birth_times) != len(log_priors):
            raise DimensionError("birth_times and log_priors must align")
        self._birth_times.extend(birth_times)
        self._log_priors.extend(log_priors)
        self.cum_excess = np.concatenate([self.cum_excess, np.zeros(len(birth_times))])

    @property
    def n_experts(self) -> int:
        return len(self._birth_times)

    @property
    def birth_times(self) -> np.ndarray:
        return np.asarray(self._birth_times, dtype=int)

    @property
    def log_priors(self) -> np.ndarray:
        return np.asarray(self._log_priors, dtype=float)

    # -- per-step recording --------------------------------------------------

    def record_step(self, algo_loss: float, mix_loss: float) -> None:
        self.algo_losses.append(float(algo_loss))
        self.mix_losses.append(float(mix_loss))
        self._total_algo += float(algo_loss)
        self._total_mix += float(mix_loss)

    def add_excess(self, indices, amounts) -> None:
        self.cum_excess[indices] += amounts

    def note_max_excess(self) -> None:
        """Close the step: append the current max of per-expert excess."""
        self.max_excess_history.append(self.max_regret())

    def note_slack(self, check: str, slack: float) -> None:
        prev = self.worst_slack.get(check)
        if prev is None or slack > prev:
            self.worst_slack[check] = float(slack)

    # -- derived quantities --------------------------------------------------

    @property
    def steps(self) -> int:
        return len(self.algo_losses)

    def total_algo_loss(self) -> float:
        return self._total_algo

    def total_mix_loss(self) -> float:
        return self._total_mix

    def cumulative_regret(self) -> np.ndarray:
        """Per-expert cumulative excess at the current step, registration order."""
        return self.cum_excess.copy()

    def max_regret(self) -> float:
        return float(self.cum_excess.max()) if self.cum_excess.size else 0.0

    def regret_bound_slack(self, n_experts: int) -> float:
        """max over experts of (cumulative excess - run-wide closed-form cap)."""
        bound = longterm_regret_bound(n_experts, self.steps, self.horizon, self.eta)
        return self.max_regret() - bound

    def birth_bound_slack(self, n_experts: int) -> float:
        """max over experts of (cumulative excess - its birth-time-specific cap)."""
        if not self._birth_times:
            return 0.0
        births = self.birth_times.astype(float)
        rhs = (self.horizon / self.eta) * np.log(n_experts * births * (births + 1.0))
        return float(np.max(self.cum_excess - rhs))

    def telescoping_slack(self) -> float:
        """max over experts of (sum mixloss - charged loss) minus the prior cap.

        The charged loss of expert e is total_algo_loss - cum_excess[e]; the
        cap is (horizon/eta) * ln(1/prior_e).
        """
        if not self._birth_times:
            return 0.0
        base = self.total_mix_loss() - self.total_algo_loss()
        caps = -(self.horizon / self.eta) * self.log_priors
        return float(np.max(base + self.cum_excess - caps))
