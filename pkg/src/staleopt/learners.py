"""Online learners driven by the run engines: weighted OGD and optimistic OGD.

Weighted online gradient descent takes steps ``w <- project(w - step * g)``
where the effective step at round t comes from one of three rules:

* ``constant``:  step = eta (the classic constant-rate baseline),
* ``decaying``:  step = c / sqrt(t),
* ``tuned``:     step = alpha_t * eta_t with eta_t = D / sqrt(t * Gsq) for
  unit weights and eta_t = D / sqrt(t^3 * Gsq) for linear weights, where
  Gsq is the combined gradient/noise power bound 2G^2 + 2 sigma^2 the rule
  must be given up front.  Both choices make the effective rate
  Theta(1/sqrt(t)); this rule deliberately requires prior knowledge and
  exists as the tuned point of comparison.

Optimistic OGD keeps a shadow sequence y_t: a hint M_t moves y_{t-1} to
the committed decision w_t, the true feedback g_t then moves y_{t-1} to
y_t, both with the adaptive rate

    eta_t = D / sqrt(1 + sum_{i<t} alpha_i^2 |g_i - M_i|^2),

so good hints keep the rate large.  The hint and feedback phases must
alternate; calling either out of order is a protocol violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import Domain
from .errors import ConfigurationError, InvalidArgument, NumericError, ProtocolViolation


@dataclass(frozen=True)
class WeightSchedule:
    """Round weights alpha_t with exact closed-form prefix sums."""

    kind: str  # uniform | linear | quadratic

    def __post_init__(self):
        if self.kind not in ("uniform", "linear", "quadratic"):
            raise InvalidArgument(f"unknown weight schedule {self.kind!r}")

    def weight(self, t: int) -> float:
        if self.kind == "uniform":
            return 1.0
        if self.kind == "linear":
            return float(t)
        return float(t * t)

    def prefix(self, t: int) -> float:
        """alpha_{1:t}, computed in exact integer arithmetic."""
        if t <= 0:
            return 0.0
        if self.kind == "uniform":
            return float(t)
        if self.kind == "linear":
            return float(t * (t + 1) // 2)
        return float(t * (t + 1) * (2 * t + 1) // 6)

    def weight_array(self, t: int) -> np.ndarray:
        """[alpha_1, ..., alpha_t] as a float vector."""
        base = np.arange(1, t + 1, dtype=np.float64)
        if self.kind == "uniform":
            return np.ones(t)
        if self.kind == "linear":
            return base
        return base * base


UNIFORM = WeightSchedule("uniform")
LINEAR = WeightSchedule("linear")
QUADRATIC = WeightSchedule("quadratic")


def make_weights(kind: str) -> WeightSchedule:
    return WeightSchedule(kind)


@dataclass(frozen=True)
class StepRule:
    """Step-size rule for weighted OGD; see the module docstring."""

    kind: str  # constant | decaying | tuned
    rate: float = 0.0          # eta for constant, c for decaying
    gbound_sq: float = 0.0     # Gsq = 2 G^2 + 2 sigma^2, tuned rule only
    diameter: float = 0.0      # D, tuned rule only

    def __post_init__(self):
        if self.kind in ("constant", "decaying"):
            if not self.rate > 0:
                raise InvalidArgument(f"{self.kind} step rule needs a positive rate")
        elif self.kind == "tuned":
            if not (self.gbound_sq > 0 and self.diameter > 0):
                raise InvalidArgument("tuned step rule needs gbound_sq > 0 and diameter > 0")
        else:
            raise InvalidArgument(f"unknown step rule {self.kind!r}")

    def base_rate(self, t: int, weights: WeightSchedule) -> float:
        """eta_t before the alpha_t factor (tuned rule only distinguishes)."""
        if self.kind == "tuned":
            if weights.kind == "uniform":
                return self.diameter / math.sqrt(t * self.gbound_sq)
            if weights.kind == "linear":
                return self.diameter / math.sqrt(t**3 * self.gbound_sq)
            raise ConfigurationError("tuned step rule supports uniform or linear weights")
        return self.rate

    def effective(self, t: int, alpha: float, weights: WeightSchedule) -> float:
        """The multiplier actually applied to the gradient at round t."""
        if self.kind == "constant":
            return self.rate
        if self.kind == "decaying":
            return self.rate / math.sqrt(t)
        return alpha * self.base_rate(t, weights)


class OgdLearner:
    """Projected online gradient descent with a pluggable step rule."""

    def __init__(self, domain: Domain, rule: StepRule, weights: WeightSchedule,
                 w0=None):
        self.domain = domain
        self.rule = rule
        self.weights = weights
        self.w = domain.project(w0 if w0 is not None else domain.center())
        self.last_step = 0.0

    def update(self, t: int, alpha: float, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=np.float64)
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient fed to OGD at round {t}")
        step = self.rule.effective(t, alpha, self.weights)
        self.last_step = step
        self.w = self.domain.project(self.w - step * g)
        return self.w


def ogd_update(state: OgdLearner, t: int, alpha: float, g, domain: Domain | None = None
               ) -> np.ndarray:
    """One weighted-OGD step; ``domain`` defaults to the learner's own."""
    if domain is not None and domain is not state.domain:
        state.domain = domain
    return state.update(t, alpha, np.asarray(g, dtype=np.float64))


class OptimisticOgd:
    """Adaptive optimistic OGD over a bounded domain (two-phase protocol)."""

    def __init__(self, domain: Domain, diameter: float | None = None, w0=None):
        self.domain = domain
        self.diameter = float(diameter if diameter is not None else domain.diameter())
        if not self.diameter > 0:
            raise InvalidArgument("optimistic OGD needs a positive diameter")
        self.y = domain.project(w0 if w0 is not None else domain.center())
        self.w = self.y.copy()
        self.hint_error_sum = 0.0  # sum of alpha_i^2 |g_i - M_i|^2 over past rounds
        self.last_eta = self.diameter
        self._expected_t = 1
        self._phase = "hint"
        self._hint: np.ndarray | None = None

    def current_eta(self) -> float:
        return self.diameter / math.sqrt(1.0 + self.hint_error_sum)

    def hint_step(self, t: int, alpha: float, hint) -> np.ndarray:
        """Commit the round-t decision w_t from the hint; returns w_t."""
        if self._phase != "hint" or t != self._expected_t:
            raise ProtocolViolation(
                f"hint_step({t}) out of order; expected {self._phase}_step({self._expected_t})"
            )
        m = np.asarray(hint, dtype=np.float64)
        eta = self.current_eta()
        self.last_eta = eta
        self.w = self.domain.project(self.y - eta * alpha * m)
        self._hint = m
        self._phase = "feedback"
        return self.w

    def feedback_step(self, t: int, alpha: float, g) -> np.ndarray:
        """Apply the round-t gradient to the shadow point; returns y_t."""
        if self._phase != "feedback" or t != self._expected_t:
            raise ProtocolViolation(
                f"feedback_step({t}) out of order; expected {self._phase}_step({self._expected_t})"
            )
        g = np.asarray(g, dtype=np.float64)
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient fed to optimistic OGD at round {t}")
        self.y = self.domain.project(self.y - self.last_eta * alpha * g)
        diff = g - self._hint
        self.hint_error_sum += alpha * alpha * float(diff @ diff)
        self._phase = "hint"
        self._expected_t = t + 1
        return self.y


def optimistic_hint_step(state: OptimisticOgd, t: int, alpha: float, hint,
                         domain: Domain | None = None) -> np.ndarray:
    return state.hint_step(t, alpha, hint)


def optimistic_feedback_step(state: OptimisticOgd, t: int, alpha: float, g,
                             domain: Domain | None = None) -> np.ndarray:
    return state.feedback_step(t, alpha, g)


@dataclass
class RegretLedger:
    """Running weighted linearized regret against a fixed comparator."""

    comparator: np.ndarray
    total: float = 0.0

    def record(self, alpha: float, g, w) -> "RegretLedger":
        self.total += alpha * float(np.asarray(g) @ (np.asarray(w) - self.comparator))
        return self


def regret_record(ledger: RegretLedger, alpha: float, g, w) -> RegretLedger:
    """Add alpha * g . (w - comparator) to the ledger."""
    return ledger.record(alpha, g, w)
