"""Anytime online-to-batch conversions under delayed gradients.

Instead of querying the gradient oracle at the learner's iterates w_t,
both drivers query at the running weighted average

    x_t = sum_{i<=t} alpha_i w_i / alpha_{1:t},

which moves O(D/t) per step, so a gradient computed tau steps ago is still
nearly in-date: with linear weights |x_t - x_{t-tau}| <= 8 tau D / t.
That stability bound is asserted per step under audit.

``anytime_run`` drives a weighted-OGD learner (linearized losses
f_t(x) = g.x scaled by alpha_t).  ``optimistic_anytime_run`` drives
optimistic OGD, feeding the previously delivered gradient as the hint for
the next round (zero hint at the first round); it consumes no problem
constants beyond the domain diameter.
"""

from __future__ import annotations

import numpy as np

from .delays import DelayedOracle, DelaySchedule
from .domains import Domain
from .errors import AuditViolation, InvalidArgument, NumericError
from .learners import OgdLearner, OptimisticOgd, RegretLedger, WeightSchedule
from .problems import Problem
from .records import Recorder, RunRecord
from .rng import SeededRng


class AnytimeState:
    """Weighted running average of learner iterates, with drift control.

    The numerator sum is maintained incrementally and re-derived from the
    stored iterates at power-of-two steps, which caps floating-point drift;
    the full iterate and query histories back the re-derivation, the
    average-identity check, and the stability diagnostics.
    """

    def __init__(self, weights: WeightSchedule, dim: int):
        self.weights = weights
        self.numerator = np.zeros(dim)
        self.t = 0
        self.iterates: list[np.ndarray] = []
        self.queries: list[np.ndarray] = []
        self.last_gradient = np.zeros(dim)  # hint source, zero before any delivery

    def push(self, w: np.ndarray) -> np.ndarray:
        """Fold in w_{t+1}; returns the new average x_{t+1} (also stored)."""
        self.t += 1
        t = self.t
        self.iterates.append(w)
        self.numerator = self.numerator + self.weights.weight(t) * w
        if t & (t - 1) == 0:  # power of two: re-derive to cap drift
            self.numerator = self.exact_numerator()
        x = self.numerator / self.weights.prefix(t)
        self.queries.append(x)
        return x

    def exact_numerator(self) -> np.ndarray:
        # pairwise (vectorized) summation: an independent accumulation order
        # against which the incremental running sum is checked and reset
        stack = np.asarray(self.iterates)
        return (stack * self.weights.weight_array(self.t)[:, None]).sum(axis=0)

    def exact_average(self) -> np.ndarray:
        return self.exact_numerator() / self.weights.prefix(self.t)

    def incremental_drift(self) -> float:
        """Max-abs gap between the incremental and from-scratch averages."""
        return float(np.max(np.abs(
            self.numerator / self.weights.prefix(self.t) - self.exact_average()
        ))) if self.t else 0.0

    def query(self, step: int) -> np.ndarray:
        if not (1 <= step <= self.t):
            raise InvalidArgument(f"query x_{step} not stored (have 1..{self.t})")
        return self.queries[step - 1]


def stability_gap(state: AnytimeState, t: int, tau: int) -> float:
    """|x_t - x_{t-tau}| from the stored query history (tau=0 gives 0)."""
    if tau < 0 or tau > t - 1:
        raise InvalidArgument(f"delay {tau} invalid at step {t}")
    if tau == 0:
        return 0.0
    return float(np.linalg.norm(state.query(t) - state.query(t - tau)))


class _StabilityAuditor:
    """Per-step invariant checks shared by the two conversion drivers."""

    def __init__(self, domain: Domain, weights: WeightSchedule):
        self.domain = domain
        self.weights = weights
        self.diameter = domain.diameter()

    def check(self, state: AnytimeState, t: int, tau: int, x: np.ndarray):
        if not (0 <= tau <= t - 1):
            raise AuditViolation(f"delay {tau} outside [0, {t - 1}]", step=t,
                                 dump={"tau": tau})
        if self.weights.kind == "linear" and tau:
            diff = x - state.query(t - tau)
            gap = float(np.sqrt(diff @ diff))
            bound = 8.0 * tau * self.diameter / t + 1e-9
            if gap > bound:
                raise AuditViolation(
                    f"query drift {gap:.3e} exceeds 8*tau*D/t = {bound:.3e}",
                    step=t,
                    dump={"tau": tau, "gap": gap, "bound": bound,
                          "x_t": x.tolist(),
                          "x_origin": state.query(t - tau).tolist()},
                )
        # membership is cheap; fall back to the distance only on failure
        if not self.domain.contains(x):
            dist = float(np.linalg.norm(x - self.domain.project(x)))
            if dist > 1e-12:
                raise AuditViolation(f"average left the domain by {dist:.3e}", step=t,
                                     dump={"x": x.tolist()})
        if t & (t - 1) == 0:
            drift = state.incremental_drift()
            if drift > 1e-12:
                raise AuditViolation(
                    f"incremental average drifted {drift:.3e} from the exact sum",
                    step=t, dump={"drift": drift},
                )


def anytime_run(learner: OgdLearner, weights: WeightSchedule, problem: Problem,
                schedule: DelaySchedule, T: int, seed: int, *,
                record_every: int = 10, reference_value=None, accuracy_fn=None,
                comparator=None, audit: bool = False,
                history_bound: int | None = None) -> tuple[np.ndarray, RunRecord]:
    """Averaged-query conversion driving a weighted-OGD learner."""
    if T < 1:
        raise InvalidArgument("T must be >= 1")
    state = AnytimeState(weights, problem.dim)
    oracle = DelayedOracle(problem, schedule, SeededRng(seed), history_bound=history_bound)
    recorder = Recorder(problem, record_every, reference_value, accuracy_fn)
    ledger = RegretLedger(np.asarray(comparator, dtype=np.float64)) \
        if comparator is not None else None
    auditor = _StabilityAuditor(problem.domain, weights) if audit else None

    w = learner.w
    x = w
    aborted, reason = False, None
    try:
        for t in range(1, T + 1):
            alpha = weights.weight(t)
            x = state.push(w)
            fb = oracle.step(t, x)
            if auditor is not None:
                auditor.check(state, t, fb.delay, x)
            g = fb.gradient.g
            if ledger is not None:
                ledger.record(alpha, g, w)
            state.last_gradient = g
            w = learner.update(t, alpha, g)
            recorder.record(t, x, learner.last_step, fb.delay, force=(t == T))
    except NumericError as exc:
        aborted, reason = True, str(exc)
    record = recorder.finish(
        algorithm="anytime-sgd", T=T, seed=seed, final_point=x,
        realized_delays=oracle.realized_delays,
        regret=None if ledger is None else ledger.total,
        aborted=aborted, abort_reason=reason,
    )
    return x, record


def optimistic_anytime_run(learner: OptimisticOgd, weights: WeightSchedule,
                           problem: Problem, schedule: DelaySchedule, T: int,
                           seed: int, *, record_every: int = 10,
                           reference_value=None, accuracy_fn=None,
                           comparator=None, audit: bool = False,
                           history_bound: int | None = None
                           ) -> tuple[np.ndarray, RunRecord]:
    """Averaged-query conversion driving optimistic OGD with stale-gradient hints."""
    if T < 1:
        raise InvalidArgument("T must be >= 1")
    state = AnytimeState(weights, problem.dim)
    oracle = DelayedOracle(problem, schedule, SeededRng(seed), history_bound=history_bound)
    recorder = Recorder(problem, record_every, reference_value, accuracy_fn)
    ledger = RegretLedger(np.asarray(comparator, dtype=np.float64)) \
        if comparator is not None else None
    auditor = _StabilityAuditor(problem.domain, weights) if audit else None

    x = learner.w
    aborted, reason = False, None
    prev_eta = np.inf
    try:
        for t in range(1, T + 1):
            alpha = weights.weight(t)
            w = learner.hint_step(t, alpha, state.last_gradient)
            x = state.push(w)
            fb = oracle.step(t, x)
            if auditor is not None:
                auditor.check(state, t, fb.delay, x)
                if learner.last_eta > prev_eta * (1 + 1e-15):
                    raise AuditViolation(
                        f"adaptive step grew: {prev_eta} -> {learner.last_eta}", step=t)
                prev_eta = learner.last_eta
            g = fb.gradient.g
            if ledger is not None:
                ledger.record(alpha, g, w)
            learner.feedback_step(t, alpha, g)
            state.last_gradient = g
            recorder.record(t, x, learner.last_eta, fb.delay, force=(t == T))
    except NumericError as exc:
        aborted, reason = True, str(exc)
    record = recorder.finish(
        algorithm="optimistic-anytime", T=T, seed=seed, final_point=x,
        realized_delays=oracle.realized_delays,
        regret=None if ledger is None else ledger.total,
        aborted=aborted, abort_reason=reason,
    )
    return x, record
