"""Non-averaged baselines: projected (O)GD fed stale gradients at its iterates.

These are the tuned points of comparison: the oracle is queried at the
iterate w_t itself, so the delivered gradient at step t was computed at
w_{t-tau_t} and the method inherits the usual sensitivity to delays and
to the step size.  Metrics are measured at the iterate; the run's output
point is the final iterate.
"""

from __future__ import annotations

import numpy as np

from .delays import DelayedOracle, DelaySchedule
from .errors import InvalidArgument, NumericError
from .learners import OgdLearner, RegretLedger, StepRule, WeightSchedule
from .problems import Problem
from .records import Recorder, RunRecord
from .rng import SeededRng


def ogd_delayed_run(rule: StepRule, weights: WeightSchedule, problem: Problem,
                    schedule: DelaySchedule, T: int, seed: int, *,
                    record_every: int = 10, reference_value=None,
                    accuracy_fn=None, comparator=None, w0=None,
                    history_bound: int | None = None,
                    algorithm_name: str | None = None
                    ) -> tuple[np.ndarray, RunRecord]:
    if T < 1:
        raise InvalidArgument("T must be >= 1")
    learner = OgdLearner(problem.domain, rule, weights, w0=w0)
    oracle = DelayedOracle(problem, schedule, SeededRng(seed), history_bound=history_bound)
    recorder = Recorder(problem, record_every, reference_value, accuracy_fn)
    ledger = RegretLedger(np.asarray(comparator, dtype=np.float64)) \
        if comparator is not None else None

    aborted, reason = False, None
    max_grad_sq = 0.0
    try:
        for t in range(1, T + 1):
            alpha = weights.weight(t)
            w = learner.w
            fb = oracle.step(t, w)
            g = fb.gradient.g
            max_grad_sq = max(max_grad_sq, float(g @ g))
            if ledger is not None:
                ledger.record(alpha, g, w)
            recorder.record(t, w, rule.effective(t, alpha, weights), fb.delay,
                            force=(t == T))
            learner.update(t, alpha, g)
    except NumericError as exc:
        aborted, reason = True, str(exc)
    name = algorithm_name or ("sgd-constant" if rule.kind == "constant" else "ogd-tuned")
    record = recorder.finish(
        algorithm=name, T=T, seed=seed, final_point=learner.w,
        realized_delays=oracle.realized_delays,
        regret=None if ledger is None else ledger.total,
        aborted=aborted, abort_reason=reason,
        extra={"max_grad_norm": float(np.sqrt(max_grad_sq))},
    )
    return learner.w, record
