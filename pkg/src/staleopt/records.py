"""Run traces: sampled metric series plus final summary for one experiment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .delays import DelayStats, delay_stats
from .errors import InvalidArgument
from .rng import RNG_ALGORITHM

CSV_COLUMNS = ("t", "excess_loss", "accuracy", "eta", "tau")


@dataclass
class RunRecord:
    """Everything observable about one run.

    The sampled series is strictly increasing in t; ``excess_loss`` is
    measured against ``reference_value`` (NaN when no reference is known)
    and ``accuracy`` is NaN for problems without a held-out metric.
    """

    algorithm: str
    T: int
    seed: int
    steps: np.ndarray
    loss: np.ndarray
    excess_loss: np.ndarray
    accuracy: np.ndarray
    eta: np.ndarray
    tau: np.ndarray
    final_point: np.ndarray
    final_loss: float
    final_excess: float
    final_accuracy: float
    delay_stats: DelayStats
    reference_value: float | None = None
    regret: float | None = None
    aborted: bool = False
    abort_reason: str | None = None
    wall_time: float = 0.0
    config_hash: str = ""
    rng_name: str = RNG_ALGORITHM
    extra: dict = field(default_factory=dict)

    def csv_lines(self):
        """Deterministic CSV serialization (shortest round-trip floats)."""
        yield ",".join(CSV_COLUMNS)
        for i in range(self.steps.shape[0]):
            yield (
                f"{int(self.steps[i])},{float(self.excess_loss[i])!r},"
                f"{float(self.accuracy[i])!r},{float(self.eta[i])!r},"
                f"{int(self.tau[i])}"
            )

    def summary(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "T": self.T,
            "seed": self.seed,
            "final": {
                "t": int(self.steps[-1]) if self.steps.size else 0,
                "loss": self.final_loss,
                "excess_loss": self.final_excess,
                "accuracy": self.final_accuracy,
            },
            "reference_value": self.reference_value,
            "regret": self.regret,
            "delay_stats": self.delay_stats.as_dict(),
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "wall_time_s": self.wall_time,
            "config_hash": self.config_hash,
            "rng": self.rng_name,
            "series_length": int(self.steps.shape[0]),
        }
        out.update(self.extra)
        return out


class Recorder:
    """Collects the sampled series during a run and builds the RunRecord.

    ``record_every`` bounds memory: step 1, every multiple of it, and the
    forced final step are kept.  Metric evaluation happens only on recorded
    steps, so the engines stay cheap between samples.
    """

    def __init__(self, problem, record_every: int = 10, reference=None,
                 accuracy_fn=None):
        if record_every < 1:
            raise InvalidArgument("record_every must be >= 1")
        self.problem = problem
        self.every = int(record_every)
        self.reference = None if reference is None else float(reference)
        self.accuracy_fn = accuracy_fn
        self._t, self._loss, self._acc, self._eta, self._tau = [], [], [], [], []

    def _metrics(self, point):
        lv = self.problem.loss(point)
        acc = float("nan") if self.accuracy_fn is None else float(self.accuracy_fn(point))
        return lv, acc

    def record(self, t: int, point, eta: float, tau: int, force: bool = False):
        if not (force or t == 1 or t % self.every == 0):
            return
        if self._t and self._t[-1] == t:
            return
        lv, acc = self._metrics(point)
        self._t.append(t)
        self._loss.append(lv)
        self._acc.append(acc)
        self._eta.append(float(eta))
        self._tau.append(int(tau))

    def finish(self, *, algorithm: str, T: int, seed: int, final_point,
               realized_delays, regret=None, aborted=False,
               abort_reason=None, extra=None) -> RunRecord:
        loss = np.asarray(self._loss, dtype=np.float64)
        ref = self.reference
        excess = loss - ref if ref is not None else np.full_like(loss, np.nan)
        final_loss, final_acc = self._metrics(final_point)
        return RunRecord(
            algorithm=algorithm,
            T=T,
            seed=seed,
            steps=np.asarray(self._t, dtype=np.int64),
            loss=loss,
            excess_loss=excess,
            accuracy=np.asarray(self._acc, dtype=np.float64),
            eta=np.asarray(self._eta, dtype=np.float64),
            tau=np.asarray(self._tau, dtype=np.int64),
            final_point=np.asarray(final_point, dtype=np.float64),
            final_loss=final_loss,
            final_excess=(final_loss - ref) if ref is not None else float("nan"),
            final_accuracy=final_acc,
            delay_stats=delay_stats(realized_delays) if len(realized_delays) else
            DelayStats(0.0, 0.0, 0, {}),
            reference_value=ref,
            regret=regret,
            aborted=aborted,
            abort_reason=abort_reason,
            extra=extra or {},
        )
