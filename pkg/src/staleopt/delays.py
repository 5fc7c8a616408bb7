"""Deterministic simulation of a delayed stochastic gradient oracle.

At each server step t the optimizer registers its query point x_t and
receives back a gradient evaluated at some *earlier* query x_{t-tau},
tagged with its origin step and realized delay tau in [0, t-1].

Two modes:

* **schedule mode** -- the delay at step t is sampled directly from a
  declared distribution (constant / explicit sequence / rounded lognormal /
  integer uniform), clamped into [0, t-1], and a fresh noise draw is
  attached to the stale gradient on delivery.

* **queue mode** -- delays emerge from W simulated workers.  An idle
  worker always grabs the *newest* registered query (it reads the current
  parameter vector), serves it for its service time measured in server
  steps, and delivers on completion into a FIFO of finished gradients.
  The server consumes one delivery per step; if none is ready it reuses
  the most recently delivered gradient re-dated to the current step (its
  delay keeps growing), never a fabricated one.  At step 1, before
  anything has completed, the bootstrap feedback is a fresh gradient at
  x_1 (delay 0, matching the rule that the first gradient is undelayed).

Both modes are fully deterministic given (schedule, seed): delay and
service draws are keyed by step index (and worker index), and gradient
noise comes from a dedicated sequential stream.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidArgument, ProtocolViolation
from .problems import GradientSample, Problem
from .rng import SeededRng


@dataclass(frozen=True)
class ServiceSpec:
    """Per-job service time of a simulated worker, in server steps (>= 1)."""

    kind: str = "constant"  # constant | lognormal
    value: int = 1
    mu_log: float = 0.0
    sigma_log: float = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            if int(self.value) < 1:
                raise InvalidArgument("constant service time must be >= 1 step")
            object.__setattr__(self, "value", int(self.value))
        elif self.kind == "lognormal":
            if self.sigma_log < 0:
                raise InvalidArgument("lognormal service needs sigma_log >= 0")
        else:
            raise InvalidArgument(f"unknown service kind {self.kind!r}")

    def draw(self, gen: np.random.Generator) -> int:
        if self.kind == "constant":
            return self.value
        return max(1, int(np.rint(gen.lognormal(self.mu_log, self.sigma_log))))


@dataclass(frozen=True)
class DelaySchedule:
    """Tagged description of how gradient delays arise."""

    kind: str  # constant | sequence | lognormal | uniform | queue
    value: int = 0                      # constant
    sequence: tuple = ()                # sequence
    mu_log: float = 0.0                 # lognormal
    sigma_log: float = 0.0
    lo: int = 0                         # uniform (inclusive)
    hi: int = 0
    workers: int = 1                    # queue
    service: ServiceSpec = field(default_factory=ServiceSpec)

    def __post_init__(self):
        if self.kind == "constant":
            if int(self.value) < 0:
                raise InvalidArgument("constant delay must be >= 0")
            object.__setattr__(self, "value", int(self.value))
        elif self.kind == "sequence":
            seq = tuple(int(v) for v in self.sequence)
            if any(v < 0 for v in seq):
                raise InvalidArgument("sequence delays must be >= 0")
            object.__setattr__(self, "sequence", seq)
        elif self.kind == "lognormal":
            if self.sigma_log < 0:
                raise InvalidArgument("lognormal delay needs sigma_log >= 0")
        elif self.kind == "uniform":
            if not (0 <= self.lo <= self.hi):
                raise InvalidArgument("uniform delay needs 0 <= lo <= hi")
        elif self.kind == "queue":
            if int(self.workers) < 1:
                raise InvalidArgument("queue needs at least one worker")
            object.__setattr__(self, "workers", int(self.workers))
        else:
            raise InvalidArgument(f"unknown delay schedule kind {self.kind!r}")

    @property
    def is_queue(self) -> bool:
        return self.kind == "queue"


ZERO_DELAY = DelaySchedule(kind="constant", value=0)


def _raw_delays(schedule: DelaySchedule, gen: np.random.Generator, count: int
                ) -> np.ndarray:
    """Vectorized pre-clamp draws; positions in the stream index the steps."""
    if schedule.kind == "lognormal":
        return np.rint(gen.lognormal(schedule.mu_log, schedule.sigma_log,
                                     size=count)).astype(np.int64)
    if schedule.kind == "uniform":
        return gen.integers(schedule.lo, schedule.hi + 1, size=count)
    raise ConfigurationError(f"{schedule.kind} delays are not drawn from a stream")


def next_delay(schedule: DelaySchedule, t: int, rng: SeededRng) -> int:
    """Realized delay at step t for a schedule-mode source.

    Pure in (schedule, t, seed): repeated calls with the same step return
    the same value (the draw for step t sits at position t of the
    schedule's stream).  Lognormal draws are rounded to nearest before
    the [0, t-1] clamp.  Queue schedules have no per-step distribution.
    """
    if t < 1:
        raise InvalidArgument(f"step index must be >= 1, got {t}")
    if schedule.kind == "constant":
        raw = schedule.value
    elif schedule.kind == "sequence":
        if t > len(schedule.sequence):
            raise ConfigurationError(
                f"delay sequence of length {len(schedule.sequence)} exhausted at step {t}"
            )
        raw = schedule.sequence[t - 1]
    elif schedule.kind in ("lognormal", "uniform"):
        raw = int(_raw_delays(schedule, rng.stream(), t)[t - 1])
    else:
        raise ConfigurationError("queue-mode delays are emergent; simulate to observe them")
    return min(max(raw, 0), t - 1)


@dataclass
class DelayedFeedback:
    """A delivered gradient, tagged with where and how late it was computed."""

    gradient: GradientSample
    origin_step: int
    delay: int


@dataclass(frozen=True)
class DelayStats:
    """Summary of a realized delay sequence (population variance)."""

    mean: float
    variance: float
    max_delay: int
    histogram: dict

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "max": self.max_delay,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def delay_stats(delays) -> DelayStats:
    arr = np.asarray(list(delays), dtype=np.int64)
    if arr.size == 0:
        raise InvalidArgument("delay_stats needs a nonempty sequence")
    if np.any(arr < 0):
        raise InvalidArgument("delays must be nonnegative")
    mean = float(arr.mean())
    variance = float((arr.astype(np.float64) ** 2).mean() - mean**2)
    return DelayStats(
        mean=mean,
        variance=max(variance, 0.0),
        max_delay=int(arr.max()),
        histogram=dict(Counter(arr.tolist())),
    )


class _QueueTimer:
    """Timing core of queue mode: which origin step is consumed at step t."""

    def __init__(self, schedule: DelaySchedule, rng: SeededRng):
        self._service = schedule.service
        self._rng = rng.child("service")
        self._busy_until = [0] * schedule.workers  # 0 = idle
        self._job_origin = [0] * schedule.workers
        self._ready: deque[int] = deque()
        self._last_origin: int | None = None

    def step(self, t: int) -> tuple[int, bool]:
        """Returns (origin_step, is_new_delivery) for server step t."""
        for w in range(len(self._busy_until)):
            if self._busy_until[w] and self._busy_until[w] <= t:
                self._ready.append(self._job_origin[w])
                self._busy_until[w] = 0
        for w in range(len(self._busy_until)):
            if not self._busy_until[w]:
                self._job_origin[w] = t  # grab the newest query
                self._busy_until[w] = t + self._service.draw(self._rng.at(w, t))
        if self._ready:
            origin = self._ready.popleft()
            self._last_origin = origin
            return origin, True
        if self._last_origin is None:
            self._last_origin = t  # bootstrap: fresh gradient at the first query
            return t, True
        return self._last_origin, False  # re-dated, delay grows


class DelayedOracle:
    """Stateful delayed gradient source for one run.

    Queries must be registered in step order 1, 2, ...; each ``step`` call
    registers the query for that step and returns the feedback consumed at
    it.  All past queries are stored (optionally capped at
    ``history_bound`` most recent when a delay bound is known).
    """

    def __init__(self, problem: Problem, schedule: DelaySchedule, rng: SeededRng,
                 history_bound: int | None = None,
                 noise_stream: np.random.Generator | None = None):
        self.problem = problem
        self.schedule = schedule
        # An engine that draws noise itself (e.g. for an initial hint) passes
        # its stream in so the run consumes one sequence in one order.
        self._noise = noise_stream if noise_stream is not None else rng.child("noise").stream()
        self._delay_rng = rng.child("delay")
        # Random schedules are drawn in vectorized chunks from one stream;
        # position t-1 of the concatenated draws is step t's raw delay.
        self._delay_gen = (self._delay_rng.stream()
                           if schedule.kind in ("lognormal", "uniform") else None)
        self._delay_buf = np.zeros(0, dtype=np.int64)
        self._queue = _QueueTimer(schedule, rng.child("queue")) if schedule.is_queue else None
        self._queries: dict[int, np.ndarray] = {}
        self._history_bound = history_bound
        self._t = 0
        self._draws = 0
        self._last_sample: GradientSample | None = None
        self.realized_delays: list[int] = []
        self.delivered_count = 0

    def query_at(self, step: int) -> np.ndarray:
        try:
            return self._queries[step]
        except KeyError:
            raise InvalidArgument(
                f"query for step {step} is not stored (bound={self._history_bound})"
            ) from None

    def _fresh_sample(self, origin: int) -> GradientSample:
        self._draws += 1
        self.delivered_count += 1
        return self.problem.noisy_grad(self.query_at(origin), self._noise,
                                       sample_id=self._draws)

    def _scheduled_delay(self, t: int) -> int:
        if self.schedule.kind == "constant":
            raw = self.schedule.value
        elif self.schedule.kind == "sequence":
            if t > len(self.schedule.sequence):
                raise ConfigurationError(
                    f"delay sequence of length {len(self.schedule.sequence)} "
                    f"exhausted at step {t}"
                )
            raw = self.schedule.sequence[t - 1]
        else:
            while t > self._delay_buf.shape[0]:
                chunk = _raw_delays(self.schedule, self._delay_gen,
                                    max(1024, self._delay_buf.shape[0]))
                self._delay_buf = np.concatenate([self._delay_buf, chunk])
            raw = int(self._delay_buf[t - 1])
        return min(max(raw, 0), t - 1)

    def step(self, t: int, query) -> DelayedFeedback:
        if t != self._t + 1:
            raise ProtocolViolation(
                f"queries must be registered in order; expected step {self._t + 1}, got {t}"
            )
        self._t = t
        self._queries[t] = np.asarray(query, dtype=np.float64)
        if self._history_bound is not None and t - self._history_bound >= 1:
            self._queries.pop(t - self._history_bound, None)

        if self._queue is not None:
            origin, is_new = self._queue.step(t)
            if is_new:
                self._last_sample = self._fresh_sample(origin)
            sample = self._last_sample
            delay = t - origin
        else:
            delay = self._scheduled_delay(t)
            origin = t - delay
            sample = self._fresh_sample(origin)

        if not (0 <= delay <= t - 1):
            raise ProtocolViolation(f"realized delay {delay} outside [0, {t - 1}] at step {t}")
        self.realized_delays.append(delay)
        return DelayedFeedback(gradient=sample, origin_step=origin, delay=delay)

    def stats(self) -> DelayStats:
        return delay_stats(self.realized_delays)


def oracle_step(state: DelayedOracle, t: int, query) -> DelayedFeedback:
    """Register the step-t query and consume that step's delivery."""
    return state.step(t, query)


def realized_delays(schedule: DelaySchedule, T: int, seed: int) -> list[int]:
    """The delay sequence a T-step run would observe (timing only)."""
    if T < 1:
        raise InvalidArgument("T must be >= 1")
    root = SeededRng(seed)
    if schedule.is_queue:
        timer = _QueueTimer(schedule, root.child("queue"))
        return [t - timer.step(t)[0] for t in range(1, T + 1)]
    steps = np.arange(T, dtype=np.int64)
    if schedule.kind == "constant":
        raw = np.full(T, schedule.value, dtype=np.int64)
    elif schedule.kind == "sequence":
        if T > len(schedule.sequence):
            raise ConfigurationError(
                f"delay sequence of length {len(schedule.sequence)} exhausted at step {T}"
            )
        raw = np.asarray(schedule.sequence[:T], dtype=np.int64)
    else:
        raw = _raw_delays(schedule, root.child("delay").stream(), T)
    return np.minimum(np.maximum(raw, 0), steps).tolist()
