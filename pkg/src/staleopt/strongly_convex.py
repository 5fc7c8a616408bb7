"""Optimistic projected descent for strongly convex objectives.

The rate needs only the strong-convexity modulus H.  Each round defines

    eta_t = 8 / (H alpha_{1:t}),    eta~_t = alpha_t * eta_t,

takes the committed step x_t = project(y_{t-1} - eta~_t M_t) from the hint
M_t, then the shadow step y_t = project(y_{t-1} - eta~_t g_t) from the
received gradient; the output is the weighted average of the x_t.

These projected updates are the closed form of the prox subproblems

    x_t = argmin_{x in K} alpha_t M.x + |x - y_{t-1}|^2 / (2 eta_t)

and the same for y with g; ``sc_step_prox_reference`` solves those
subproblems numerically and exists solely as an independent oracle for
the equivalence test.

In the delayed variant the hint is whatever gradient the oracle delivered
at the previous server step, the feedback is the current (stale) delivery,
and the very first hint is a fresh noisy gradient at the initial point --
so with an all-zero delay schedule the delayed driver reproduces the
undelayed one bit for bit.
"""

from __future__ import annotations

import numpy as np

from .delays import DelayedOracle, DelaySchedule, ZERO_DELAY
from .domains import Domain, as_vector
from .errors import (AuditViolation, InvalidArgument, NumericError,
                     OptimizerFailure)
from .learners import WeightSchedule
from .problems import Problem
from .records import Recorder, RunRecord
from .rng import SeededRng


class ScState:
    """Iterate bundle for the strongly convex learners."""

    def __init__(self, domain: Domain, weights: WeightSchedule, strong_convexity: float,
                 y0=None):
        if not strong_convexity > 0:
            raise InvalidArgument("strong-convexity modulus must be positive")
        self.domain = domain
        self.weights = weights
        self.H = float(strong_convexity)
        self.y = domain.project(y0 if y0 is not None else domain.center())
        self.x = self.y.copy()
        self.t = 0
        self.output_numerator = np.zeros(domain.dim)
        self.last_eta = 0.0
        self.last_eta_tilde = 0.0
        self._xs: list[np.ndarray] = []

    def eta(self, t: int) -> float:
        return 8.0 / (self.H * self.weights.prefix(t))

    def eta_tilde(self, t: int) -> float:
        return self.weights.weight(t) * self.eta(t)

    def hint_phase(self, t: int, alpha: float, hint) -> np.ndarray:
        if t != self.t + 1:
            raise InvalidArgument(f"steps must advance in order; expected {self.t + 1}")
        m = as_vector(hint, self.domain.dim, "hint")
        self.last_eta = self.eta(t)
        self.last_eta_tilde = alpha * self.last_eta
        self.x = self.domain.project(self.y - self.last_eta_tilde * m)
        return self.x

    def feedback_phase(self, t: int, alpha: float, g) -> np.ndarray:
        g = as_vector(g, self.domain.dim, "gradient")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient at round {t}")
        self.y = self.domain.project(self.y - self.last_eta_tilde * g)
        self.output_numerator = self.output_numerator + alpha * self.x
        self._xs.append(self.x)
        self.t = t
        if t & (t - 1) == 0:
            self.output_numerator = self.exact_output_numerator()
        return self.y

    def exact_output_numerator(self) -> np.ndarray:
        stack = np.asarray(self._xs)
        return (stack * self.weights.weight_array(self.t)[:, None]).sum(axis=0)

    def average(self) -> np.ndarray:
        """Weighted output point over the rounds completed so far."""
        return self.output_numerator / self.weights.prefix(self.t)


def sc_step(state: ScState, t: int, alpha: float, hint, g,
            domain: Domain | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One full round in projected form; returns (x_t, y_t)."""
    x = state.hint_phase(t, alpha, hint)
    y = state.feedback_phase(t, alpha, g)
    return x, y


def _prox_argmin(domain: Domain, y_prev: np.ndarray, coeff: np.ndarray,
                 eta: float, tolerance: float) -> np.ndarray:
    """Numerically solve argmin_{z in K} coeff.z + |z - y_prev|^2 / (2 eta).

    Projected gradient with the conservative rate eta/3 is a contraction
    with factor 2/3, so the iterate gap certifies the error: we stop once
    the last move is below tolerance/2.
    """
    gamma = eta / 3.0
    z = domain.center()
    for _ in range(10_000):
        z_next = domain.project(z - gamma * (coeff + (z - y_prev) / eta))
        move = float(np.linalg.norm(z_next - z))
        z = z_next
        if move <= tolerance / 2:
            return z
    raise OptimizerFailure("prox subproblem did not converge", residual=move,
                           iterations=10_000)


def sc_step_prox_reference(state: ScState, t: int, alpha: float, hint, g,
                           domain: Domain | None = None,
                           tolerance: float = 1e-12
                           ) -> tuple[np.ndarray, np.ndarray]:
    """One full round solving the prox subproblems numerically (test oracle)."""
    if t != state.t + 1:
        raise InvalidArgument(f"steps must advance in order; expected {state.t + 1}")
    dom = domain or state.domain
    m = as_vector(hint, dom.dim, "hint")
    gv = as_vector(g, dom.dim, "gradient")
    eta = state.eta(t)
    alpha_f = float(alpha)
    x = _prox_argmin(dom, state.y, alpha_f * m, eta, tolerance)
    y = _prox_argmin(dom, state.y, alpha_f * gv, eta, tolerance)
    state.last_eta = eta
    state.last_eta_tilde = alpha_f * eta
    state.x = x
    state.y = y
    state.output_numerator = state.output_numerator + alpha_f * x
    state._xs.append(x)
    state.t = t
    return x, y


def _sc_drive(problem: Problem, weights: WeightSchedule, H: float, T: int,
              seed: int, schedule: DelaySchedule | None, *, record_every=10,
              reference_value=None, accuracy_fn=None, audit=False, y0=None,
              history_bound=None, algorithm_name="sc-optimistic"
              ) -> tuple[np.ndarray, RunRecord]:
    if T < 1:
        raise InvalidArgument("T must be >= 1")
    root = SeededRng(seed)
    noise = root.child("noise").stream()
    state = ScState(problem.domain, weights, H, y0=y0)
    recorder = Recorder(problem, record_every, reference_value, accuracy_fn)
    # First hint: fresh noisy gradient at the initial point x_0 = y_0.
    hint = problem.noisy_grad(state.y, noise, sample_id=0).g
    oracle = DelayedOracle(problem, schedule, root, history_bound=history_bound,
                           noise_stream=noise) if schedule is not None else None

    draws = 0
    xbar = state.y
    aborted, reason = False, None
    try:
        for t in range(1, T + 1):
            alpha = weights.weight(t)
            x = state.hint_phase(t, alpha, hint)
            if oracle is not None:
                fb = oracle.step(t, x)
                g, tau = fb.gradient.g, fb.delay
            else:
                draws += 1
                g, tau = problem.noisy_grad(x, noise, sample_id=draws).g, 0
            state.feedback_phase(t, alpha, g)
            hint = g
            xbar = state.average()
            if audit:
                _sc_audit(state, t, alpha, xbar)
            recorder.record(t, xbar, state.last_eta_tilde, tau, force=(t == T))
    except NumericError as exc:
        aborted, reason = True, str(exc)
    record = recorder.finish(
        algorithm=algorithm_name, T=T, seed=seed, final_point=xbar,
        realized_delays=oracle.realized_delays if oracle is not None else [0] * state.t,
        aborted=aborted, abort_reason=reason,
    )
    return xbar, record


def _sc_audit(state: ScState, t: int, alpha: float, xbar: np.ndarray):
    if state.last_eta != state.eta(t) or state.last_eta_tilde != alpha * state.eta(t):
        raise AuditViolation("step-size law eta_t = 8/(H alpha_{1:t}) broken", step=t,
                             dump={"eta": state.last_eta, "expected": state.eta(t)})
    for name, v in (("x", state.x), ("y", state.y), ("xbar", xbar)):
        dist = float(np.linalg.norm(v - state.domain.project(v)))
        if dist > 1e-12:
            raise AuditViolation(f"{name} left the domain by {dist:.3e}", step=t,
                                 dump={name: v.tolist()})
    if t & (t - 1) == 0:
        drift = float(np.max(np.abs(
            state.output_numerator - state.exact_output_numerator())))
        scale = max(1.0, float(np.max(np.abs(state.output_numerator))))
        if drift > 1e-12 * scale:
            raise AuditViolation(f"output accumulator drifted {drift:.3e}", step=t)


def sc_run(problem: Problem, weights: WeightSchedule, H: float, T: int, seed: int,
           **kwargs) -> tuple[np.ndarray, RunRecord]:
    """Undelayed strongly convex driver: fresh hint/feedback each round."""
    kwargs.setdefault("algorithm_name", "sc-optimistic")
    return _sc_drive(problem, weights, H, T, seed, None, **kwargs)


def sc_delayed_run(problem: Problem, schedule: DelaySchedule, weights: WeightSchedule,
                   H: float, T: int, seed: int, **kwargs
                   ) -> tuple[np.ndarray, RunRecord]:
    """Delayed strongly convex driver; consumes only H, no delay knowledge."""
    kwargs.setdefault("algorithm_name", "sc-optimistic-delayed")
    return _sc_drive(problem, weights, H, T, seed, schedule or ZERO_DELAY, **kwargs)
