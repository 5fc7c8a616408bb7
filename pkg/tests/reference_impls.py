"""Transparent no-delay reference implementations for degeneracy tests.

These mirror the averaged-query drivers without the delay simulator: a
fresh gradient at the current average every step, plain inline updates,
weights alpha_t = t.  They consume the same noise stream path as the
engines, and re-derive the average numerator at power-of-two steps with
the same vectorized sum, so matching runs must agree bit for bit.
"""

import math

import numpy as np

from staleopt.rng import SeededRng


def _rederived(ws):
    stack = np.asarray(ws)
    t = stack.shape[0]
    return (stack * np.arange(1, t + 1, dtype=np.float64)[:, None]).sum(axis=0)


def direct_anytime_sgd(problem, decay_rate, T, seed):
    """Averaged-query SGD with effective rate c/sqrt(t)."""
    domain = problem.domain
    noise = SeededRng(seed).child("noise").stream()
    w = domain.center()
    numerator = np.zeros(problem.dim)
    ws, xs, losses = [], [], []
    for t in range(1, T + 1):
        ws.append(w)
        numerator = numerator + t * w
        if t & (t - 1) == 0:
            numerator = _rederived(ws)
        x = numerator / (t * (t + 1) // 2)
        xs.append(x)
        g = problem.noisy_grad(x, noise, t).g
        w = domain.project(w - (decay_rate / math.sqrt(t)) * g)
        losses.append(problem.loss(x))
    return x, xs, losses


def direct_optimistic_anytime(problem, T, seed):
    """Averaged-query optimistic descent; the hint is the previous gradient."""
    domain = problem.domain
    diameter = domain.diameter()
    noise = SeededRng(seed).child("noise").stream()
    y = domain.center()
    numerator = np.zeros(problem.dim)
    hint = np.zeros(problem.dim)
    s = 0.0
    ws, xs, losses = [], [], []
    for t in range(1, T + 1):
        eta = diameter / math.sqrt(1.0 + s)
        w = domain.project(y - eta * t * hint)
        ws.append(w)
        numerator = numerator + t * w
        if t & (t - 1) == 0:
            numerator = _rederived(ws)
        x = numerator / (t * (t + 1) // 2)
        xs.append(x)
        g = problem.noisy_grad(x, noise, t).g
        y = domain.project(y - eta * t * g)
        diff = g - hint
        s += float(t * t) * float(diff @ diff)
        hint = g
        losses.append(problem.loss(x))
    return x, xs, losses
