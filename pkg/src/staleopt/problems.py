"""Objective functions, their noisy first-order oracles, and reference optima.

Two objective families:

* ``Quadratic``: f(x) = 0.5 x'Ax - b'x with A symmetric PSD, so curvature
  metadata (smoothness = largest eigenvalue, strong convexity = smallest)
  is known exactly.
* ``Logistic``: mean multiclass softmax log loss over a dataset plus an
  L2 ridge term (lambda/2)|w|^2; the flat parameter vector is the
  row-major stack of the (classes x features) weight matrix.

Noise models for the gradient oracle: ``none``, ``additive-gaussian``
(per-coordinate variance sigma^2/d so the total noise power is sigma^2),
and ``sample`` (gradient of the loss on a fresh uniformly drawn minibatch,
which is exactly the full-batch gradient when the batch is the dataset).

``constrained_optimum`` is the independent ground truth used to report
excess loss: deterministic projected gradient descent with backtracking
line search, certified by the linear-minimization duality gap
``max_z grad(x).(x - z) <= tolerance``, which upper-bounds f(x) - f*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset
from .domains import Domain, as_vector
from .errors import ConfigurationError, InvalidArgument, NumericError, OptimizerFailure


@dataclass(frozen=True)
class NoiseModel:
    """Gradient noise specification."""

    kind: str = "none"  # none | additive-gaussian | sample
    sigma: float = 0.0
    batch_size: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "additive-gaussian", "sample"):
            raise InvalidArgument(f"unknown noise kind {self.kind!r}")
        if self.kind == "additive-gaussian" and not self.sigma >= 0:
            raise InvalidArgument("additive-gaussian noise needs sigma >= 0")
        if self.kind == "sample" and self.batch_size < 1:
            raise InvalidArgument("sample noise needs batch_size >= 1")

    @property
    def variance_bound(self) -> float | None:
        """Known E|xi|^2 bound, when the model implies one."""
        if self.kind == "none":
            return 0.0
        if self.kind == "additive-gaussian":
            return self.sigma**2
        return None


NO_NOISE = NoiseModel()


@dataclass
class GradientSample:
    """One oracle answer: g evaluated at query_point, with its draw index."""

    g: np.ndarray
    query_point: np.ndarray
    sample_id: int


class Problem:
    """Base objective; concrete classes implement value and gradient."""

    domain: Domain
    noise: NoiseModel
    # metadata (None = unknown): never fed to the adaptive algorithms
    smoothness: float | None
    strong_convexity: float | None
    grad_bound: float | None
    noise_variance: float | None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def loss(self, x) -> float:
        raise NotImplementedError

    def _grad(self, x: np.ndarray) -> np.ndarray:
        """Gradient without input validation (hot path; x trusted)."""
        raise NotImplementedError

    def exact_grad(self, x) -> np.ndarray:
        return self._grad(as_vector(x, self.dim))

    def minibatch_grad(self, x, idx) -> np.ndarray:
        raise ConfigurationError("sample noise requires a dataset-backed problem")

    def noisy_grad(self, x, rng: np.random.Generator, sample_id: int = 0) -> GradientSample:
        # x feasibility/finiteness is the caller's contract; g is checked.
        x = np.asarray(x, dtype=np.float64)
        if self.noise.kind == "none":
            g = self._grad(x)
        elif self.noise.kind == "additive-gaussian":
            g = self._grad(x) + rng.normal(
                0.0, self.noise.sigma / np.sqrt(self.dim), size=self.dim
            )
        else:  # sample
            n = self.example_count
            if self.noise.batch_size > n:
                raise ConfigurationError(
                    f"batch_size {self.noise.batch_size} exceeds dataset size {n}"
                )
            if self.noise.batch_size == n:
                idx = np.arange(n)  # full batch: exact gradient, no draw
            else:
                idx = rng.choice(n, size=self.noise.batch_size, replace=False)
            g = self.minibatch_grad(x, idx)
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient at sample {sample_id}")
        return GradientSample(g=g, query_point=x, sample_id=sample_id)

    @property
    def example_count(self) -> int:
        raise ConfigurationError("problem has no dataset")


@dataclass(frozen=True)
class Quadratic(Problem):
    """f(x) = 0.5 x'Ax - b'x on the given domain."""

    matrix: np.ndarray
    linear: np.ndarray
    domain: Domain = None
    noise: NoiseModel = NO_NOISE
    smoothness: float | None = None
    strong_convexity: float | None = None
    grad_bound: float | None = None
    noise_variance: float | None = None
    kind: str = field(default="quadratic", init=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=np.float64)
        b = as_vector(self.linear, name="linear term")
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
            raise InvalidArgument("matrix must be square and match the linear term")
        if not np.allclose(a, a.T, atol=1e-10):
            raise InvalidArgument("quadratic matrix must be symmetric")
        eigs = np.linalg.eigvalsh(a)
        if eigs[0] < -1e-10:
            raise InvalidArgument(f"quadratic matrix must be PSD; min eigenvalue {eigs[0]:g}")
        if self.domain is None or self.domain.dim != b.shape[0]:
            raise InvalidArgument("domain missing or dimension mismatch")
        if self.strong_convexity is not None and eigs[0] < self.strong_convexity - 1e-9:
            raise InvalidArgument(
                f"declared strong convexity {self.strong_convexity} exceeds "
                f"min eigenvalue {eigs[0]:g}"
            )
        if self.smoothness is not None and eigs[-1] > self.smoothness + 1e-9:
            raise InvalidArgument(
                f"declared smoothness {self.smoothness} below max eigenvalue {eigs[-1]:g}"
            )
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "linear", b)
        if self.smoothness is None:
            object.__setattr__(self, "smoothness", float(max(eigs[-1], 0.0)))
        if self.strong_convexity is None:
            object.__setattr__(self, "strong_convexity", float(max(eigs[0], 0.0)))
        if self.noise_variance is None and self.noise.variance_bound is not None:
            object.__setattr__(self, "noise_variance", self.noise.variance_bound)
        if self.grad_bound is None:
            object.__setattr__(self, "grad_bound", self._grad_bound_over_domain())

    def _grad_bound_over_domain(self) -> float:
        # |Ax - b| <= |A| (|center| + D) + |b|: loose but valid on all of K.
        reach = float(np.linalg.norm(self.domain.center())) + self.domain.diameter()
        return float(self.smoothness * reach + np.linalg.norm(self.linear))

    def loss(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(0.5 * x @ self.matrix @ x - self.linear @ x)

    def _grad(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x - self.linear


@dataclass(frozen=True)
class Logistic(Problem):
    """Mean softmax cross-entropy over a dataset, plus (lam/2)|w|^2.

    Parameters are the flat row-major stack of the (classes, features)
    weight matrix; with lam > 0 the objective is lam-strongly convex.
    """

    dataset: Dataset
    classes: int
    regularization: float = 0.0
    domain: Domain = None
    noise: NoiseModel = NO_NOISE
    holdout: Dataset | None = None
    smoothness: float | None = None
    strong_convexity: float | None = None
    grad_bound: float | None = None
    noise_variance: float | None = None
    kind: str = field(default="logistic", init=False)

    def __post_init__(self):
        if self.classes < 2:
            raise InvalidArgument("logistic model needs at least 2 classes")
        if self.regularization < 0:
            raise InvalidArgument("regularization must be nonnegative")
        self.dataset.validate_classes(self.classes)
        if self.holdout is not None:
            self.holdout.validate_classes(self.classes)
        expected = self.classes * self.dataset.feature_count
        if self.domain is None or self.domain.dim != expected:
            raise InvalidArgument(
                f"domain dimension must be classes*features = {expected}"
            )
        if self.strong_convexity is None and self.regularization > 0:
            object.__setattr__(self, "strong_convexity", float(self.regularization))
        if self.noise_variance is None and self.noise.variance_bound is not None:
            object.__setattr__(self, "noise_variance", self.noise.variance_bound)

    @property
    def example_count(self) -> int:
        return self.dataset.example_count

    def _weights(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.float64).reshape(self.classes, self.dataset.feature_count)

    def _probs(self, w_mat, features) -> np.ndarray:
        scores = features @ w_mat.T
        scores -= scores.max(axis=1, keepdims=True)
        np.exp(scores, out=scores)
        scores /= scores.sum(axis=1, keepdims=True)
        return scores

    def loss(self, x) -> float:
        x = as_vector(x, self.dim)
        w = self._weights(x)
        p = self._probs(w, self.dataset.features)
        picked = p[np.arange(self.dataset.example_count), self.dataset.labels]
        nll = -float(np.mean(np.log(np.maximum(picked, 1e-300))))
        return nll + 0.5 * self.regularization * float(x @ x)

    def _grad_on(self, x, features, labels) -> np.ndarray:
        w = self._weights(x)
        p = self._probs(w, features)
        p[np.arange(labels.shape[0]), labels] -= 1.0
        grad_mat = p.T @ features / labels.shape[0]
        return grad_mat.ravel() + self.regularization * x

    def _grad(self, x: np.ndarray) -> np.ndarray:
        return self._grad_on(x, self.dataset.features, self.dataset.labels)

    def minibatch_grad(self, x, idx) -> np.ndarray:
        return self._grad_on(x, self.dataset.features[idx], self.dataset.labels[idx])

    def accuracy(self, x, dataset: Dataset | None = None) -> float:
        """Fraction of examples whose argmax score matches the label."""
        ds = dataset if dataset is not None else (self.holdout or self.dataset)
        scores = ds.features @ self._weights(x).T
        return float(np.mean(scores.argmax(axis=1) == ds.labels))


# --- module-level operation surface ------------------------------------------


def exact_grad(problem: Problem, x) -> np.ndarray:
    return problem.exact_grad(x)


def noisy_grad(problem: Problem, x, rng: np.random.Generator,
               sample_id: int = 0) -> GradientSample:
    return problem.noisy_grad(x, rng, sample_id)


def loss(problem: Problem, x) -> float:
    return problem.loss(x)


def constrained_optimum(problem: Problem, tolerance: float = 1e-9,
                        max_iterations: int = 2_000_000) -> tuple[np.ndarray, float]:
    """Reference optimum by deterministic projected gradient with line search.

    Runs until the duality gap ``max_z grad(x).(x - z)`` over the domain
    drops below ``tolerance``, which certifies f(x) - f* <= tolerance.
    Never uses the stochastic machinery under test.
    """
    if tolerance <= 0:
        raise InvalidArgument("tolerance must be positive")
    domain = problem.domain
    x = domain.center()
    fx = problem.loss(x)
    step = 1.0
    gap = np.inf
    for iteration in range(max_iterations):
        g = problem.exact_grad(x)
        gap = float(g @ x - g @ domain.linear_minimizer(g))
        if gap <= tolerance:
            return x, fx
        # Backtracking sufficient-decrease search along the projected path.
        step *= 1.25
        for _ in range(60):
            cand = domain.project(x - step * g)
            fc = problem.loss(cand)
            delta = cand - x
            if fc <= fx + g @ delta + (delta @ delta) / (2 * step) + 1e-15 * abs(fx):
                break
            step *= 0.5
        else:
            raise OptimizerFailure(
                "line search stalled in constrained_optimum",
                residual=gap, iterations=iteration,
            )
        if not np.isfinite(fc):
            raise NumericError("objective became non-finite in constrained_optimum")
        x, fx = cand, fc
    raise OptimizerFailure(
        f"constrained_optimum: duality gap {gap:g} above tolerance {tolerance:g} "
        f"after {max_iterations} iterations",
        residual=gap, iterations=max_iterations,
    )
