"""staleopt: delay-robust stochastic convex optimization at desk scale.

Library layers, bottom up: feasible-set geometry (`domains`), objectives
and noisy oracles (`problems`, `datasets`), the stale-gradient simulator
(`delays`), online learners (`learners`), the averaged-query conversion
drivers (`anytime`), strongly convex drivers (`strongly_convex`),
iterate-query baselines (`baselines`), and the config-driven experiment
harness (`harness`) with its CLI (`staleopt` entry point).
"""

from .anytime import AnytimeState, anytime_run, optimistic_anytime_run, stability_gap
from .baselines import ogd_delayed_run
from .datasets import Dataset, load_csv, load_dataset, load_idx, synth_classification
from .delays import (DelayedFeedback, DelayedOracle, DelaySchedule, DelayStats,
                     ServiceSpec, ZERO_DELAY, delay_stats, next_delay, oracle_step,
                     realized_delays)
from .domains import (Ball, Box, Domain, HalfspacePolytope, Simplex, center,
                      diameter, make_domain, project)
from .errors import (AuditViolation, ConfigurationError, InvalidArgument,
                     InvalidComparison, InvalidLabel, MalformedInput, NumericError,
                     OptimizerFailure, ProtocolViolation, StaleOptError,
                     UnsupportedDomain)
from .harness import compare, run, run_config, sweep, write_run, write_sweep
from .learners import (OgdLearner, OptimisticOgd, RegretLedger, StepRule,
                       WeightSchedule, make_weights, ogd_update,
                       optimistic_feedback_step, optimistic_hint_step, regret_record)
from .problems import (GradientSample, Logistic, NoiseModel, Problem, Quadratic,
                       constrained_optimum, exact_grad, loss, noisy_grad)
from .records import RunRecord
from .rng import RNG_ALGORITHM, SeededRng
from .strongly_convex import (ScState, sc_delayed_run, sc_run, sc_step,
                              sc_step_prox_reference)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
