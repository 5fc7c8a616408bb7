import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import staleopt as so
from staleopt.errors import (ConfigurationError, InvalidArgument, NumericError,
                             ProtocolViolation)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["uniform", "linear", "quadratic"]), st.integers(1, 5000))
def test_weight_prefix_closed_forms(kind, t):
    ws = so.make_weights(kind)
    assert ws.prefix(t) == sum(ws.weight(i) for i in range(1, t + 1))
    assert ws.prefix(t) - ws.prefix(t - 1) == ws.weight(t)


def test_weight_schedule_validation():
    with pytest.raises(InvalidArgument):
        so.make_weights("cubic")


class TestOgd:
    def box(self):
        return so.Box([-1.0], [1.0])

    def test_zero_gradient_fixed_point(self):
        learner = so.OgdLearner(self.box(), so.StepRule("constant", rate=0.5),
                                so.make_weights("uniform"), w0=np.array([0.25]))
        w = so.ogd_update(learner, 1, 1.0, np.array([0.0]))
        np.testing.assert_array_equal(w, [0.25])

    def test_clamped_step(self):
        # effective step 0.5 on gradient 3 from the origin: raw point -1.5
        learner = so.OgdLearner(self.box(), so.StepRule("constant", rate=0.5),
                                so.make_weights("uniform"), w0=np.array([0.0]))
        w = so.ogd_update(learner, 1, 1.0, np.array([3.0]))
        np.testing.assert_array_equal(w, [-1.0])

    def test_tuned_rule_values(self):
        rule = so.StepRule("tuned", gbound_sq=4.0, diameter=1.0)
        uniform = so.make_weights("uniform")
        linear = so.make_weights("linear")
        assert rule.base_rate(4, uniform) == pytest.approx(0.25)
        assert rule.effective(4, 1.0, uniform) == pytest.approx(0.25)
        # with per-round weight t the base rate picks up the t^3 scaling
        assert rule.base_rate(4, linear) == pytest.approx(1 / math.sqrt(4**3 * 4))
        assert rule.effective(4, 4.0, linear) == pytest.approx(4 / math.sqrt(4**3 * 4))
        # both choices give the same effective 1/sqrt(t) rate
        for t in (1, 7, 100):
            assert rule.effective(t, 1.0, uniform) == pytest.approx(
                rule.effective(t, float(t), linear))

    def test_decaying_rule(self):
        rule = so.StepRule("decaying", rate=0.8)
        assert rule.effective(16, 123.0, so.make_weights("linear")) == pytest.approx(0.2)

    def test_tuned_rejects_quadratic_weights(self):
        rule = so.StepRule("tuned", gbound_sq=1.0, diameter=1.0)
        with pytest.raises(ConfigurationError):
            rule.effective(2, 4.0, so.make_weights("quadratic"))

    def test_non_finite_gradient_aborts(self):
        learner = so.OgdLearner(self.box(), so.StepRule("constant", rate=0.5),
                                so.make_weights("uniform"))
        with pytest.raises(NumericError):
            learner.update(1, 1.0, np.array([np.inf]))

    def test_iterates_stay_feasible(self, rng):
        dom = so.Simplex(4, 1.0)
        learner = so.OgdLearner(dom, so.StepRule("decaying", rate=0.3),
                                so.make_weights("uniform"))
        for t in range(1, 200):
            w = learner.update(t, 1.0, rng.normal(size=4))
            assert dom.contains(w)

    def test_rule_validation(self):
        with pytest.raises(InvalidArgument):
            so.StepRule("constant", rate=0.0)
        with pytest.raises(InvalidArgument):
            so.StepRule("tuned", gbound_sq=0.0, diameter=1.0)
        with pytest.raises(InvalidArgument):
            so.StepRule("mystery", rate=1.0)


class TestOptimistic:
    def box(self):
        return so.Box([-1.0], [1.0])

    def test_first_step_rate_is_diameter(self):
        dom = so.Ball(np.zeros(2), 1.0)
        learner = so.OptimisticOgd(dom)  # D = 2
        m = np.array([0.4, 0.0])
        w = learner.hint_step(1, 1.0, m)
        assert learner.last_eta == pytest.approx(2.0)
        np.testing.assert_allclose(w, dom.project(-2.0 * m))

    def test_zero_hint_keeps_anchor(self):
        learner = so.OptimisticOgd(self.box(), w0=np.array([0.5]))
        w = learner.hint_step(1, 3.0, np.array([0.0]))
        np.testing.assert_array_equal(w, [0.5])

    def test_rate_after_one_unit_error(self):
        learner = so.OptimisticOgd(self.box(), diameter=1.0, w0=np.array([0.0]))
        learner.hint_step(1, 1.0, np.array([0.0]))
        learner.feedback_step(1, 1.0, np.array([np.sqrt(3.0)]))  # S += 3
        learner.hint_step(2, 1.0, np.array([0.0]))
        assert learner.last_eta == pytest.approx(0.5)

    def test_golden_two_step_trace(self):
        # scripted rounds (alpha, M, g) = (1, 0, 1) then (2, 1, 1) on [-1, 1]:
        #   round 1: eta=2, w1=0, y1=clip(-2)=-1, S=1
        #   round 2: eta=2/sqrt(2), w2=clip(-1-2*sqrt(2))=-1, y2=-1, S stays 1
        learner = so.OptimisticOgd(self.box(), w0=np.array([0.0]))
        assert learner.diameter == 2.0
        w1 = learner.hint_step(1, 1.0, np.array([0.0]))
        eta1 = learner.last_eta
        y1 = learner.feedback_step(1, 1.0, np.array([1.0]))
        w2 = learner.hint_step(2, 2.0, np.array([1.0]))
        eta2 = learner.last_eta
        y2 = learner.feedback_step(2, 2.0, np.array([1.0]))
        assert (w1[0], y1[0], eta1) == (0.0, -1.0, 2.0)
        assert learner.hint_error_sum == 1.0
        assert eta2 == pytest.approx(2.0 / math.sqrt(2.0))
        assert (w2[0], y2[0]) == (-1.0, -1.0)

    def test_perfect_hints_keep_rate_maximal(self, rng):
        dom = so.Ball(np.zeros(3), 1.0)
        learner = so.OptimisticOgd(dom)
        for t in range(1, 100):
            g = rng.normal(size=3)
            learner.hint_step(t, float(t), g)
            learner.feedback_step(t, float(t), g)
        assert learner.hint_error_sum == 0.0
        assert learner.current_eta() == learner.diameter

    def test_rate_monotone_nonincreasing(self, rng):
        learner = so.OptimisticOgd(so.Ball(np.zeros(2), 1.0))
        prev = np.inf
        for t in range(1, 200):
            learner.hint_step(t, 1.0, rng.normal(size=2))
            assert learner.last_eta <= prev
            prev = learner.last_eta
            learner.feedback_step(t, 1.0, rng.normal(size=2))

    def test_protocol_enforced(self):
        learner = so.OptimisticOgd(self.box())
        with pytest.raises(ProtocolViolation):
            learner.feedback_step(1, 1.0, np.array([0.1]))
        learner.hint_step(1, 1.0, np.array([0.1]))
        with pytest.raises(ProtocolViolation):
            learner.hint_step(1, 1.0, np.array([0.1]))
        learner.feedback_step(1, 1.0, np.array([0.1]))
        with pytest.raises(ProtocolViolation):
            learner.feedback_step(2, 1.0, np.array([0.1]))

    def test_module_level_ops(self):
        learner = so.OptimisticOgd(self.box())
        so.optimistic_hint_step(learner, 1, 1.0, np.array([0.0]))
        so.optimistic_feedback_step(learner, 1, 1.0, np.array([0.2]))
        assert learner.hint_error_sum > 0


class TestRegretLedger:
    def test_zero_against_self(self, rng):
        w = rng.normal(size=3)
        ledger = so.RegretLedger(comparator=w.copy())
        for _ in range(5):
            so.regret_record(ledger, 2.0, rng.normal(size=3), w)
        assert ledger.total == 0.0

    def test_single_step_value(self):
        ledger = so.RegretLedger(comparator=np.array([-2.0, 0.0]))
        so.regret_record(ledger, 2.0, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
        assert ledger.total == pytest.approx(6.0)

    @pytest.mark.parametrize("weights_kind", ["uniform", "linear"])
    def test_tuned_ogd_beats_worst_case_bound(self, weights_kind):
        # adversarial scripted losses: the gradient always pushes the iterate
        # away from where it stands, the worst case for online descent
        T, G = 100, 1.0
        dom = so.Box([-1.0], [1.0])
        diameter, gsq = 2.0, 2 * G * G  # no noise
        weights = so.make_weights(weights_kind)
        rule = so.StepRule("tuned", gbound_sq=gsq, diameter=diameter)
        learner = so.OgdLearner(dom, rule, weights, w0=np.array([0.0]))
        grads, iterates = [], []
        for t in range(1, T + 1):
            w = learner.w.copy()
            g = np.array([G if w[0] >= 0 else -G])
            iterates.append(w)
            grads.append(g)
            learner.update(t, weights.weight(t), g)
        # best fixed comparator in hindsight (an endpoint of the interval)
        totals = {end: sum(weights.weight(t + 1) * grads[t][0] * end
                           for t in range(T)) for end in (-1.0, 1.0)}
        comparator = np.array([min(totals, key=totals.get)])
        ledger = so.RegretLedger(comparator=comparator)
        for t in range(T):
            ledger.record(weights.weight(t + 1), grads[t], iterates[t])
        if weights_kind == "uniform":
            bound = 3 * diameter * math.sqrt(T * gsq)
        else:
            bound = 2 * diameter * T**1.5 * math.sqrt(gsq)
        assert 0 <= ledger.total <= bound
