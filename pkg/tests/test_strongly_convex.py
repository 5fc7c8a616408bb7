import numpy as np
import pytest

import staleopt as so
from staleopt.errors import InvalidArgument
from staleopt.strongly_convex import ScState

QUAD = so.make_weights("quadratic")


def rotation(dim, seed=3):
    gen = so.SeededRng(seed).child("mk").stream()
    q, r = np.linalg.qr(gen.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


def make_sc_quadratic(dim=6, h=1.0, l=4.0, b_scale=1.5, sigma=0.0, b_axis=2):
    q = rotation(dim)
    a = (q * np.linspace(h, l, dim)) @ q.T
    a = 0.5 * (a + a.T)
    noise = (so.NoiseModel("additive-gaussian", sigma=sigma) if sigma
             else so.NoiseModel())
    return so.Quadratic(matrix=a, linear=b_scale * q[:, b_axis],
                        domain=so.Ball(np.zeros(dim), 1.0), noise=noise)


class TestScStep:
    def box(self):
        return so.Box([-1.0], [1.0])

    def test_rate_substitution(self):
        state = ScState(self.box(), QUAD, strong_convexity=2.0)
        # alpha_t = t^2: at t=2 the effective rate is 8*4 / (H*5)
        assert state.eta_tilde(2) == pytest.approx(32.0 / (5 * 2.0))
        assert state.eta(1) == pytest.approx(8.0 / 2.0)

    def test_zero_inputs_hold_position(self):
        state = ScState(self.box(), QUAD, 1.0, y0=np.array([0.5]))
        x, y = so.sc_step(state, 1, 1.0, np.array([0.0]), np.array([0.0]))
        assert x[0] == 0.5 and y[0] == 0.5

    def test_clamped_one_dimensional_round(self):
        # H = 8, t = 1: effective rate 1; hint +2 clamps x to -1, gradient -2
        # sends y to +1
        state = ScState(self.box(), QUAD, 8.0, y0=np.array([0.0]))
        assert state.eta_tilde(1) == pytest.approx(1.0)
        x, y = so.sc_step(state, 1, 1.0, np.array([2.0]), np.array([-2.0]))
        assert (x[0], y[0]) == (-1.0, 1.0)

    def test_step_size_law(self):
        state = ScState(self.box(), QUAD, 0.7)
        gen = np.random.Generator(np.random.Philox(key=1))
        for t in range(1, 50):
            alpha = QUAD.weight(t)
            so.sc_step(state, t, alpha, gen.normal(size=1), gen.normal(size=1))
            assert state.last_eta == state.eta(t)
            assert state.last_eta_tilde == alpha * state.eta(t)
            assert abs(state.last_eta * 0.7 * QUAD.prefix(t) - 8.0) <= 1e-12 * 8.0
            assert abs(state.last_eta_tilde / state.last_eta - alpha) <= 1e-12 * alpha

    def test_rates_strictly_decreasing(self):
        state = ScState(self.box(), QUAD, 1.0)
        etas = [state.eta(t) for t in range(1, 100)]
        assert all(a > b for a, b in zip(etas, etas[1:]))

    def test_invalid_strong_convexity(self):
        with pytest.raises(InvalidArgument):
            ScState(self.box(), QUAD, 0.0)

    def test_output_average_two_rounds(self):
        # alpha_t = t^2: the running output after two rounds is (x1 + 4 x2)/5
        dom = so.Ball(np.zeros(2), 5.0)
        state = ScState(dom, QUAD, 1.0)
        gen = np.random.Generator(np.random.Philox(key=7))
        x1, _ = so.sc_step(state, 1, 1.0, gen.normal(size=2), gen.normal(size=2))
        x2, _ = so.sc_step(state, 2, 4.0, gen.normal(size=2), gen.normal(size=2))
        np.testing.assert_allclose(state.average(), (x1 + 4 * x2) / 5, atol=1e-15)

    def test_output_average_matches_recomputation(self):
        dom = so.Ball(np.zeros(3), 1.0)
        state = ScState(dom, QUAD, 1.0)
        gen = np.random.Generator(np.random.Philox(key=9))
        for t in range(1, 200):
            so.sc_step(state, t, QUAD.weight(t), gen.normal(size=3),
                       gen.normal(size=3))
        exact = state.exact_output_numerator() / QUAD.prefix(state.t)
        assert np.max(np.abs(state.average() - exact)) <= 1e-12
        assert dom.contains(state.average())


class TestProxEquivalence:
    def test_interior_case_is_plain_step(self):
        dom = so.Ball(np.zeros(2), 100.0)
        state = ScState(dom, QUAD, 1.0, y0=np.array([1.0, -2.0]))
        m = np.array([0.3, 0.4])
        g = np.array([-0.1, 0.2])
        x, y = so.sc_step_prox_reference(state, 1, 1.0, m, g, tolerance=1e-13)
        eta = 8.0
        np.testing.assert_allclose(x, np.array([1.0, -2.0]) - eta * m, atol=1e-9)
        np.testing.assert_allclose(y, np.array([1.0, -2.0]) - eta * g, atol=1e-9)

    def test_active_constraint_case(self):
        dom = so.Box([-1.0], [1.0])
        state = ScState(dom, QUAD, 8.0, y0=np.array([0.0]))
        x, y = so.sc_step_prox_reference(state, 1, 1.0, np.array([2.0]),
                                         np.array([-2.0]), tolerance=1e-13)
        assert x[0] == pytest.approx(-1.0, abs=1e-10)
        assert y[0] == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("domain_maker", [
        lambda: so.Ball(np.full(3, 0.1), 1.0),
        lambda: so.Box([-1.0, -0.5, 0.0], [1.0, 0.5, 2.0]),
    ])
    def test_parallel_runs_agree(self, domain_maker):
        dom = domain_maker()
        a = ScState(dom, QUAD, 1.3)
        b = ScState(dom, QUAD, 1.3)
        gen = np.random.Generator(np.random.Philox(key=21))
        worst = 0.0
        for t in range(1, 200):
            alpha = QUAD.weight(t)
            m = gen.normal(size=3)
            g = gen.normal(size=3)
            xa, ya = so.sc_step(a, t, alpha, m, g)
            xb, yb = so.sc_step_prox_reference(b, t, alpha, m, g, tolerance=1e-12)
            worst = max(worst, float(np.max(np.abs(xa - xb))),
                        float(np.max(np.abs(ya - yb))))
        assert worst <= 1e-9


class TestScRuns:
    def test_zero_delay_bit_identical(self):
        prob = make_sc_quadratic(sigma=0.2)
        x3, r3 = so.sc_run(prob, QUAD, 1.0, 800, seed=13)
        x4, r4 = so.sc_delayed_run(prob, so.ZERO_DELAY, QUAD, 1.0, 800, seed=13)
        assert x3.tobytes() == x4.tobytes()
        assert r3.loss.tobytes() == r4.loss.tobytes()

    def test_weighted_average_output(self):
        prob = make_sc_quadratic()
        x, rec = so.sc_delayed_run(prob, so.ZERO_DELAY, QUAD, 1.0, 100, seed=3)
        assert prob.domain.contains(x) or \
            np.linalg.norm(x - prob.domain.project(x)) <= 1e-12

    def test_delay_degrades_boundedly(self):
        # paired comparison; excess below the reference tolerance floors to it
        prob = make_sc_quadratic(h=1.0, l=4.0)
        _, fstar = so.constrained_optimum(prob, 1e-12)
        floor = 1e-10
        excess = {}
        for tau in (0, 10):
            sched = so.DelaySchedule("constant", value=tau)
            _, rec = so.sc_delayed_run(prob, sched, QUAD, 1.0, 10_000, seed=11,
                                       reference_value=fstar)
            excess[tau] = max(rec.final_excess, floor)
        assert excess[10] <= 10.0 * excess[0]

    def test_consumes_only_strong_convexity(self):
        prob = make_sc_quadratic(sigma=0.1)
        sched = so.DelaySchedule("queue", workers=2,
                                 service=so.ServiceSpec("constant", 3))
        x, rec = so.sc_delayed_run(prob, sched, QUAD, 1.0, 500, seed=2, audit=True)
        assert np.isfinite(rec.final_loss)
        assert rec.delay_stats.max_delay >= 1

    def test_audit_mode_accepts_clean_run(self):
        prob = make_sc_quadratic(sigma=0.3)
        so.sc_delayed_run(prob, so.DelaySchedule("constant", value=7), QUAD, 1.0,
                          600, seed=4, audit=True)
