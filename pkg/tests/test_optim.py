"""Optimizer update rules against scalar trajectories computed in the test."""

import math

import numpy as np
import pytest

from werprobe import engine as E
from werprobe.errors import ConfigError


def scalar_adam_trajectory(x0, grad_of, steps, lr=0.001, b1=0.9, b2=0.999, eps=1e-8):
    """Plain-float Adam recurrence, the oracle for the array implementation."""
    x, m, v = x0, 0.0, 0.0
    history = []
    for t in range(1, steps + 1):
        g = grad_of(x)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        x = x - lr * m_hat / (math.sqrt(v_hat) + eps)
        history.append(x)
    return history


def scalar_adadelta_trajectory(x0, grad_of, steps, rho=0.95, eps=1e-6, lr=1.0):
    x, eg, eu = x0, 0.0, 0.0
    history = []
    for _ in range(steps):
        g = grad_of(x)
        eg = rho * eg + (1 - rho) * g * g
        upd = math.sqrt(eu + eps) / math.sqrt(eg + eps) * g
        eu = rho * eu + (1 - rho) * upd * upd
        x = x - lr * upd
        history.append(x)
    return history


class TestAdamStep:
    def test_first_step_formula(self):
        # with zero state the first update is exactly lr * g / (|g| + eps)
        param = np.array([2.0], dtype=np.float64)
        g = np.array([3.0], dtype=np.float64)
        m, v = np.zeros(1), np.zeros(1)
        E.adam_step(param, g, m, v, t=1, lr=0.5)
        expected = 2.0 - 0.5 * 3.0 / (3.0 + 1e-8)
        assert math.isclose(float(param[0]), expected, rel_tol=1e-12)
        assert math.isclose(float(m[0]), 0.1 * 3.0, rel_tol=1e-12)
        assert math.isclose(float(v[0]), 0.001 * 9.0, rel_tol=1e-12)

    def test_three_steps_on_quadratic(self):
        param = np.array([1.5], dtype=np.float64)
        m, v = np.zeros(1), np.zeros(1)
        seen = []
        for t in range(1, 4):
            g = 2.0 * param.copy()
            E.adam_step(param, g, m, v, t=t, lr=0.1)
            seen.append(float(param[0]))
        oracle = scalar_adam_trajectory(1.5, lambda x: 2.0 * x, 3, lr=0.1)
        np.testing.assert_allclose(seen, oracle, rtol=1e-12)

    def test_step_count_validation(self):
        with pytest.raises(ConfigError):
            E.adam_step(np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), t=0)


class TestAdadeltaStep:
    def test_first_step_formula(self):
        param = np.array([1.0], dtype=np.float64)
        g = np.array([4.0], dtype=np.float64)
        eg, eu = np.zeros(1), np.zeros(1)
        E.adadelta_step(param, g, eg, eu)
        # E[g^2] = 0.05 * 16; update = sqrt(eps / (E[g^2] + eps)) * g
        expected_update = math.sqrt(1e-6 / (0.05 * 16.0 + 1e-6)) * 4.0
        assert math.isclose(float(param[0]), 1.0 - expected_update, rel_tol=1e-12)

    def test_five_steps_on_quadratic(self):
        param = np.array([2.0], dtype=np.float64)
        eg, eu = np.zeros(1), np.zeros(1)
        seen = []
        for _ in range(5):
            g = 2.0 * param.copy()
            E.adadelta_step(param, g, eg, eu)
            seen.append(float(param[0]))
        oracle = scalar_adadelta_trajectory(2.0, lambda x: 2.0 * x, 5)
        np.testing.assert_allclose(seen, oracle, rtol=1e-12)


class TestOptimizerClasses:
    def _params(self):
        with E.using_dtype(np.float64):
            a = E.Parameter("a", np.array([1.0, -2.0]))
            b = E.Parameter("b", np.array([[0.5]]))
        return a, b

    def _loss_and_grads(self, a, b):
        # L = sum(a^2) + b^2, gradients set by hand
        a.zero_grad()
        b.zero_grad()
        a.grad += 2.0 * a.data
        b.grad += 2.0 * b.data

    def test_adam_class_matches_scalar_recurrences(self):
        a, b = self._params()
        opt = E.Adam([a, b], lr=0.05)
        for _ in range(4):
            self._loss_and_grads(a, b)
            opt.step()
        oracle_a0 = scalar_adam_trajectory(1.0, lambda x: 2.0 * x, 4, lr=0.05)[-1]
        oracle_a1 = scalar_adam_trajectory(-2.0, lambda x: 2.0 * x, 4, lr=0.05)[-1]
        oracle_b = scalar_adam_trajectory(0.5, lambda x: 2.0 * x, 4, lr=0.05)[-1]
        np.testing.assert_allclose(a.data, [oracle_a0, oracle_a1], rtol=1e-12)
        np.testing.assert_allclose(b.data, [[oracle_b]], rtol=1e-12)

    def test_adadelta_class_matches_scalar_recurrences(self):
        a, b = self._params()
        opt = E.Adadelta([a, b])
        for _ in range(6):
            self._loss_and_grads(a, b)
            opt.step()
        oracle_a0 = scalar_adadelta_trajectory(1.0, lambda x: 2.0 * x, 6)[-1]
        oracle_b = scalar_adadelta_trajectory(0.5, lambda x: 2.0 * x, 6)[-1]
        assert math.isclose(float(a.data[0]), oracle_a0, rel_tol=1e-12)
        assert math.isclose(float(b.data[0, 0]), oracle_b, rel_tol=1e-12)

    def test_optimizers_descend_on_quadratic(self):
        # Adadelta needs a long warm-up while its averages grow from zero
        for make_opt, steps in ((lambda ps: E.Adam(ps, lr=0.1), 200),
                                (E.Adadelta, 1000)):
            with E.using_dtype(np.float64):
                x = E.Parameter("x", np.array([3.0]))
            opt = make_opt([x])
            start = float(np.abs(x.data[0]))
            for _ in range(steps):
                x.zero_grad()
                x.grad += 2.0 * x.data
                opt.step()
            assert float(np.abs(x.data[0])) < start * 0.5

    def test_zero_grad(self):
        a, b = self._params()
        opt = E.Adam([a, b])
        self._loss_and_grads(a, b)
        opt.zero_grad()
        assert not a.grad.any() and not b.grad.any()

    def test_validation(self):
        a, _ = self._params()
        with pytest.raises(ConfigError):
            E.Adam([a], beta1=1.0)
        with pytest.raises(ConfigError):
            E.Adadelta([a], rho=1.5)
