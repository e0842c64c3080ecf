import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelattn.errors import ShapeError
from labelattn.numerics import (AdamState, Param, Prng, adam_update,
                                finite_diff_grad, matmul, relu, sigmoid,
                                softmax)


class TestMatmul:
    def test_identity(self):
        assert np.allclose(matmul(np.eye(2), [[3.0], [4.0]]), [[3.0], [4.0]])

    def test_one_by_one(self):
        assert matmul([[1.0, 2.0]], [[3.0], [4.0]])[0, 0] == 11.0

    def test_shape_error_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(5, 7)), rng.normal(size=(7, 3))
        want = np.zeros((5, 3))
        for i in range(5):
            for j in range(3):
                for k in range(7):
                    want[i, j] += a[i, k] * b[k, j]
        assert np.max(np.abs(matmul(a, b) - want)) < 1e-12

    def test_random_sizes_vs_loop(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            m, k, n = rng.integers(1, 65, size=3)
            a, b = rng.normal(size=(m, k)), rng.normal(size=(k, n))
            want = np.array([[sum(a[i, t] * b[t, j] for t in range(k))
                              for j in range(n)] for i in range(m)])
            assert np.max(np.abs(matmul(a, b) - want)) < 1e-12


class TestSoftmax:
    def test_uniform(self):
        assert np.allclose(softmax(np.zeros(3)), 1 / 3, atol=1e-15)

    def test_analytic(self):
        out = softmax(np.log([1.0, 2.0, 3.0]))
        assert np.allclose(out, [1 / 6, 2 / 6, 3 / 6], atol=1e-12)

    def test_large_inputs_no_overflow(self):
        out = softmax(np.array([1000.0, 1001.0]))
        assert np.allclose(out, softmax(np.array([0.0, 1.0])), atol=1e-12)
        assert np.all(np.isfinite(out))

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            softmax(np.array([]))

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=20),
           st.floats(-100, 100))
    def test_sums_to_one_and_shift_invariant(self, vals, c):
        v = np.array(vals)
        out = softmax(v)
        assert abs(out.sum() - 1.0) < 1e-12
        assert np.max(np.abs(softmax(v + c) - out)) < 1e-12


class TestElementwise:
    def test_relu(self):
        assert np.array_equal(relu(np.array([[0.5, -0.5]])), [[0.5, 0.0]])
        assert not relu(-np.abs(np.random.default_rng(0).normal(size=8))).any()

    def test_relu_idempotent(self):
        x = np.random.default_rng(0).normal(size=(4, 5))
        assert np.array_equal(relu(relu(x)), relu(x))

    def test_sigmoid_zero(self):
        assert sigmoid(0.0) == 0.5

    def test_sigmoid_symmetry(self):
        for x in (-3.0, 0.7, 12.0):
            assert abs(sigmoid(x) + sigmoid(-x) - 1.0) < 1e-12

    def test_sigmoid_deep_negative_tail(self):
        v = sigmoid(-745.0)
        assert 0.0 < v <= 1e-300


class TestAdam:
    def test_first_step_magnitude_and_sign(self):
        p = Param(np.zeros((2, 3)))
        p.grad[...] = 0.7
        s = AdamState.for_param(p, lr=0.001)
        adam_update(p, s)
        # bias-corrected first step: |delta| = lr * |g| / (|g| + eps')
        assert np.all(p.value < 0)
        assert np.allclose(-p.value, 0.001, rtol=1e-4)

    def test_zero_grad_no_change(self):
        p = Param(np.ones((3,)))
        s = AdamState.for_param(p)
        adam_update(p, s)
        assert np.array_equal(p.value, np.ones(3))

    def test_quadratic_convergence(self):
        # 100 steps on f(w) = w^2 from w = 1 at lr = 0.1
        p = Param(np.array([[1.0]]))
        s = AdamState.for_param(p, lr=0.1)
        for _ in range(100):
            p.zero_grad()
            p.grad += 2.0 * p.value
            adam_update(p, s)
        assert abs(p.value[0, 0]) < 0.1

    def test_step_counter_increments(self):
        p = Param(np.zeros(2))
        s = AdamState.for_param(p)
        for want in (1, 2, 3):
            adam_update(p, s)
            assert s.step == want
        assert np.all(s.v >= 0)


class TestPrng:
    def test_bit_exact_reproducibility(self):
        a, b = Prng(123), Prng(123)
        assert np.array_equal(a.uniform(-1, 1, 10), b.uniform(-1, 1, 10))
        assert np.array_equal(a.normal(5), b.normal(5))
        assert np.array_equal(a.permutation(20), b.permutation(20))

    def test_different_seeds_differ(self):
        assert not np.array_equal(Prng(1).normal(8), Prng(2).normal(8))


class TestFiniteDiff:
    def test_sum_of_squares(self):
        p = Param(np.array([[1.0, 2.0]]))
        g = finite_diff_grad(lambda: float((p.value ** 2).sum()), p, 1e-5)
        assert np.allclose(g, [[2.0, 4.0]], atol=1e-8)

    def test_constant_function(self):
        p = Param(np.ones((2, 2)))
        assert not finite_diff_grad(lambda: 3.0, p, 1e-5).any()

    def test_rejects_bad_h(self):
        with pytest.raises(ValueError):
            finite_diff_grad(lambda: 0.0, Param(np.ones(1)), 0.0)

    def test_nonfinite_evaluation_raises(self):
        p = Param(np.array([0.0]))
        with pytest.raises(FloatingPointError):
            finite_diff_grad(lambda: math.inf, p, 1e-5)
