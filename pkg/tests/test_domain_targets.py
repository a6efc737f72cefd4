import math

import numpy as np
import pytest

from noisymc.domain import BoundedDomain, DomainError, box
from noisymc.targets import (banana_density, bimodal_density, eval_banana,
                             eval_bimodal, eval_gaussmix_1d,
                             gaussmix_1d_density)


class TestBoundedDomain:
    def test_invariants(self):
        with pytest.raises(ValueError):
            BoundedDomain(np.array([0.0]), np.array([0.0]))
        with pytest.raises(ValueError):
            BoundedDomain(np.array([1.0]), np.array([-1.0]))

    def test_contains_and_volume(self):
        dom = box([-1.0, -2.0], [1.0, 2.0])
        assert dom.contains(np.array([0.0, 0.0]))
        assert not dom.contains(np.array([1.5, 0.0]))
        assert dom.volume == pytest.approx(8.0)

    def test_contains_all_vectorized(self):
        dom = box([-1.0], [1.0])
        pts = np.array([[-2.0], [0.0], [0.99], [1.01]])
        np.testing.assert_array_equal(dom.contains_all(pts), [False, True, True, False])

    def test_sample_inside(self):
        dom = box([-3.0, 5.0], [-1.0, 9.0])
        rng = np.random.default_rng(0)
        pts = dom.sample(rng, 1000)
        assert np.all(dom.contains_all(pts))


class TestBanana:
    def test_value_at_origin(self):
        # first quadratic contributes exp(-4^2 / (2*4^2)) = exp(-1/2)
        assert eval_banana([0.0, 0.0]) == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_outside_domain_is_zero(self):
        assert eval_banana([11.0, 0.0]) == 0.0
        assert eval_banana([0.0, -10.0001]) == 0.0

    def test_continuity_near_origin(self):
        deltas = [1e-3, 1e-6, 1e-9]
        base = eval_banana([0.0, 0.0])
        diffs = [abs(eval_banana([0.0, d]) - base) for d in deltas]
        assert diffs[0] < 1e-2 and diffs[2] < diffs[0]
        assert diffs[2] < 1e-8

    def test_dimension_error(self):
        with pytest.raises(DomainError):
            eval_banana([0.0])

    def test_symmetry_in_theta2(self):
        assert eval_banana([1.0, 2.0]) == pytest.approx(eval_banana([1.0, -2.0]), rel=1e-14)

    def test_grid_matches_scalar(self):
        t = banana_density()
        rng = np.random.default_rng(1)
        pts = rng.uniform(-11, 11, size=(50, 2))
        grid_vals = t.eval_grid(pts)
        for p, v in zip(pts, grid_vals):
            assert v == pytest.approx(t.eval(p), abs=1e-300)


class TestBimodal:
    def test_mirror_symmetry(self):
        assert eval_bimodal([10.0, 0.0]) == pytest.approx(eval_bimodal([-10.0, 0.0]), rel=1e-14)

    def test_center_value(self):
        # both components at squared distance 100: 2 * 0.5 * N2(mode dist 10)
        expected = (1.0 / (2 * math.pi * 9.0)) * math.exp(-100.0 / 18.0)
        assert eval_bimodal([0.0, 0.0]) == pytest.approx(expected, rel=1e-12)

    def test_mode_value(self):
        # dominant term 0.5/(18 pi); the far component adds a negligible amount
        near = 0.5 / (18.0 * math.pi)
        far = 0.5 / (18.0 * math.pi) * math.exp(-400.0 / 18.0)
        assert eval_bimodal([10.0, 0.0]) == pytest.approx(near + far, rel=1e-12)
        assert eval_bimodal([10.0, 0.0]) == pytest.approx(near, rel=1e-6)

    def test_domain_truncation(self):
        assert eval_bimodal([20.5, 0.0]) == 0.0


class TestGaussMix1D:
    def test_value_at_first_mode(self):
        first = 0.5 / math.sqrt(2 * math.pi)
        second = 0.5 * math.exp(-36.0 / 4.0) / math.sqrt(2 * math.pi * 2.0)
        assert eval_gaussmix_1d(-1.0) == pytest.approx(first + second, rel=1e-12)

    def test_outside_domain(self):
        assert eval_gaussmix_1d(-8.5) == 0.0
        assert eval_gaussmix_1d(17.2) == 0.0

    def test_first_component_symmetry(self):
        # subtracting the second component leaves a symmetric function of t
        def first_comp(x):
            second = 0.5 * math.exp(-((x - 5.0) ** 2) / 4.0) / math.sqrt(2 * math.pi * 2.0)
            return eval_gaussmix_1d(x) - second

        for t in (0.3, 1.1, 2.4):
            assert first_comp(-1 + t) == pytest.approx(first_comp(-1 - t), rel=1e-10)

    def test_nonnegative_everywhere(self):
        xs = np.linspace(-9, 18, 301)
        vals = gaussmix_1d_density().eval_grid(xs[:, None])
        assert np.all(vals >= 0)
