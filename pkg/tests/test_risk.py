import itertools
import math

import numpy as np
import pytest

from genbound.algorithms import RademacherERMConfig, SignERM
from genbound.core import DiscreteDistribution, LinearLoss
from genbound.risk import (
    empirical_risk,
    gen_error_flipped,
    gen_error_masked_data,
    gen_error_masked_hyp,
    gen_error_standard,
    population_risk,
    second_moment_exact,
)
from tests.conftest import cached_problem


def mean_abs_rademacher_sum(n):
    return math.fsum(abs(sum(e)) for e in itertools.product((-1, 1), repeat=n)) / 2**n


class TestSignERM:
    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_matches_rademacher_oracle(self, n):
        p = cached_problem("sign-erm", n)
        expected = mean_abs_rademacher_sum(n) / n
        assert gen_error_standard(p).gen_error == pytest.approx(expected, abs=1e-12)
        assert gen_error_masked_data(p) == pytest.approx(expected, abs=1e-12)
        assert gen_error_masked_hyp(p) == pytest.approx(expected, abs=1e-12)
        assert gen_error_flipped(p) == pytest.approx(expected, abs=1e-12)

    def test_risks(self, sign3):
        r = gen_error_standard(sign3)
        assert r.population_risk == pytest.approx(0.0, abs=1e-15)
        assert r.empirical_risk == pytest.approx(-0.5)

    def test_alg_loss_dist_signature(self):
        dist = DiscreteDistribution([np.array([1.0]), np.array([-1.0])])
        r = gen_error_standard(SignERM(RademacherERMConfig()), LinearLoss(1.0), dist, 3)
        assert r.gen_error == pytest.approx(0.5)

    def test_point_risks(self, sign3):
        assert population_risk(sign3, np.array([1.0])) == pytest.approx(0.0)
        assert empirical_risk(sign3, np.array([1.0]), [np.array([1.0]), np.array([1.0])]) == -1.0


class TestMonteCarlo:
    def test_within_four_stderr(self, onehot2):
        exact = gen_error_standard(onehot2).gen_error
        mc = gen_error_standard(onehot2, mode="mc", samples=20000, seed=3)
        assert abs(mc.gen_error - exact) <= 4 * mc.stderr
        v, se = gen_error_masked_hyp(onehot2, mode="mc", samples=20000, seed=3, return_stderr=True)
        assert abs(v - exact) <= 4 * se

    def test_needs_samples(self, sign3):
        with pytest.raises(ValueError):
            gen_error_standard(sign3, mode="mc", samples=10)


class TestSecondMoment:
    def test_sign_erm(self, sign3):
        # L_mu(W) = 0 and L_S(W) = -|sum|/3, so E[(L_mu - L_S)^2] = E[sum^2]/9 = 3/9
        assert second_moment_exact(sign3) == pytest.approx(1 / 3)
        assert second_moment_exact(sign3, scale=2.0) == pytest.approx(1 / 12)
