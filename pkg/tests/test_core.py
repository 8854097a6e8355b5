import math

import numpy as np
import pytest

from genbound.algorithms import RademacherERMConfig, SignERM
from genbound.core import (
    BudgetExceeded,
    DiscreteDistribution,
    LinearLoss,
    Mask,
    Sample,
    Supersample,
    ThresholdZeroOneLoss,
    apply_mask,
    build_hypothesis_matrix,
    enumerate_outcomes,
    neighbor_sample,
    product_grid,
)


class TestDistribution:
    def test_uniform_default(self):
        d = DiscreteDistribution([0, 1, 2])
        assert d.is_uniform
        assert np.allclose(d.mass, 1 / 3)

    def test_mass_must_sum_to_one(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([0, 1], [0.5, 0.6])

    def test_negative_mass(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([0, 1], [1.5, -0.5])

    def test_duplicate_support(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([np.array([1.0]), np.array([1.0])])

    def test_index_of_vectors(self):
        d = DiscreteDistribution([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        assert d.index_of(np.array([0.0, 1.0])) == 1
        with pytest.raises(ValueError):
            d.index_of(np.array([1.0, 1.0]))


class TestEnumeration:
    def test_outcomes_sum_to_one(self):
        d = DiscreteDistribution([0, 1, 2], [0.2, 0.3, 0.5])
        total = math.fsum(m for _, m in enumerate_outcomes(d, 3))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_budget(self):
        d = DiscreteDistribution(list(range(10)))
        with pytest.raises(BudgetExceeded) as err:
            list(enumerate_outcomes(d, 5, budget=1000))
        assert err.value.required == 10**5

    def test_grid_order(self):
        g = product_grid(2, 3)
        assert g.shape == (8, 3)
        assert g[1].tolist() == [0, 0, 1]


class TestConstructions:
    def test_neighbor_sample(self):
        s = Sample([1, 2, 3])
        assert neighbor_sample(s, 9, 2).items == (1, 9, 3)
        with pytest.raises(IndexError):
            neighbor_sample(s, 9, 4)
        with pytest.raises(IndexError):
            neighbor_sample(s, 9, 0)

    def test_mask(self):
        ss = Supersample([(1, -1), (2, -2)])
        assert apply_mask(ss, Mask([0, 1])).items == (1, -2)
        assert Mask([0, 1]).complement.bits == (1, 0)
        with pytest.raises(ValueError):
            apply_mask(ss, Mask([0]))
        with pytest.raises(ValueError):
            Mask([2])

    def test_hypothesis_matrix_sign_erm(self):
        # Z+ = (+,+,-): W+ = +; replacing a + by - flips the sign
        d = DiscreteDistribution([np.array([1.0]), np.array([-1.0])])
        alg = SignERM(RademacherERMConfig())
        p, m = np.array([1.0]), np.array([-1.0])
        ss = Supersample([(p, m), (p, m), (m, p)])
        mat = build_hypothesis_matrix(alg, d, ss)
        assert mat.w_plus.statistic == (1,)
        assert [w.statistic for w in mat.w_minus] == [(-1,), (-1,), (1,)]
        assert mat.row(3)[1].statistic == (1,)
        with pytest.raises(IndexError):
            mat.row(4)


class TestLosses:
    def test_linear_matrix_and_pointwise(self):
        loss = LinearLoss(2.0)
        params = np.array([[1.0, 0.0], [0.5, 0.5]])
        feats = np.array([[1.0, 0.0], [0.0, 1.0]])
        m = loss.matrix(params, feats)
        assert m.tolist() == [[-2.0, 0.0], [-1.0, -1.0]]
        assert loss.pointwise(params, feats).tolist() == [-2.0, -1.0]

    def test_zero_one(self):
        loss = ThresholdZeroOneLoss()
        feats = np.array([[1, 0], [3, 1], [2, 1]], dtype=float)
        m = loss.matrix(np.array([[3.0]]), feats)
        assert m.tolist() == [[0.0, 0.0, 1.0]]
        assert loss.pointwise(np.array([[3.0], [1.0], [2.0]]), feats).tolist() == [0.0, 0.0, 0.0]
