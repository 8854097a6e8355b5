import math

import numpy as np
import pytest

from genbound.engine import FULL, ROW, SAMPLE, combine_codes, pattern_mass, set_partition_patterns
from genbound.information import quantity
from genbound.problems import onehot_problem, sign_erm_problem

BELL = [1, 1, 2, 5, 15, 52, 203]


class TestPatterns:
    @pytest.mark.parametrize("m", range(1, 7))
    def test_bell_numbers(self, m):
        assert len(set_partition_patterns(m)) == BELL[m]

    @pytest.mark.parametrize("m,d", [(3, 5), (4, 8), (5, 3)])
    def test_pattern_mass_sums_to_one(self, m, d):
        assert math.fsum(pattern_mass(set_partition_patterns(m), d)) == pytest.approx(1.0, abs=1e-12)

    def test_combine_codes_negative_columns(self):
        codes, size = combine_codes([np.array([-3, 5, -3]), np.array([1, 1, 1])], 3)
        assert size == 2 and codes[0] == codes[2] != codes[1]


class TestEngineAgreement:
    @pytest.mark.parametrize("n", [2, 3])
    def test_row_quantities(self, n):
        a, b = onehot_problem(n, engine="product"), onehot_problem(n, engine="exchangeable")
        for name in ("iomi_individual", "iomi_conditional", "hyp_cmi", "ss_cmi", "std_cmi", "ld_cmi", "e_cmi"):
            assert quantity(name, a, 1).value == pytest.approx(quantity(name, b, 1).value, abs=1e-10)

    def test_sample_and_full(self):
        a, b = onehot_problem(2, engine="product"), onehot_problem(2, engine="exchangeable")
        for name in ("iomi_sample", "vec_cmi"):
            assert quantity(name, a).value == pytest.approx(quantity(name, b).value, abs=1e-10)

    def test_disintegrated_classes_agree(self):
        a, b = onehot_problem(2, engine="product"), onehot_problem(2, engine="exchangeable")
        ea = quantity("hyp_cmi", a, 1, disintegrated=True)
        eb = quantity("hyp_cmi", b, 1, disintegrated=True)
        sa = math.fsum(ea.class_mass * np.sqrt(ea.class_values))
        sb = math.fsum(eb.class_mass * np.sqrt(eb.class_values))
        assert sa == pytest.approx(sb, abs=1e-10)

    def test_exchangeable_rejected_for_sign_erm(self):
        with pytest.raises(ValueError):
            sign_erm_problem(3, engine="exchangeable").table(ROW, 0)


class TestTables:
    @pytest.mark.parametrize("kind", [ROW, FULL, SAMPLE])
    def test_mass(self, kind):
        p = sign_erm_problem(3)
        t = p.table(kind, 0 if kind == ROW else None)
        assert t.total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_sampled_table_weights(self):
        t = sign_erm_problem(3).sampled_table(ROW, 0, 500, seed=3)
        assert t.n_rows == 500 and t.total_mass() == pytest.approx(1.0)
