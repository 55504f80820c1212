import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deun import (CornerConfig, DiscreteFactor, ExpLinExpr, LabeledTable, LinForm,
                  gaussian_expectation, table_circ, table_reduce_sum)
from deun.algebra import config_index
from deun.errors import NotConstant, PendingVariable, SelfReferentialMean


class TestCornerConfig:
    def test_canonical_order(self):
        keys = [c.key for c in CornerConfig.all((1, 2))]
        assert keys == ["00", "0*", "*0", "**"]

    def test_index_matches_order(self):
        for k, c in enumerate(CornerConfig.all((1, 3, 4))):
            assert config_index(c.bits) == k

    def test_key_round_trip_and_access(self):
        c = CornerConfig.from_key((2, 5, 7), "*0*")
        assert c.key == "*0*" and c[2] and not c[5] and c.stars == (2, 7)
        assert c.restrict((5, 7)).key == "0*"
        assert c.flip(5).key == "***"

    def test_empty_scope(self):
        assert [c.key for c in CornerConfig.all(())] == [""]


class TestLinForm:
    def test_zero_coefficients_dropped(self):
        f = LinForm(1.0, {2: 0.0, 3: 2.0})
        assert f.variables == frozenset({3})
        assert f.evaluate({3: 2.0}) == 5.0


class TestExpLinExpr:
    def test_constant_folding(self):
        e = ExpLinExpr.constant(2.0) + ExpLinExpr.constant(3.0)
        assert e.is_constant() and e.constant_value() == 5.0

    def test_like_terms_merge(self):
        e = ExpLinExpr.exp(1, 0.5, 2.0) + ExpLinExpr.exp(1, 0.5, 3.0)
        assert len(e) == 1

    def test_cancellation(self):
        e = ExpLinExpr.exp(1, 0.5) - ExpLinExpr.exp(1, 0.5)
        assert e.is_constant() and e.constant_value() == 0.0

    def test_product_adds_exponents(self):
        e = ExpLinExpr.exp(1, 0.3, 2.0) * ExpLinExpr.exp(2, -0.1, 1.5)
        assert e.evaluate({1: 1.0, 2: 2.0}) == pytest.approx(3.0 * math.exp(0.3 - 0.2))

    def test_rsub(self):
        e = 1.0 - ExpLinExpr.exp(1, 1.0)
        assert e.evaluate({1: 0.0}) == pytest.approx(0.0)

    def test_missing_variable(self):
        with pytest.raises(PendingVariable):
            ExpLinExpr.exp(1, 1.0).evaluate({})

    def test_vectorised_evaluate(self):
        e = ExpLinExpr.exp(1, 1.0) + 1.0
        y = np.array([0.0, 1.0])
        np.testing.assert_allclose(e.evaluate({1: y}), 1.0 + np.exp(y))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1)),
                    min_size=1, max_size=4),
           st.floats(-2, 2), st.floats(-2, 2))
    def test_arithmetic_matches_pointwise(self, spec, y1, y2):
        a = sum((ExpLinExpr.exp(1, r1, c) * ExpLinExpr.exp(2, r2) for c, r1, r2 in spec),
                ExpLinExpr.constant(0.5))
        b = ExpLinExpr.exp(2, 0.3, -1.0) + 2.0
        pt = {1: y1, 2: y2}
        assert (a * b).evaluate(pt) == pytest.approx(a.evaluate(pt) * b.evaluate(pt),
                                                     rel=1e-9, abs=1e-9)
        assert (a - b).evaluate(pt) == pytest.approx(a.evaluate(pt) - b.evaluate(pt),
                                                     rel=1e-9, abs=1e-9)


class TestGaussianExpectation:
    def test_moment_generating_function(self):
        # E[exp(t Y)] for Y ~ N(mu, sigma^2)
        t, mu, sigma = 0.4, 1.5, 2.0
        e = gaussian_expectation(ExpLinExpr.exp(1, t), 1, LinForm(mu, {}), sigma)
        assert e.constant_value() == pytest.approx(math.exp(t * mu + 0.5 * t * t * sigma ** 2))

    def test_conditional_mean_moves_into_exponent(self):
        e = gaussian_expectation(ExpLinExpr.exp(2, 0.5), 2, LinForm(1.0, {1: 3.0}), 1.0)
        assert e.variables == frozenset({1})
        assert e.evaluate({1: 0.2}) == pytest.approx(math.exp(0.5 * 1.6 + 0.125))

    def test_constant_part_untouched(self):
        e = gaussian_expectation(ExpLinExpr.constant(0.7) + ExpLinExpr.exp(3, 0.0), 1,
                                 LinForm(0.0, {}), 1.0)
        assert e.constant_value() == pytest.approx(1.7)

    def test_self_reference(self):
        with pytest.raises(SelfReferentialMean):
            gaussian_expectation(ExpLinExpr.exp(1, 1.0), 1, LinForm(0.0, {1: 1.0}), 1.0)

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            gaussian_expectation(ExpLinExpr.exp(1, 1.0), 1, LinForm(0.0, {}), -1.0)

    def test_zero_sigma_is_point_mass(self):
        e = gaussian_expectation(ExpLinExpr.exp(1, 1.0), 1, LinForm(2.0, {}), 0.0)
        assert e.constant_value() == pytest.approx(math.exp(2.0))


class TestDiscreteFactor:
    def test_expect_against_conditional(self):
        f = DiscreteFactor((2,), [1.0, 3.0])
        cond = DiscreteFactor((1, 2), [[0.5, 0.5], [0.25, 0.75]])
        out = f.expect(2, cond)
        assert out.variables == (1,)
        np.testing.assert_allclose(out.values, [2.0, 2.5])

    def test_broadcasting_product(self):
        a = DiscreteFactor((1,), [1.0, 2.0])
        b = DiscreteFactor((2,), [10.0, 20.0, 30.0])
        np.testing.assert_allclose((a * b).values, np.outer([1, 2], [10, 20, 30]))


class TestLabeledTable:
    def test_circ_matches_configurations(self):
        a = LabeledTable((1,), [2.0, 3.0])
        b = LabeledTable((1, 2), [1.0, 10.0, 100.0, 1000.0])
        c = table_circ(a, b)
        assert c.scope == (1, 2)
        assert [c[cfg] for cfg in c.configs()] == [2.0, 20.0, 300.0, 3000.0]

    def test_circ_disjoint_scopes(self):
        c = table_circ(LabeledTable((1,), [1.0, 2.0]), LabeledTable((2,), [3.0, 5.0]))
        assert [c[k] for k in ("00", "0*", "*0", "**")] == [3.0, 5.0, 6.0, 10.0]

    def test_unit_is_neutral(self):
        a = LabeledTable((1, 3), [1.0, 2.0, 3.0, 4.0])
        assert [e for _, e in table_circ(LabeledTable.unit(), a).items()] == [1.0, 2.0, 3.0, 4.0]

    def test_reduce_requires_constants(self):
        with pytest.raises(NotConstant):
            table_reduce_sum(LabeledTable((1,), [ExpLinExpr.exp(1, 1.0), 1.0]))

    def test_reduce_sum(self):
        assert table_reduce_sum(LabeledTable((1,), [0.25, ExpLinExpr.constant(0.5)])) == 0.75
