import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from boxlab import bell, lp, polytope
from boxlab.bell import (
    BadParams,
    BellFunctional,
    canonical_2222,
    cglmp,
    cglmp_raw,
    chsh,
    chsh_functional,
    correlators,
    normalization_bounds,
    normalize,
    pr_box,
    unique_ns_maximizer,
)
from boxlab.core import Scenario, ScenarioMismatch, mix, relabel, uniform_box
from boxlab.isotropic import make_isotropic
from conftest import random_ns_box
from oracles import ns_vertices_2222_by_enumeration


class TestCorrelators:
    def test_pr(self):
        assert correlators(pr_box()).as_tuple() == (F(1), F(1), F(1), F(-1))

    def test_uniform(self):
        assert correlators(uniform_box(Scenario((2, 2), (2, 2)))).as_tuple() == (
            F(0),
        ) * 4

    def test_isotropic_family(self):
        for c in (F(0), F(1, 3), F(7, 10), F(1)):
            assert correlators(make_isotropic(c)).as_tuple() == (c, c, c, -c)

    def test_scenario_mismatch(self):
        with pytest.raises(ScenarioMismatch):
            correlators(uniform_box(Scenario((2, 2), (3, 3))))


class TestChsh:
    def test_isotropic_line(self):
        for c in (F(0), F(1, 4), F(1, 2), F(7, 10), F(1)):
            assert chsh(make_isotropic(c)) == 2 * c - 1

    def test_pr_box_maximal(self):
        assert chsh(pr_box()) == 1

    def test_uniform_noise(self):
        assert chsh(uniform_box(Scenario((2, 2), (2, 2)))) == -1

    def test_functional_agrees_with_direct_formula(self, ns_vertices):
        f = chsh_functional()
        for v in ns_vertices:
            assert f.evaluate(v) == chsh(v)

    def test_functional_is_normalized(self):
        local, ns_max = normalization_bounds(chsh_functional())
        assert local == 0
        assert ns_max == 1


class TestCglmp:
    def test_d2_matches_chsh_up_to_relabeling(self, ns_vertices):
        f2 = cglmp(2)
        relabelings = bell.relabelings_2222()
        matches = [
            rl
            for rl in relabelings
            if all(f2.evaluate(relabel(v, *rl)) == chsh(v) for v in ns_vertices)
        ]
        assert matches, "no relabeling identifies cglmp(2) with chsh"

    def test_d3_raw_bounds(self):
        # probability form: local bound 2, nonsignaling algebraic max 4
        local, ns_max = normalization_bounds(cglmp_raw(3))
        assert (local, ns_max) == (2, 4)

    def test_d3_normalized_ns_max_is_one(self):
        local, ns_max = normalization_bounds(cglmp(3))
        assert (local, ns_max) == (0, 1)

    def test_d3_uniform_noise_negative(self):
        value = cglmp(3).evaluate(uniform_box(Scenario((2, 2), (3, 3))))
        assert value == -1
        assert value < 0

    def test_cap(self):
        with pytest.raises(BadParams):
            cglmp(5)
        with pytest.raises(BadParams):
            cglmp(1)


class TestUniqueMaximizer:
    def test_chsh_unique_pr(self):
        unique, box = unique_ns_maximizer(chsh_functional())
        assert unique
        assert box == pr_box()
        assert correlators(box).as_tuple() == (F(1), F(1), F(1), F(-1))

    def test_zero_functional_not_unique(self):
        sc = Scenario((2, 2), (2, 2))
        zero = BellFunctional(sc, (F(0),) * sc.table_size, F(0))
        unique, box = unique_ns_maximizer(zero)
        assert not unique
        assert box is None


class TestEvaluate:
    def test_isotropic_value(self):
        assert chsh_functional().evaluate(make_isotropic(F(3, 4))) == F(1, 2)

    def test_linearity_on_mixture(self, ns_vertices):
        rng = random.Random(2)
        f = chsh_functional()
        p = random_ns_box(rng, ns_vertices)
        q = random_ns_box(rng, ns_vertices)
        w = F(2, 7)
        assert f.evaluate(mix([p, q], [w, 1 - w])) == w * f.evaluate(p) + (
            1 - w
        ) * f.evaluate(q)

    def test_scenario_mismatch(self):
        with pytest.raises(ScenarioMismatch):
            chsh_functional().evaluate(uniform_box(Scenario((2,), (2,))))


class TestNormalize:
    def test_normalize_shifts_and_scales(self):
        sc = Scenario((2, 2), (2, 2))
        f = chsh_functional()
        skewed = BellFunctional(
            sc, tuple(3 * c for c in f.coefficients), 3 * f.offset + 5
        )
        again = normalize(skewed)
        assert normalization_bounds(again) == (0, 1)

    def test_constant_functional_rejected(self):
        sc = Scenario((2, 2), (2, 2))
        with pytest.raises(BadParams):
            normalize(BellFunctional(sc, (F(0),) * 16, F(0)))


class TestVerticesAndCanonicalForm:
    def test_vertex_classification_matches_enumeration(self, ns_vertices):
        enumerated = ns_vertices_2222_by_enumeration()
        assert len(enumerated) == 24
        assert set(ns_vertices) == enumerated

    def test_canonical_form_sign_pattern(self, ns_vertices):
        rng = random.Random(9)
        for _ in range(15):
            box = random_ns_box(rng, ns_vertices, nonlocal_bias=20)
            canon = canonical_2222(box)
            c = correlators(canon)
            assert c.c00 >= 0 and c.c01 >= 0 and c.c10 >= 0

    def test_canonical_form_deterministic(self, ns_vertices):
        rng = random.Random(10)
        box = random_ns_box(rng, ns_vertices)
        assert canonical_2222(box) == canonical_2222(box)

    def test_canonical_form_idempotent_on_orbit(self, ns_vertices):
        rng = random.Random(11)
        box = random_ns_box(rng, ns_vertices)
        canon = canonical_2222(box)
        for rl in random.Random(12).sample(bell.relabelings_2222(), 8):
            assert canonical_2222(relabel(box, *rl)) == canon


@settings(max_examples=25, deadline=None)
@given(
    c_num=st.integers(0, 12),
    w_num=st.integers(0, 10),
)
def test_chsh_linear_in_isotropic_mixtures(c_num, w_num):
    c = F(c_num, 12)
    w = F(w_num, 10)
    box = mix([make_isotropic(c), uniform_box(Scenario((2, 2), (2, 2)))], [w, 1 - w])
    assert chsh(box) == w * (2 * c - 1) + (1 - w) * (-1)
