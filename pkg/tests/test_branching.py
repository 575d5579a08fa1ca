"""Offspring laws, extinction probabilities, and the tree Monte Carlo
cross-check.

Frozen reference values were derived by hand: exact binomial expectations
over the weight atoms for the offspring tables, and explicit pgf
compositions for the survival probabilities (for f(s) = 1/4 + 3 s^2 / 4
the third iterate from 0 is 5179/16384, so three-generation survival is
11205/16384).
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percoweave.branching import (
    EXACT_GENERATION_CAP,
    GWResult,
    OffspringLaw,
    TreeComparisonRecord,
    _stem_tree,
    compare_tree_mc,
    gw_extinction,
    gw_generation_survival,
    offspring_law,
)
from percoweave.errors import InstanceTooLargeError, InvalidParameterError
from percoweave.weights import DiscreteTable, IdenticalUniform, PointMass

F = Fraction

COORDS = [F(0), F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4), F(1)]


def site_like(q) -> DiscreteTable:
    return DiscreteTable([((1, 1), F(q)), ((0, 0), 1 - F(q))])


def independent_bits() -> DiscreteTable:
    """W and W_bar independent uniform on {0, 1}: both marginal means 1/2,
    E[W W_bar] = 1/4."""
    return DiscreteTable(
        [((0, 0), F(1, 4)), ((0, 1), F(1, 4)), ((1, 0), F(1, 4)), ((1, 1), F(1, 4))]
    )


@st.composite
def rational_laws(draw):
    atom_count = draw(st.integers(1, 3))
    pairs = draw(
        st.lists(
            st.tuples(st.sampled_from(COORDS), st.sampled_from(COORDS)),
            min_size=atom_count,
            max_size=atom_count,
            unique=True,
        )
    )
    weights = [draw(st.integers(1, 5)) for _ in pairs]
    total = sum(weights)
    return DiscreteTable([(pair, F(w, total)) for pair, w in zip(pairs, weights)])


class TestOffspringLaw:
    def test_deterministic_weights_give_full_binomial(self):
        o = offspring_law(PointMass(1, 1), 2)
        assert o.probabilities == (0, 0, 1)
        assert o.mean == 2

    def test_site_like_law_two_atoms(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        assert o.probabilities == (F(1, 4), 0, F(3, 4))
        assert o.mean == F(3, 2)

    def test_site_like_generic_q(self):
        q = F(2, 7)
        o = offspring_law(site_like(q), 2)
        assert o.probabilities == (1 - q, 0, q)
        assert o.mean == 2 * q

    def test_independent_bits_single_child(self):
        o = offspring_law(independent_bits(), 1)
        assert o.probabilities == (F(3, 4), F(1, 4))
        assert o.mean == F(1, 4)

    def test_pgf_at_one_is_one(self):
        o = offspring_law(site_like(F(3, 4)), 3)
        assert o.pgf(F(1)) == 1
        assert o.pgf(F(0)) == o.probabilities[0]

    @settings(max_examples=50, deadline=None)
    @given(rational_laws(), st.integers(1, 4))
    def test_mean_identity_and_normalization(self, law, d):
        o = offspring_law(law, d)
        assert sum(o.probabilities) == 1
        assert all(p >= 0 for p in o.probabilities)
        # Independent recomputation of d * E[W W_bar] straight from atoms.
        expected = d * sum(F(p) * F(w) * F(wb) for (w, wb), p in law.atoms())
        assert sum(j * p for j, p in enumerate(o.probabilities)) == expected
        assert o.mean == expected

    def test_rejects_bad_degree(self):
        with pytest.raises(InvalidParameterError):
            offspring_law(PointMass(1, 1), 0)

    def test_rejects_weights_off_unit_square(self):
        with pytest.raises(InvalidParameterError):
            offspring_law(PointMass(2, 1), 2)

    def test_rejects_continuous_law(self):
        with pytest.raises(InvalidParameterError):
            offspring_law(IdenticalUniform(1), 2)

    def test_constructor_guards(self):
        with pytest.raises(InvalidParameterError):
            OffspringLaw(2, (F(1, 2), F(1, 2)), F(1, 2))  # wrong length
        with pytest.raises(InvalidParameterError):
            OffspringLaw(1, (F(3, 2), F(-1, 2)), F(-1, 2))  # negative entry
        with pytest.raises(InvalidParameterError):
            OffspringLaw(1, (F(1, 4), F(1, 4)), F(1, 4))  # sums to 1/2


class TestGWExtinction:
    def test_supercritical_fixed_point_one_third(self):
        # f(s) = 1/4 + 3 s^2 / 4 has fixed points 1/3 and 1.
        o = OffspringLaw(2, (F(1, 4), F(0), F(3, 4)), F(3, 2))
        r = gw_extinction(o)
        assert abs(r.q - 1 / 3) < 1e-12
        assert r.iterations > 0
        assert r.residual < 1e-14
        assert r.mean == pytest.approx(1.5)

    def test_subcritical_dies_out(self):
        r = gw_extinction(OffspringLaw(1, (F(1, 2), F(1, 2)), F(1, 2)))
        assert r.q == 1.0
        assert r.iterations == 0

    def test_critical_dies_out(self):
        r = gw_extinction(OffspringLaw(2, (F(1, 2), F(0), F(1, 2)), F(1)))
        assert r.q == 1.0

    def test_single_child_line_never_dies(self):
        r = gw_extinction(OffspringLaw(1, (F(0), F(1)), F(1)))
        assert r.q == 0.0

    def test_deterministic_splitting_never_dies(self):
        r = gw_extinction(OffspringLaw(2, (F(0), F(0), F(1)), F(2)))
        assert r.q == 0.0

    def test_requested_generations_are_reported(self):
        o = OffspringLaw(2, (F(1, 4), F(0), F(3, 4)), F(3, 2))
        r = gw_extinction(o, generations=(0, 1, 3, 8))
        assert isinstance(r, GWResult)
        assert [k for k, _ in r.survival] == [0, 1, 3, 8]
        values = [v for _, v in r.survival]
        assert values[0] == 1.0
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values == [float(gw_generation_survival(o, k)) for k in (0, 1, 3, 8)]


class TestGenerationSurvival:
    def test_generation_zero_is_certain(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        assert gw_generation_survival(o, 0) == 1

    def test_generation_one_complements_p0(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        assert gw_generation_survival(o, 1) == 1 - o.probabilities[0] == F(3, 4)

    def test_three_generations_exact(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        assert gw_generation_survival(o, 3) == F(11205, 16384)

    def test_nonincreasing_and_converges_to_survival_probability(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        values = [float(gw_generation_survival(o, k)) for k in range(13)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        q = gw_extinction(o).q
        assert abs(float(gw_generation_survival(o, 300)) - (1 - q)) < 1e-9

    def test_deep_generations_switch_to_float(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        assert isinstance(gw_generation_survival(o, EXACT_GENERATION_CAP), Fraction)
        assert isinstance(gw_generation_survival(o, EXACT_GENERATION_CAP + 1), float)

    def test_rejects_negative_generation(self):
        o = offspring_law(site_like(F(3, 4)), 2)
        with pytest.raises(InvalidParameterError):
            gw_generation_survival(o, -1)


class TestStemTree:
    def test_shape_and_edge_order(self):
        g, deepest = _stem_tree(2, 3)
        assert g.vertex_count == 8
        assert g.edge_count == 7
        assert deepest == (4, 5, 6, 7)
        assert g.edge(0) == (0, 1)
        assert g.edge(1) == (1, 2)

    def test_depth_one_is_a_single_edge(self):
        g, deepest = _stem_tree(3, 1)
        assert g.vertex_count == 2
        assert deepest == (1,)


class TestCompareTreeMC:
    def test_deterministic_weights_always_survive(self):
        rec = compare_tree_mc(PointMass(1, 1), 2, 3, 500, 7)
        assert rec.pgf_survival == 1
        assert rec.conditioned.estimate == 1.0
        assert rec.conditioned.successes == 500
        assert rec.within_ci

    def test_site_like_depth_four(self):
        rec = compare_tree_mc(site_like(F(3, 4)), 2, 4, 4000, 20260825)
        assert rec.pgf_survival == F(11205, 16384)
        assert rec.within_ci
        assert rec.replications == 4000
        assert rec.vertex_count == 16
        assert rec.leaf_count == 8
        # Conditioning matters: without the forced boundary weights the
        # same event is strictly less likely for this law.
        assert rec.unconditioned.estimate < rec.conditioned.ci_low
        assert "agreement: True" in rec.summary_line()

    def test_single_child_chain(self):
        # Chain of length 3 with forced endpoints: open with probability
        # E[W W_bar]^2 = 1/16.
        rec = compare_tree_mc(independent_bits(), 1, 3, 4000, 31)
        assert rec.pgf_survival == F(1, 16)
        assert rec.within_ci

    def test_depth_one_forced_edge(self):
        rec = compare_tree_mc(site_like(F(1, 2)), 2, 1, 200, 99)
        assert rec.pgf_survival == 1
        assert rec.conditioned.estimate == 1.0

    def test_same_seed_reproduces(self):
        a = compare_tree_mc(site_like(F(3, 4)), 2, 4, 1000, 123)
        b = compare_tree_mc(site_like(F(3, 4)), 2, 4, 1000, 123)
        assert a.conditioned == b.conditioned
        assert a.unconditioned == b.unconditioned

    def test_rejects_oversized_tree(self):
        with pytest.raises(InstanceTooLargeError):
            compare_tree_mc(site_like(F(1, 2)), 10, 7, 10, 1)

    def test_rejects_bad_depth(self):
        with pytest.raises(InvalidParameterError):
            compare_tree_mc(site_like(F(1, 2)), 2, 0, 10, 1)

    def test_record_is_a_tree_comparison(self):
        rec = compare_tree_mc(site_like(F(1, 2)), 2, 2, 200, 5)
        assert isinstance(rec, TreeComparisonRecord)
        assert rec.offspring.probabilities == (F(1, 2), 0, F(1, 2))
