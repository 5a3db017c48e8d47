"""Model-space priors: desk values, mass audits, and symmetry properties."""

import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from facsel.design import ModelGamma
from facsel.errors import CapacityError
from facsel.modelspace import (ModelPriorScheme, log_prior_constant,
                               log_prior_hierarchical,
                               log_prior_scott_berger_flat, prior_mass_audit)


def _all_gammas(k, ells):
    L = sum(ells)
    for m in range(1 << (k + L)):
        yield ModelGamma.from_index(m, k, L)


class TestConstantPrior:
    def test_desk_values_one_factor(self):
        # null-model mass halves with every extra level column
        for ell, expected in [(4, 1.0 / 16.0), (6, 1.0 / 64.0)]:
            scheme = ModelPriorScheme("constant", k=0, ells=(ell,))
            got = scheme.prior(ModelGamma.null(0, ell))
            assert abs(got - expected) <= 1e-12

    def test_uniform_and_sums_to_one(self):
        scheme = ModelPriorScheme("constant", k=2, ells=(3,))
        priors = [scheme.prior(g) for g in _all_gammas(2, (3,))]
        assert len(set(priors)) == 1
        assert math.fsum(priors) == pytest.approx(1.0, abs=1e-12)


class TestScottBergerFlat:
    def test_desk_values_one_factor(self):
        for ell, expected in [(4, 1.0 / 5.0), (6, 1.0 / 7.0)]:
            scheme = ModelPriorScheme("scott-berger", k=0, ells=(ell,))
            got = scheme.prior(ModelGamma.null(0, ell))
            assert abs(got - expected) <= 1e-12

    def test_mass_sums_to_one(self):
        scheme = ModelPriorScheme("scott-berger", k=1, ells=(3, 2))
        priors = [scheme.prior(g) for g in _all_gammas(1, (3, 2))]
        assert math.fsum(priors) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_over_sizes(self):
        k, ells = 1, (4,)
        scheme = ModelPriorScheme("scott-berger", k=k, ells=ells)
        by_size = {}
        for g in _all_gammas(k, ells):
            by_size.setdefault(g.size, 0.0)
            by_size[g.size] += scheme.prior(g)
        for mass in by_size.values():
            assert mass == pytest.approx(1.0 / 6.0, abs=1e-12)


class TestHierarchicalPrior:
    def test_one_factor_null_is_half_regardless_of_levels(self):
        for ell in (2, 4, 6, 9):
            scheme = ModelPriorScheme("hierarchical", k=0, ells=(ell,))
            assert scheme.prior(ModelGamma.null(0, ell)) == pytest.approx(0.5, abs=1e-15)

    def test_one_factor_conditional_is_scott_berger_within_levels(self):
        ell = 5
        scheme = ModelPriorScheme("hierarchical", k=0, ells=(ell,))
        for bits in product((0, 1), repeat=ell):
            g = ModelGamma((), bits)
            if g.is_null():
                continue
            c = sum(bits)
            conditional = scheme.prior(g) / 0.5
            assert conditional == pytest.approx(
                1.0 / (ell * math.comb(ell, c)), rel=1e-14)

    def test_exact_rational_values(self):
        # k=1, p=1, ell=3: stage one [(k+p+1) C(k+p, m1+m2)]^{-1}, stage two
        # [ell C(ell, c)]^{-1}; checked as exact fractions
        scheme = ModelPriorScheme("hierarchical", k=1, ells=(3,))
        cases = {
            ((0,), (0, 0, 0)): Fraction(1, 3),
            ((1,), (0, 0, 0)): Fraction(1, 6),
            ((0,), (1, 0, 0)): Fraction(1, 6) * Fraction(1, 9),
            ((1,), (1, 1, 0)): Fraction(1, 3) * Fraction(1, 9),
            ((1,), (1, 1, 1)): Fraction(1, 3) * Fraction(1, 3),
        }
        for (vb, lb), frac in cases.items():
            got = scheme.prior(ModelGamma(vb, lb))
            assert got == pytest.approx(float(frac), rel=1e-14)

    def test_equal_configurations_get_equal_mass(self):
        scheme = ModelPriorScheme("hierarchical", k=2, ells=(4, 4))
        a = ModelGamma((1, 0), (1, 1, 0, 0, 0, 0, 1, 0))
        b = ModelGamma((0, 1), (0, 0, 1, 1, 1, 0, 0, 0))  # same (m1, m2, counts)
        assert scheme.log_prior(a) == pytest.approx(scheme.log_prior(b), abs=1e-14)

    def test_invariant_under_level_relabeling_and_factor_swap(self):
        scheme = ModelPriorScheme("hierarchical", k=0, ells=(3, 3))
        g = ModelGamma((), (1, 0, 1, 0, 1, 0))
        permuted_levels = ModelGamma((), (0, 1, 1, 0, 0, 1))
        swapped_factors = ModelGamma((), (0, 1, 0, 1, 0, 1))
        assert scheme.log_prior(g) == scheme.log_prior(permuted_levels)
        assert scheme.log_prior(g) == scheme.log_prior(swapped_factors)

    def test_mass_within_factor_minimized_at_half_full(self):
        # equal active-level counts share mass [ell C(ell, c)]^{-1}, smallest
        # where the binomial peaks
        ell = 6
        scheme = ModelPriorScheme("hierarchical", k=0, ells=(ell,))
        per_count = {}
        for bits in product((0, 1), repeat=ell):
            g = ModelGamma((), bits)
            if g.is_null():
                continue
            per_count.setdefault(sum(bits), set()).add(round(scheme.log_prior(g), 12))
        assert all(len(v) == 1 for v in per_count.values())
        masses = {c: next(iter(v)) for c, v in per_count.items()}
        assert min(masses, key=masses.get) == ell // 2

    @given(seed=st.integers(0, 999))
    def test_factor_with_no_levels_counts_as_excluded(self, seed):
        import numpy as np
        rng = np.random.default_rng(seed)
        k, ells = 2, (3, 2)
        vb = tuple(int(b) for b in rng.integers(0, 2, k))
        other = tuple(int(b) for b in rng.integers(0, 2, ells[1]))
        g_without = ModelGamma(vb, (0, 0, 0) + other)
        m1 = sum(vb)
        m2 = (1 if sum(other) else 0)
        expected = -(math.log(k + 2 + 1.0) + math.log(math.comb(k + 2, m1 + m2)))
        if sum(other):
            expected -= math.log(ells[1]) + math.log(math.comb(ells[1], sum(other)))
        assert log_prior_hierarchical(g_without, k, ells) == pytest.approx(
            expected, abs=1e-13)


class TestPriorMassAudit:
    def test_benchmark_dimensions(self):
        scheme = ModelPriorScheme("hierarchical", k=2, ells=(6, 3))
        audit = prior_mass_audit(scheme)
        assert audit.model_count == 2048
        assert abs(audit.total_mass - 1.0) <= 1e-12
        for v in audit.variable_marginals + audit.factor_marginals:
            assert abs(v - 0.5) <= 1e-12

    def test_constant_scheme_marginals(self):
        audit = prior_mass_audit(ModelPriorScheme("constant", k=1, ells=(3,)))
        for v in audit.variable_marginals + audit.level_marginals:
            assert abs(v - 0.5) <= 1e-12

    def test_scott_berger_column_marginals(self):
        audit = prior_mass_audit(ModelPriorScheme("scott-berger", k=1, ells=(4,)))
        for v in audit.variable_marginals + audit.level_marginals:
            assert abs(v - 0.5) <= 1e-12

    def test_hierarchical_level_marginal_closed_form(self):
        # P(level active) = 1/2 * mean over c>=1 of c/ell = (ell+1)/(4 ell)
        for ell in (2, 4, 6):
            audit = prior_mass_audit(ModelPriorScheme("hierarchical", k=0, ells=(ell,)))
            expected = (ell + 1.0) / (4.0 * ell)
            for v in audit.level_marginals:
                assert v == pytest.approx(expected, abs=1e-12)

    def test_size_mass_accounts_for_everything(self):
        audit = prior_mass_audit(ModelPriorScheme("hierarchical", k=1, ells=(3,)))
        assert math.fsum(audit.size_mass) == pytest.approx(1.0, abs=1e-12)

    def test_capacity_error(self):
        scheme = ModelPriorScheme("hierarchical", k=2, ells=(12, 12))
        with pytest.raises(CapacityError):
            prior_mass_audit(scheme)

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            ModelPriorScheme("gibbs", k=1, ells=(2,))


class TestSchemeDispatch:
    def test_log_prior_functions_agree_with_scheme(self):
        k, ells = 1, (3,)
        cons = ModelPriorScheme("constant", k=k, ells=ells)
        flat = ModelPriorScheme("scott-berger", k=k, ells=ells)
        hier = ModelPriorScheme("hierarchical", k=k, ells=ells)
        for g in _all_gammas(k, ells):
            assert cons.log_prior(g) == log_prior_constant(g, k, ells)
            assert flat.log_prior(g) == log_prior_scott_berger_flat(g, k, ells)
            assert hier.log_prior(g) == log_prior_hierarchical(g, k, ells)

    def test_dimension_mismatch(self):
        scheme = ModelPriorScheme("constant", k=1, ells=(3,))
        with pytest.raises(ValueError):
            scheme.log_prior(ModelGamma.null(2, 3))
