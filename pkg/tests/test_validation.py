"""Generalized-inverse construction, the explicit-prior oracle, testability."""

import math

import numpy as np
import pytest

from conftest import one_factor_assembly
from facsel.design import ModelGamma, matrix_rank_sse
from facsel.errors import ConstructionError
from facsel.numerics import HyperGPrior, bayes_factor_robust_closed
from facsel.validation import (T_VARIANTS, build_nullspace_psd,
                               check_generalized_inverse, explicit_prior_log_bf,
                               marginal_via_explicit_prior, run_validation,
                               suite_closed_form, suite_explicit_prior,
                               suite_generalized_inverse, suite_rank_identity,
                               suite_testability)
from facsel.validation import testability_check as check_testability  # avoid test collection


def _factor_V(cells, n_sure=0, seed=0):
    rng = np.random.default_rng(seed)
    ell = len(cells)
    n = sum(cells)
    labels = np.repeat(np.arange(ell), cells)
    X0 = np.hstack([np.ones((n, 1)), rng.standard_normal((n, n_sure))]) \
        if n_sure else np.ones((n, 1))
    Z = np.zeros((n, ell))
    Z[np.arange(n), labels] = 1.0
    V = Z - X0 @ np.linalg.lstsq(X0, Z, rcond=None)[0]
    return X0, Z, V


class TestBuildNullspacePsd:
    def test_rank_matches_nullity(self):
        # intercept + 3-level factor: rank(V) = 2, so T has rank 1
        _, _, V = _factor_V((4, 4, 4))
        T = build_nullspace_psd(V, "null_projector")
        assert np.linalg.matrix_rank(T) == 1
        vals = np.linalg.eigvalsh(T)
        assert vals.min() >= -1e-12  # PSD

    def test_scaled_variants_pass_gi_check(self):
        _, _, V = _factor_V((5, 4, 6), seed=2)
        for c in (0.1, 10.0):
            T = build_nullspace_psd(V, "scaled_null_projector", c=c)
            assert check_generalized_inverse(V, T).passed

    def test_random_variant_reproducible_and_valid(self):
        _, _, V = _factor_V((3, 5, 4, 4), seed=3)
        T1 = build_nullspace_psd(V, "random_psd_in_nullspace", seed=99)
        T2 = build_nullspace_psd(V, "random_psd_in_nullspace", seed=99)
        np.testing.assert_array_equal(T1, T2)
        assert check_generalized_inverse(V, T1).passed

    def test_full_rank_v_has_no_nullspace(self):
        rng = np.random.default_rng(4)
        V = rng.standard_normal((10, 3))
        with pytest.raises(ConstructionError, match="full column rank"):
            build_nullspace_psd(V)

    def test_bad_variant_and_scale(self):
        _, _, V = _factor_V((4, 4))
        with pytest.raises(ValueError):
            build_nullspace_psd(V, "something")
        with pytest.raises(ValueError):
            build_nullspace_psd(V, "scaled_null_projector", c=-1.0)


class TestGIConstruction:
    def test_bundle_invariants(self):
        from facsel.validation import GIConstruction
        _, _, V = _factor_V((4, 5, 6), n_sure=1, seed=21)
        for variant in T_VARIANTS:
            gi = GIConstruction.build(V, variant, c=2.0, seed=3)
            assert gi.rank == 2 and gi.Q2.shape[1] == 1
            assert np.all(gi.D > 0.0)
            chk = gi.check()
            assert chk.passed, chk

    def test_spectral_split_reconstructs_vtv(self):
        from facsel.validation import GIConstruction
        _, _, V = _factor_V((4, 4, 4, 4), seed=22)
        gi = GIConstruction.build(V)
        VtV = V.T @ V
        np.testing.assert_allclose(gi.Q1 @ np.diag(gi.D) @ gi.Q1.T, VtV,
                                   atol=1e-10 * np.linalg.norm(VtV))


class TestGeneralizedInverseCheck:
    def test_suite_of_seeded_designs(self):
        results = suite_generalized_inverse()
        assert len(results) == 60  # 20 designs x 3 variants
        assert all(r.passed for r in results)

    def test_zero_t_on_rank_deficient_v_is_singular(self):
        _, _, V = _factor_V((4, 4, 4))
        with pytest.raises(ConstructionError, match="singular"):
            check_generalized_inverse(V, np.zeros((3, 3)))

    def test_full_rank_v_with_zero_t_is_plain_inverse(self):
        rng = np.random.default_rng(5)
        V = rng.standard_normal((12, 3))
        chk = check_generalized_inverse(V, np.zeros((3, 3)))
        assert chk.passed and chk.residual < 1e-12


class TestExplicitPriorOracle:
    def test_small_instance_all_t_variants_match_closed_form(self):
        X0, Z, V = _factor_V((4, 4, 4), seed=10)
        rng = np.random.default_rng(10)
        y = Z @ np.array([0.5, -0.2, 0.0]) + rng.standard_normal(12)
        n, k0 = X0.shape
        r, sse = matrix_rank_sse(np.hstack([X0, Z]), y)
        _, sse0 = matrix_rank_sse(X0, y)
        closed = bayes_factor_robust_closed(min(sse / sse0, 1.0), k0, r, n).logm
        got = []
        for variant in T_VARIANTS:
            T = build_nullspace_psd(V, variant, c=7.0, seed=77)
            got.append(explicit_prior_log_bf(y, X0, Z, T))
        for v in got:
            assert v == pytest.approx(closed, abs=1e-4 * max(1.0, abs(closed)))
        for a in got:
            for b in got:
                assert abs(a - b) <= 1e-6

    def test_two_level_factor_matches_binary_coding_bf(self):
        X0, Z, V = _factor_V((4, 4), seed=11)
        rng = np.random.default_rng(11)
        y = Z @ np.array([0.0, 1.0]) + rng.standard_normal(8)
        T = build_nullspace_psd(V, "null_projector")
        explicit = explicit_prior_log_bf(y, X0, Z, T)
        # binary coding: single 0/1 column, full rank, no T needed
        n, k0 = X0.shape
        r, sse = matrix_rank_sse(np.hstack([X0, Z[:, 1:2]]), y)
        _, sse0 = matrix_rank_sse(X0, y)
        binary = bayes_factor_robust_closed(min(sse / sse0, 1.0), k0, r, n).logm
        assert explicit == pytest.approx(binary, abs=1e-5)

    def test_no_signal_matches_q_one_core(self):
        # cell-balanced response: every cell mean equals the null fit
        cells = (4, 4, 4)
        X0, Z, V = _factor_V(cells)
        y = np.tile([1.0, -1.0], 6)
        T = build_nullspace_psd(V, "null_projector")
        explicit = explicit_prior_log_bf(y, X0, Z, T)
        expected = bayes_factor_robust_closed(1.0, 1, 3, 12).logm
        assert explicit == pytest.approx(expected, abs=1e-6)

    def test_assembly_entry_point(self):
        asm = one_factor_assembly(cells=(4, 4, 4), seed=12)
        gamma = ModelGamma.full(asm.k, asm.L)
        Z = np.asarray(asm.Z)
        X0 = np.asarray(asm.X0)
        V = Z - X0 @ np.linalg.lstsq(X0, Z, rcond=None)[0]
        T = build_nullspace_psd(V, "null_projector")
        via_op = marginal_via_explicit_prior(asm, gamma, T)
        direct = explicit_prior_log_bf(np.asarray(asm.y), X0, Z, T)
        assert via_op == pytest.approx(direct, abs=1e-12)

    def test_custom_mixing_density_consistency(self):
        # the theorem is prior-agnostic: oracle and quadrature must agree for
        # a non-robust mixing density too
        from facsel.numerics import bayes_factor_quadrature
        prior = HyperGPrior.custom(lambda g: math.exp(-g), (0.0, math.inf),
                                   label="unit-exponential")
        X0, Z, V = _factor_V((5, 5, 5), seed=13)
        rng = np.random.default_rng(13)
        y = Z @ np.array([0.7, 0.0, -0.7]) + rng.standard_normal(15)
        T = build_nullspace_psd(V, "scaled_null_projector", c=2.5)
        explicit = explicit_prior_log_bf(y, X0, Z, T, prior)
        n, k0 = X0.shape
        r, sse = matrix_rank_sse(np.hstack([X0, Z]), y)
        _, sse0 = matrix_rank_sse(X0, y)
        expected = bayes_factor_quadrature(min(sse / sse0, 1.0), k0, r, n, prior).logm
        assert explicit == pytest.approx(expected, abs=1e-5)


class TestTestability:
    def test_indicator_design_all_effects_hypothesis(self):
        # intercept + 2-level factor, 2 observations per level (4 x 3 design):
        # "both level effects are zero" is not testable, a contrast is
        Z = np.hstack([np.ones((4, 1)), np.kron(np.eye(2), np.ones((2, 1)))])
        assert not check_testability(Z, np.array([[0., 1., 0.], [0., 0., 1.]]))
        assert check_testability(Z, np.array([[0., 1., -1.]]))

    def test_full_rank_design_everything_testable(self):
        rng = np.random.default_rng(14)
        design = rng.standard_normal((20, 5))
        for _ in range(5):
            assert check_testability(design, rng.standard_normal((3, 5)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            check_testability(np.ones((4, 3)), np.ones((1, 2)))


class TestSuites:
    def test_rank_identity_suite(self):
        results = suite_rank_identity()
        assert len(results) == 1 and results[0].passed

    def test_testability_suite(self):
        assert all(r.passed for r in suite_testability())

    def test_explicit_prior_suite(self):
        results = suite_explicit_prior()
        assert len(results) == 10  # 5 instances x (closed-form + pairwise)
        assert all(r.passed for r in results)

    def test_closed_form_suite(self):
        results = suite_closed_form()
        assert results[0].passed

    def test_run_validation_filters(self):
        ok, results = run_validation(suites=("testability",))
        assert ok and all(r.suite == "testability" for r in results)
        with pytest.raises(ValueError):
            run_validation(suites=("nope",))

    def test_seed_override(self):
        ok, results = run_validation(suites=("gi",), seed=555)
        assert ok and len(results) == 60
