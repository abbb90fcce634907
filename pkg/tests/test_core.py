"""Kernel tests: frozen oracle values, high-precision cross-checks, properties."""

import mpmath
import numpy as np
import pytest

from smoothcast.core import (
    ConfigurationError,
    DimensionError,
    DomainError,
    InfiniteDivergenceError,
    LossSpec,
    exp_weight_update,
    relative_entropy,
    square_loss,
    subst_mean,
    subst_vovk,
    substitute,
    superprediction,
    verify_substitution,
)

# Frozen by the extended-precision oracle below (50 decimal digits, rounded).
SUPERPREDICTION_EXAMPLE = 0.4381403927596772
SUBST_VOVK_EXAMPLE = 0.35958174979799207


def _mp_superprediction(y, forecasts, weights, bound, eta):
    with mpmath.workdps(50):
        total = mpmath.fsum(
            p * mpmath.e ** (-eta * (y - c) ** 2) for c, p in zip(forecasts, weights)
        )
        return -mpmath.log(total) / eta


def _mp_subst_vovk(forecasts, weights, bound, eta):
    with mpmath.workdps(50):
        near = mpmath.fsum(
            p * mpmath.e ** (-eta * (bound - c) ** 2) for c, p in zip(forecasts, weights)
        )
        far = mpmath.fsum(
            p * mpmath.e ** (-eta * (bound + c) ** 2) for c, p in zip(forecasts, weights)
        )
        return (mpmath.log(near) - mpmath.log(far)) / (4 * eta * bound)


def _mp_update(weights, losses, eta):
    with mpmath.workdps(60):
        raw = [w * mpmath.e ** (-mpmath.mpf(eta) * l) for w, l in zip(weights, losses)]
        total = mpmath.fsum(raw)
        return [r / total for r in raw]


class TestLossSpec:
    def test_limits(self):
        spec = LossSpec(bound=2.0, eta=0.05)
        assert spec.mixable_eta_limit == pytest.approx(1 / 8)
        assert spec.exp_concave_eta_limit == pytest.approx(1 / 32)

    def test_rate_constructors(self):
        assert LossSpec.with_mixable_rate(1.0).eta == pytest.approx(0.5)
        assert LossSpec.with_exp_concave_rate(1.0).eta == pytest.approx(0.125)

    @pytest.mark.parametrize("bound,eta", [(0.0, 0.5), (-1.0, 0.5), (1.0, 0.0), (1.0, -1.0), (np.inf, 0.5), (1.0, np.nan)])
    def test_rejects_bad_parameters(self, bound, eta):
        with pytest.raises(ConfigurationError):
            LossSpec(bound=bound, eta=eta)


class TestSquareLoss:
    def test_scalar(self):
        assert square_loss(0.3, -0.2) == pytest.approx(0.25)
        assert square_loss(1.0, 1.0) == 0.0

    def test_vectorized(self):
        out = square_loss(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(out, [1.0, 0.0])


class TestSuperprediction:
    def test_frozen_example(self):
        spec = LossSpec(bound=1.0, eta=0.5)
        g = superprediction(1.0, (1.0, 0.0), (0.5, 0.5), spec)
        assert g == pytest.approx(SUPERPREDICTION_EXAMPLE, abs=1e-15)
        oracle = float(_mp_superprediction(1.0, (1.0, 0.0), (0.5, 0.5), 1.0, 0.5))
        assert oracle == pytest.approx(SUPERPREDICTION_EXAMPLE, abs=1e-15)

    def test_single_expert_collapses_to_loss(self):
        spec = LossSpec(bound=1.0, eta=0.5)
        assert superprediction(0.4, (-0.3,), (1.0,), spec) == pytest.approx(0.49)

    def test_between_soft_min_brackets(self):
        rng = np.random.default_rng(7)
        spec = LossSpec(bound=1.0, eta=0.5)
        for _ in range(200):
            n = int(rng.integers(1, 8))
            c = rng.uniform(-1, 1, n)
            p = rng.dirichlet(np.ones(n))
            y = float(rng.uniform(-1, 1))
            losses = (y - c) ** 2
            g = superprediction(y, c, p, spec)
            assert g >= losses.min() - 1e-12
            caps = losses[p > 0] + np.log(1.0 / p[p > 0]) / spec.eta
            assert g <= caps.min() + 1e-12


class TestSubstVovk:
    def test_single_expert_identity(self):
        spec = LossSpec.with_mixable_rate(1.0)
        rng = np.random.default_rng(11)
        for c in rng.uniform(-1, 1, 50):
            assert subst_vovk([c], [1.0], spec) == pytest.approx(c, abs=1e-12)

    def test_symmetric_pair_gives_zero(self):
        spec = LossSpec.with_mixable_rate(1.0)
        assert subst_vovk([0.6, -0.6], [0.5, 0.5], spec) == pytest.approx(0.0, abs=1e-15)

    def test_frozen_example(self):
        spec = LossSpec(bound=1.0, eta=0.5)
        gamma = subst_vovk([0.8, -0.4], [0.7, 0.3], spec)
        assert gamma == pytest.approx(SUBST_VOVK_EXAMPLE, abs=1e-14)
        oracle = float(_mp_subst_vovk([0.8, -0.4], [0.7, 0.3], 1.0, 0.5))
        assert oracle == pytest.approx(SUBST_VOVK_EXAMPLE, abs=1e-14)

    @pytest.mark.parametrize("bound", [0.5, 1.0, 3.0])
    def test_never_exceeds_superprediction(self, bound):
        rng = np.random.default_rng(int(bound * 10))
        for trial in range(120):
            eta = float(rng.uniform(0.1, 1.0)) / (2.0 * bound**2)
            spec = LossSpec(bound=bound, eta=eta)
            n = int(rng.integers(1, 10))
            c = rng.uniform(-bound, bound, n)
            p = rng.dirichlet(np.ones(n))
            gamma = subst_vovk(c, p, spec)
            assert abs(gamma) <= bound
            check = verify_substitution(gamma, c, p, spec, grid_points=1001)
            assert check.passed, f"violation {check.worst_violation}"

    def test_extreme_weight_concentration(self):
        spec = LossSpec.with_mixable_rate(1.0)
        gamma = subst_vovk([0.9, -0.9], [1.0 - 1e-14, 1e-14], spec)
        assert gamma == pytest.approx(0.9, abs=1e-9)

    def test_eta_out_of_range_rejected(self):
        with pytest.raises(ConfigurationError):
            subst_vovk([0.0], [1.0], LossSpec(bound=1.0, eta=1.0))

    def test_forecast_out_of_range_rejected(self):
        spec = LossSpec.with_mixable_rate(1.0)
        with pytest.raises(DomainError):
            subst_vovk([1.5], [1.0], spec)

    def test_misaligned_rejected(self):
        spec = LossSpec.with_mixable_rate(1.0)
        with pytest.raises(DimensionError):
            subst_vovk([0.1, 0.2], [1.0], spec)
        with pytest.raises(DomainError):
            subst_vovk([0.1, 0.2], [0.7, 0.7], spec)


class TestSubstMean:
    def test_weighted_average(self):
        spec = LossSpec.with_exp_concave_rate(1.0)
        assert subst_mean([0.8, -0.4], [0.25, 0.75], spec) == pytest.approx(-0.1)

    def test_valid_at_exp_concave_rate(self):
        rng = np.random.default_rng(23)
        for bound in (0.5, 1.0, 2.0):
            spec = LossSpec.with_exp_concave_rate(bound)
            for _ in range(60):
                n = int(rng.integers(1, 8))
                c = rng.uniform(-bound, bound, n)
                p = rng.dirichlet(np.ones(n))
                gamma = subst_mean(c, p, spec)
                check = verify_substitution(gamma, c, p, spec, grid_points=1001)
                assert check.passed, f"violation {check.worst_violation}"

    def test_rejected_beyond_exp_concave_rate(self):
        # eta = 1/bound^2 is outside the admissible range for this rule.
        with pytest.raises(ConfigurationError):
            subst_mean([0.5, -0.5], [0.5, 0.5], LossSpec(bound=1.0, eta=1.0))

    def test_guarantee_fails_at_mixable_rate(self):
        # The weighted mean genuinely breaks the superprediction guarantee at
        # the higher rate (both experts in the convex tail of the
        # exponentiated loss), so the tighter admissibility limit is necessary.
        spec = LossSpec.with_mixable_rate(1.0)
        c, p = [-1.0, -0.6], [0.5, 0.5]
        gamma = float(np.dot(c, p))
        check = verify_substitution(gamma, c, p, spec)
        assert not check.passed
        assert check.worst_violation > 0.05


class TestSubstituteDispatch:
    def test_dispatch(self):
        spec = LossSpec.with_exp_concave_rate(1.0)
        c, p = [0.4, -0.2], [0.5, 0.5]
        assert substitute(c, p, spec, "vovk") == pytest.approx(subst_vovk(c, p, spec))
        assert substitute(c, p, spec, "mean") == pytest.approx(subst_mean(c, p, spec))

    def test_unknown_rule(self):
        with pytest.raises(ConfigurationError):
            substitute([0.0], [1.0], LossSpec.with_mixable_rate(1.0), "median")


class TestExpWeightUpdate:
    def test_half_life_example(self):
        spec = LossSpec(bound=1.0, eta=0.5)
        w = exp_weight_update([0.5, 0.5], [0.0, np.log(2) / spec.eta], spec)
        np.testing.assert_allclose(w, [2 / 3, 1 / 3], atol=1e-15)

    def test_matches_extended_precision_oracle(self):
        # Losses spanning magnitudes up to 1e3 / eta must not break the update.
        rng = np.random.default_rng(31)
        for _ in range(60):
            eta = float(rng.uniform(0.05, 0.5))
            spec = LossSpec(bound=1.0, eta=eta)
            n = int(rng.integers(2, 9))
            w = rng.dirichlet(np.ones(n))
            losses = rng.uniform(0.0, 1e3 / eta, n)
            got = exp_weight_update(w, losses, spec)
            oracle = np.array([float(v) for v in _mp_update(w, losses, eta)])
            np.testing.assert_allclose(got, oracle, atol=1e-12)
            assert got.sum() == pytest.approx(1.0, abs=1e-12)

    def test_zero_weight_at_argmin_loss(self):
        # The shift must come from the support, not from a zero-weight entry.
        spec = LossSpec(bound=1.0, eta=1e-3)
        w = exp_weight_update([0.0, 1.0], [0.0, 2000.0 / spec.eta], spec)
        np.testing.assert_allclose(w, [0.0, 1.0], atol=0)

    def test_zero_mass_stays_zero(self):
        spec = LossSpec(bound=1.0, eta=0.5)
        w = exp_weight_update([0.5, 0.0, 0.5], [1.0, 0.0, 1.0], spec)
        assert w[1] == 0.0
        np.testing.assert_allclose(w, [0.5, 0.0, 0.5], atol=1e-15)

    def test_rejects_bad_inputs(self):
        spec = LossSpec(bound=1.0, eta=0.5)
        with pytest.raises(DimensionError):
            exp_weight_update([0.5, 0.5], [1.0], spec)
        with pytest.raises(DomainError):
            exp_weight_update([0.5, 0.5], [np.inf, 0.0], spec)
        with pytest.raises(DomainError):
            exp_weight_update([0.9, 0.3], [0.0, 0.0], spec)


class TestRelativeEntropy:
    def test_point_mass_against_uniform(self):
        assert relative_entropy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2))

    def test_zero_on_identical(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            p = rng.dirichlet(np.ones(int(rng.integers(1, 9))))
            assert relative_entropy(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(43)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            q = rng.dirichlet(np.ones(n))
            p = rng.dirichlet(np.ones(n))
            assert relative_entropy(q, p) >= -1e-12

    def test_infinite_divergence_raises(self):
        with pytest.raises(InfiniteDivergenceError):
            relative_entropy([0.5, 0.5], [1.0, 0.0])

    def test_zero_times_log_zero_is_zero(self):
        assert relative_entropy([0.0, 1.0], [0.0, 1.0]) == 0.0


class TestVerifySubstitution:
    def test_flags_gross_violation(self):
        # A forecast at +bound against a point mass on -bound loses 4*bound^2
        # at y = -bound while the superprediction there is 0.
        spec = LossSpec.with_mixable_rate(1.0)
        check = verify_substitution(1.0, [-1.0], [1.0], spec)
        assert not check.passed
        assert check.worst_violation == pytest.approx(4.0, abs=1e-12)

    def test_grid_too_small_rejected(self):
        spec = LossSpec.with_mixable_rate(1.0)
        with pytest.raises(ConfigurationError):
            verify_substitution(0.0, [0.0], [1.0], spec, grid_points=2)
