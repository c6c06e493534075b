"""Tests for the exact output distributions.

Oracles: per-mode adaptive quadrature of the radial density (independent of
the recurrence-based click response), full 2-D quadrature for one small case,
phase-grid averaging of the CV density, and Richardson extrapolation for the
small-threshold limit.
"""

import itertools
import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from cvboson.distribution import (
    DistributionTable,
    amplitude_table,
    density_cv,
    density_prcv,
    distribution_table,
    leading_order,
    prcv_cell_integral,
    prob_dprcv,
)
from cvboson.errors import GuardLimitError, InvalidPatternError
from cvboson.fock import enumerate_fock_patterns, fock_amplitude, haar_unitary
from cvboson.special import detector_efficiency, g_function


class TestDensityCv:
    def test_all_zero_outcomes_give_squared_permanent(self):
        u = haar_unitary(3, 5)
        expected = abs(fock_amplitude(u, (1, 1, 1))) ** 2 / (2 * np.pi) ** 3
        assert density_cv(u, [0, 0, 0], 3) == pytest.approx(expected, rel=1e-12)

    def test_vacuum_single_mode(self):
        alpha = 0.8 - 0.3j
        expected = math.exp(-abs(alpha) ** 2) * abs(alpha) ** 2 / (2 * np.pi)
        assert density_cv(np.eye(1), [alpha], 0) == pytest.approx(expected, rel=1e-12)

    def test_partial_zero_outcomes_factorize(self):
        u = haar_unitary(4, 8)
        alphas = np.array([0, 0, 0.6 + 0.1j, -0.2 + 0.9j])
        perm_sq = abs(fock_amplitude(u, (1, 1, 0, 0))) ** 2
        tail = math.prod(
            math.exp(-abs(a) ** 2) * abs(a) ** 2 for a in alphas[2:]
        )
        expected = perm_sq * tail / (2 * np.pi) ** 4
        assert density_cv(u, alphas, 2) == pytest.approx(expected, rel=1e-10)

    def test_zero_outcome_selection_rule(self):
        # with alpha_1 = 0 only patterns with n_1 = 1 contribute
        u = haar_unitary(3, 13)
        alphas = np.array([0, 0.4 + 0.2j, -0.7j])
        full = density_cv(u, alphas, 2)
        from cvboson.fock import displacement_element

        restricted = 0j
        for pattern in enumerate_fock_patterns(3, 2):
            if pattern[0] != 1:
                continue
            amp = fock_amplitude(u, pattern)
            term = amp
            for a, nj in zip(alphas, pattern):
                term *= np.conj(displacement_element(nj, 1, a))
            restricted += term
        assert full == pytest.approx(abs(restricted) ** 2 / (2 * np.pi) ** 3, rel=1e-12)

    def test_non_negative(self):
        rng = np.random.default_rng(4)
        u = haar_unitary(3, 17)
        for _ in range(25):
            alphas = rng.normal(size=3) + 1j * rng.normal(size=3)
            assert density_cv(u, alphas, 2) >= 0

    def test_guard(self):
        with pytest.raises(GuardLimitError):
            density_cv(haar_unitary(11, 0), np.zeros(11), 2)


class TestDensityPrcv:
    def test_single_mode_closed_form(self):
        for big_r in (0.0, 0.3, 1.0, 4.2):
            expected = math.exp(-big_r) * (1 - big_r) ** 2
            assert density_prcv(np.eye(1), [big_r], 1) == pytest.approx(expected, rel=1e-12)

    def test_single_mode_normalization(self):
        value, _ = quad(lambda r: density_prcv(np.eye(1), [r], 1), 0, 60, limit=200)
        assert value == pytest.approx(1, abs=1e-9)

    def test_zero_radii_select_squared_permanent(self):
        # zeros on the first N modes leave |Per|^2 times e^{-R_j} R_j on the rest
        u = haar_unitary(4, 16)
        radii = np.array([0.0, 0.0, 0.9, 2.4])
        perm_sq = abs(fock_amplitude(u, (1, 1, 0, 0))) ** 2
        tail = math.prod(math.exp(-r) * r for r in radii[2:])
        assert density_prcv(u, radii, 2) == pytest.approx(perm_sq * tail, rel=1e-10)

    def test_two_mode_normalization_by_2d_quadrature(self):
        u = haar_unitary(2, 6)
        value, err = dblquad(
            lambda r2, r1: density_prcv(u, [r1, r2], 1),
            0,
            30,
            0,
            30,
            epsabs=1e-8,
            epsrel=1e-8,
        )
        assert value == pytest.approx(1, abs=max(1e-6, 5 * err))

    def test_equals_phase_average_of_cv_density(self):
        # averaging the CV density over per-mode phases gives the radial
        # density up to the (2 pi)^M phase volume
        u = haar_unitary(2, 9)
        radii = np.array([0.7, 2.1])
        n_grid = 32
        acc = 0.0
        for i in range(n_grid):
            for j in range(n_grid):
                alphas = np.sqrt(radii) * np.exp(
                    2j * np.pi * np.array([i, j]) / n_grid
                )
                acc += density_cv(u, alphas, 2)
        average = acc / n_grid**2
        expected = density_prcv(u, radii, 2) / (2 * np.pi) ** 2
        assert average == pytest.approx(expected, abs=1e-6 * expected)


class TestProbDprcv:
    def test_single_mode_click_is_efficiency(self):
        for t in (0.01, 0.3, 1.5):
            assert prob_dprcv(np.eye(1), (1,), t, 1) == pytest.approx(
                detector_efficiency(t), rel=1e-12
            )

    def test_hong_ou_mandel_coincidence(self):
        bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        for t in (0.07, 0.4):
            expected = g_function(t, 0) * g_function(t, 2)
            assert abs(prob_dprcv(bs, (1, 1), t, 2) - expected) <= 1e-12

    @pytest.mark.parametrize("modes,photons,seed", [(3, 2, 1), (5, 3, 2), (6, 3, 3)])
    def test_patterns_sum_to_one(self, modes, photons, seed):
        u = haar_unitary(modes, seed)
        total = sum(
            prob_dprcv(u, clicks, 0.05, photons)
            for clicks in itertools.product((0, 1), repeat=modes)
        )
        assert total == pytest.approx(1, abs=1e-10)

    def test_permutation_covariance(self):
        u = haar_unitary(4, 30)
        rng = np.random.default_rng(0)
        clicks = (1, 0, 1, 0)
        reference = prob_dprcv(u, clicks, 0.2, 2)
        for _ in range(5):
            sigma = rng.permutation(4)
            permuted = prob_dprcv(
                u[:, sigma], tuple(np.asarray(clicks)[sigma]), 0.2, 2
            )
            assert permuted == pytest.approx(reference, abs=1e-12)

    def test_click_entries_validated(self):
        with pytest.raises(InvalidPatternError):
            prob_dprcv(np.eye(2), (2, 0), 0.1, 2)


class TestDistributionTable:
    def test_lexicographic_pattern_order(self):
        table = distribution_table(haar_unitary(3, 2), 1, 0.1)
        assert table.patterns()[:3] == ((0, 0, 0), (0, 0, 1), (0, 1, 0))

    def test_residual_small_at_full_scale(self):
        table = distribution_table(haar_unitary(12, 5), 4, 0.02)
        assert isinstance(table, DistributionTable)
        assert table.normalization_residual <= 1e-10
        probs = table.probabilities()
        assert np.all(probs >= 0) and np.all(probs <= 1)

    def test_guard(self):
        with pytest.raises(GuardLimitError):
            distribution_table(haar_unitary(13, 0), 1, 0.1)


class TestCellIntegralConsistency:
    @pytest.mark.parametrize(
        "modes,photons,clicks,seed",
        [(2, 1, (1, 0), 4), (2, 2, (1, 1), 5), (3, 2, (0, 1, 1), 6), (3, 3, (1, 1, 1), 7)],
    )
    def test_quadrature_route_matches_click_response(self, modes, photons, clicks, seed):
        u = haar_unitary(modes, seed)
        t = 0.3
        direct = prob_dprcv(u, clicks, t, photons)
        by_quadrature = prcv_cell_integral(u, clicks, t, photons)
        assert by_quadrature == pytest.approx(direct, abs=1e-6)

    def test_full_2d_quadrature_single_case(self):
        u = haar_unitary(2, 11)
        t = 0.5
        direct = prob_dprcv(u, (1, 0), t, 1)
        value, err = dblquad(
            lambda r2, r1: density_prcv(u, [r1, r2], 1),
            0,
            t,  # r1 in the click cell
            t,
            35.0,  # r2 outside
            epsabs=1e-9,
            epsrel=1e-9,
        )
        assert value == pytest.approx(direct, abs=max(1e-6, 5 * err))


class TestLeadingOrder:
    def test_identity_network_leading_term(self):
        t = 1e-3
        leading, _ = leading_order(np.eye(3), (1, 1, 1), t)
        assert leading == pytest.approx(t**3, rel=1e-12)

    def test_richardson_limit_of_click_probability(self):
        u = haar_unitary(4, 19)
        clicks = (1, 1, 0, 0)
        perm_sq = abs(fock_amplitude(u, clicks)) ** 2
        ratios = {}
        for t in (1e-4, 1e-5):
            ratios[t] = prob_dprcv(u, clicks, t, 2) / t**2
        richardson = (10 * ratios[1e-5] - ratios[1e-4]) / 9
        assert richardson == pytest.approx(perm_sq, rel=1e-6)
        leading, _ = leading_order(u, clicks, 1e-5, 2)
        assert leading == pytest.approx(perm_sq * 1e-10, rel=1e-12)

    def test_neighbor_mass_bounded_by_one(self):
        for seed in range(100):
            u = haar_unitary(5, seed)
            _, neighbor_mass = leading_order(u, (1, 1, 0, 0, 0), 1e-3)
            assert 0 <= neighbor_mass <= 1

    def test_click_count_mismatch_rejected(self):
        with pytest.raises(InvalidPatternError):
            leading_order(np.eye(3), (1, 1, 0), 1e-3, photons=3)


def test_amplitude_table_normalized():
    patterns, amps = amplitude_table(haar_unitary(5, 23), 3)
    assert len(patterns) == len(amps) == 35
    assert np.sum(np.abs(amps) ** 2) == pytest.approx(1, abs=1e-10)
