"""Tests for the seeded samplers: determinism, exactness, cross-consistency."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from cvboson.distribution import distribution_table
from cvboson.errors import GuardLimitError
from cvboson.fock import enumerate_fock_patterns, fock_amplitude, haar_unitary
from cvboson.sampler import (
    _invert_click_cdf,
    sample_cv1,
    sample_dprcv1,
    sample_fock,
    sample_prcv1,
)
from cvboson.special import detector_efficiency, g_function


def chi_square_pvalue(counts, expected):
    """Chi-square p-value with low-expectation cells pooled (exp >= 5)."""
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(expected, dtype=float)
    order = np.argsort(expected)[::-1]
    counts, expected = counts[order], expected[order]
    pooled_c, pooled_e = [], []
    spill_c = spill_e = 0.0
    for c, e in zip(counts, expected):
        if e >= 5:
            pooled_c.append(c)
            pooled_e.append(e)
        else:
            spill_c += c
            spill_e += e
    if spill_e > 0:
        pooled_c.append(spill_c)
        pooled_e.append(spill_e)
    pooled_c = np.asarray(pooled_c)
    pooled_e = np.asarray(pooled_e)
    pooled_e *= pooled_c.sum() / pooled_e.sum()
    statistic = ((pooled_c - pooled_e) ** 2 / pooled_e).sum()
    dof = len(pooled_c) - 1
    return stats.chi2.sf(statistic, dof) if dof > 0 else 1.0


def kuiper_pvalue(values):
    """Kuiper test of uniformity on [0, 1) (asymptotic tail probability)."""
    x = np.sort(np.asarray(values))
    n = x.size
    grid = np.arange(1, n + 1) / n
    v = (grid - x).max() + (x - (grid - 1 / n)).max()
    lam = (math.sqrt(n) + 0.155 + 0.24 / math.sqrt(n)) * v
    total = 0.0
    for j in range(1, 12):
        total += (4 * j**2 * lam**2 - 1) * math.exp(-2 * j**2 * lam**2)
    return min(1.0, 2 * total)


def empirical_tv(outcomes, patterns, probabilities):
    counts = {}
    for row in map(tuple, outcomes):
        counts[row] = counts.get(row, 0) + 1
    shots = len(outcomes)
    return 0.5 * sum(
        abs(counts.get(p, 0) / shots - q) for p, q in zip(patterns, probabilities)
    )


class TestDeterminism:
    def test_identical_batches_for_fixed_seed(self):
        u = haar_unitary(4, 2)
        two_mode = haar_unitary(2, 3)
        for sampler, args in [
            (sample_fock, (u, 2, 500, 11)),
            (sample_dprcv1, (u, 2, 0.1, 500, 11)),
            (sample_prcv1, (u, 2, 200, 11)),
            (sample_cv1, (two_mode, 1, 50, 11)),
        ]:
            first = sampler(*args)
            second = sampler(*args)
            assert np.array_equal(first.outcomes, second.outcomes)
            assert len(first.outcomes) == first.shots
            assert first.seed == 11

    def test_thread_count_does_not_change_output(self):
        u = haar_unitary(4, 5)
        for threads in (2, 3, 7):
            serial = sample_dprcv1(u, 2, 0.05, 2000, 9, threads=1)
            parallel = sample_dprcv1(u, 2, 0.05, 2000, 9, threads=threads)
            assert np.array_equal(serial.outcomes, parallel.outcomes)
        assert np.array_equal(
            sample_fock(u, 2, 1000, 1).outcomes,
            sample_fock(u, 2, 1000, 1, threads=4).outcomes,
        )
        assert np.array_equal(
            sample_prcv1(u, 2, 400, 1).outcomes,
            sample_prcv1(u, 2, 400, 1, threads=4).outcomes,
        )
        base = haar_unitary(2, 3)
        assert np.array_equal(
            sample_cv1(base, 1, 80, 1).outcomes,
            sample_cv1(base, 1, 80, 1, threads=4).outcomes,
        )

    def test_prefix_property_of_shot_streams(self):
        u = haar_unitary(3, 8)
        long = sample_dprcv1(u, 2, 0.1, 300, 21)
        short = sample_dprcv1(u, 2, 0.1, 120, 21)
        assert np.array_equal(long.outcomes[:120], short.outcomes)


class TestFockSampler:
    def test_identity_network_is_deterministic_pattern(self):
        batch = sample_fock(np.eye(4), 2, 200, 3)
        assert np.all(batch.outcomes == np.array([1, 1, 0, 0]))

    def test_hong_ou_mandel_bunching(self):
        bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        batch = sample_fock(bs, 2, 5000, 17)
        rows = set(map(tuple, batch.outcomes))
        assert rows <= {(2, 0), (0, 2)}
        frac = np.mean([tuple(r) == (2, 0) for r in batch.outcomes])
        assert abs(frac - 0.5) < 5 * math.sqrt(0.25 / 5000)

    def test_total_variation_against_exact_table(self):
        u = haar_unitary(4, 33)
        patterns = enumerate_fock_patterns(4, 2)
        probs = [abs(fock_amplitude(u, p)) ** 2 for p in patterns]
        batch = sample_fock(u, 2, 100_000, 7)
        assert empirical_tv(batch.outcomes, patterns, probs) <= 0.01

    def test_guard(self):
        with pytest.raises(GuardLimitError):
            sample_fock(haar_unitary(11, 0), 2, 10, 0)


class TestDprcvSampler:
    def test_single_mode_click_rate_matches_efficiency(self):
        t = 0.1
        batch = sample_dprcv1(np.eye(1), 1, t, 100_000, 5)
        rate = batch.outcomes.mean()
        eta = detector_efficiency(t)  # = 0.08611420778368084 at t = 0.1
        assert eta == pytest.approx(0.08611420778368084, abs=1e-15)
        assert abs(rate - eta) <= 3 * math.sqrt(eta * (1 - eta) / 100_000)

    def test_large_threshold_all_click(self):
        batch = sample_dprcv1(haar_unitary(3, 1), 2, 25.0, 2000, 13)
        frac_all = np.mean(batch.outcomes.sum(axis=1) == 3)
        assert frac_all > 0.99

    def test_total_variation_against_exact_table(self):
        u = haar_unitary(5, 41)
        table = distribution_table(u, 2, 0.3)
        batch = sample_dprcv1(u, 2, 0.3, 100_000, 19)
        tv = empirical_tv(batch.outcomes, table.patterns(), table.probabilities())
        assert tv <= 0.01

    def test_guard(self):
        with pytest.raises(GuardLimitError):
            sample_dprcv1(haar_unitary(13, 0), 2, 0.1, 10, 0)


class TestPrcvSampler:
    def test_radii_non_negative(self):
        batch = sample_prcv1(haar_unitary(3, 3), 2, 2000, 23)
        assert np.all(batch.outcomes >= 0)

    def test_single_mode_histogram_matches_density(self):
        # one photon into one mode: R ~ e^{-R}(1-R)^2, cell masses from G
        batch = sample_prcv1(np.eye(1), 1, 100_000, 29)
        radii = batch.outcomes[:, 0]
        edges = np.linspace(0, 8, 25)
        counts, _ = np.histogram(radii, bins=edges)
        cdf = np.array([g_function(e, 1) for e in edges])
        expected = np.diff(cdf) * radii.size
        # the overflow cell catches the tail
        counts = np.append(counts, (radii >= 8).sum())
        expected = np.append(expected, (1 - cdf[-1]) * radii.size)
        assert chi_square_pvalue(counts, expected) > 0.001

    def test_click_cell_fraction_matches_click_probability(self):
        u = haar_unitary(3, 14)
        t = 0.25
        batch = sample_prcv1(u, 2, 40_000, 31)
        clicks = (batch.outcomes <= t).astype(int)
        target = (1, 1, 0)
        frac = np.mean((clicks == np.array(target)).all(axis=1))
        from cvboson.distribution import prob_dprcv

        exact = prob_dprcv(u, target, t, 2)
        assert abs(frac - exact) <= 3 * math.sqrt(exact * (1 - exact) / 40_000)

    def test_coarse_graining_matches_dprcv_sampler(self):
        u = haar_unitary(3, 27)
        t = 0.4
        radial = sample_prcv1(u, 2, 30_000, 37)
        coarse = (radial.outcomes <= t).astype(int)
        direct = sample_dprcv1(u, 2, t, 30_000, 38)
        keys = list(itertools.product((0, 1), repeat=3))
        count_a = [np.sum((coarse == np.array(k)).all(axis=1)) for k in keys]
        count_b = [np.sum((direct.outcomes == np.array(k)).all(axis=1)) for k in keys]
        table = np.array([count_a, count_b], dtype=float)
        table = table[:, table.sum(axis=0) > 0]
        result = stats.chi2_contingency(table)
        assert result.pvalue > 0.001


class TestCvSampler:
    def test_radius_histogram_matches_radial_density(self):
        batch = sample_cv1(np.eye(1), 1, 50_000, 43)
        radii = np.abs(batch.outcomes[:, 0]) ** 2
        edges = np.linspace(0, 8, 17)  # bin edges align with the 1/16-wide grid cells
        counts, _ = np.histogram(radii, bins=edges)
        cdf = np.array([g_function(e, 1) for e in edges])
        expected = np.diff(cdf) * radii.size
        counts = np.append(counts, (radii >= 8).sum())
        expected = np.append(expected, (1 - cdf[-1]) * radii.size)
        assert chi_square_pvalue(counts, expected) > 0.001

    def test_phase_uniform_for_rotation_invariant_state(self):
        batch = sample_cv1(np.eye(1), 1, 5000, 47)
        phases = np.angle(batch.outcomes[:, 0]) / (2 * np.pi) + 0.5
        assert kuiper_pvalue(phases) > 0.001

    def test_refining_grid_reduces_discretization_error(self):
        # deterministic: grid cell weights vs exact cell masses of the
        # single-photon radial density, total variation halves ~ 4x per 2x
        from cvboson.sampler import _radial_grid

        tv = {}
        for n_radial in (128, 256):
            nodes, widths = _radial_grid(n_radial, 1)
            edges = np.concatenate([[0.0], np.cumsum(widths)])
            exact = np.diff([g_function(e, 1) for e in edges])
            approx = np.exp(-nodes) * (1 - nodes) ** 2 * widths
            tv[n_radial] = 0.5 * np.abs(approx / approx.sum() - exact / exact.sum()).sum()
        assert tv[256] < tv[128]

    def test_radial_marginal_consistent_with_prcv_sampler(self):
        # "within grid error": bin on edges aligned with the sampler's radial
        # cells, so the discretization atoms cannot split across bins
        cv = sample_cv1(np.eye(1), 1, 20_000, 53)
        radial = sample_prcv1(np.eye(1), 1, 20_000, 54)
        edges = np.concatenate([np.linspace(0, 8, 17), [np.inf]])
        count_a, _ = np.histogram(np.abs(cv.outcomes[:, 0]) ** 2, bins=edges)
        count_b, _ = np.histogram(radial.outcomes[:, 0], bins=edges)
        table = np.array([count_a, count_b], dtype=float)
        table = table[:, table.sum(axis=0) > 0]
        assert stats.chi2_contingency(table).pvalue > 0.001

    def test_multimode_conditional_sampling_click_fractions(self):
        # joint click-region fractions must match the exact click table
        u = haar_unitary(2, 35)
        t = 0.5
        batch = sample_cv1(u, 1, 4000, 59)
        clicks = (np.abs(batch.outcomes) ** 2 <= t).astype(int)
        from cvboson.distribution import prob_dprcv

        for target in itertools.product((0, 1), repeat=2):
            frac = np.mean((clicks == np.array(target)).all(axis=1))
            exact = prob_dprcv(u, target, t, 1)
            margin = 4 * math.sqrt(exact * (1 - exact) / 4000) + 0.004
            assert abs(frac - exact) <= margin

    def test_guard(self):
        with pytest.raises(GuardLimitError):
            sample_cv1(haar_unitary(5, 0), 1, 10, 0)


def test_invert_click_cdf_roundtrip():
    for level in range(4):
        u = np.linspace(0.001, 0.999, 57)
        radii = _invert_click_cdf(u, level)
        np.testing.assert_allclose(g_function(radii, level), u, atol=1e-11)
