"""Self-contained invariant suite behind the `verify` CLI command.

Each check re-derives an expected value through an independent route
(closed forms, naive permanent sums, grid averages, sampling statistics)
and compares it against the shipped implementation at a fixed tolerance.
The quick level runs in well under a minute; full enlarges sizes, seed
counts, and shot counts.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .distribution import distribution_table, leading_order, prob_dprcv
from .estimate import deviation_sweep, mult_bound_check
from .fock import enumerate_fock_patterns, fock_amplitude, haar_unitary
from .permanent import permanent_naive, permanent_ryser
from .povm import (
    dark_count_probability,
    detector_efficiency,
    dprcv1_povm,
    g_function,
    laguerre,
    lower_incomplete_gamma,
    prcv_completeness_residual,
    prcv_phase_average,
    prcv_povm_diag,
)
from .sampler import sample_dprcv1, sample_fock, sample_prcv1


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _check_haar_unitarity(full):
    worst = 0.0
    for modes in (1, 2, 5, 8) + ((16,) if full else ()):
        for seed in range(5):
            u = haar_unitary(modes, seed)
            worst = max(worst, np.abs(u.conj().T @ u - np.eye(modes)).max())
    return worst <= 1e-12, f"max |U+U - I| = {worst:.2e}"


def _check_haar_determinism(full):
    same = np.array_equal(haar_unitary(6, 9), haar_unitary(6, 9))
    differ = not np.array_equal(haar_unitary(6, 9), haar_unitary(6, 10))
    return same and differ, "bitwise reproducible, seed-sensitive"


def _check_amplitude_normalization(full):
    worst = 0.0
    seeds = range(20 if full else 5)
    for seed in seeds:
        modes, photons = 3 + seed % 4, 1 + seed % 3
        u = haar_unitary(modes, seed)
        total = sum(
            abs(fock_amplitude(u, p)) ** 2 for p in enumerate_fock_patterns(modes, photons)
        )
        worst = max(worst, abs(total - 1))
    return worst <= 1e-10, f"max |sum - 1| = {worst:.2e}"


def _check_amplitude_against_naive_permanent(full):
    from .fock import submatrix_with_multiplicity

    worst = 0.0
    for seed in range(4 if full else 2):
        u = haar_unitary(4, 40 + seed)
        for pattern in enumerate_fock_patterns(4, 3):
            sub = submatrix_with_multiplicity(u, pattern)
            norm = math.sqrt(math.prod(math.factorial(n) for n in pattern))
            expected = permanent_naive(sub.entries) / norm
            worst = max(worst, abs(fock_amplitude(u, pattern) - expected))
    return worst <= 1e-10, f"max amplitude defect = {worst:.2e}"


def _check_permanent_cross(full):
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(1000 if full else 100):
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        expected = permanent_naive(a)
        worst = max(worst, abs(permanent_ryser(a) - expected) / abs(expected))
    factorials = all(
        permanent_ryser(np.ones((n, n))) == float(math.factorial(n)) for n in range(1, 11)
    )
    return worst <= 1e-9 and factorials, f"max rel defect = {worst:.2e}; all-ones exact"


def _check_special_closed_forms(full):
    checks = [
        abs(laguerre(1, 2, 0.7) - (3 - 0.7)),
        abs(lower_incomplete_gamma(1, 0.8) + math.expm1(-0.8)),
        abs(lower_incomplete_gamma(2, 1.0) - (1 - 2 / math.e)),
        abs(g_function(0.4, 1) - detector_efficiency(0.4)),
        abs(g_function(0.4, 0) - dark_count_probability(0.4)),
        abs(g_function(math.inf, 3) - 1.0),
    ]
    worst = max(checks)
    return worst <= 1e-12, f"max defect = {worst:.2e}"


def _check_click_series(full):
    # leading terms: k=0: t^2/2; k=1: t; k=2: t^2; k=3: t^3/2
    t = 1e-4
    targets = {0: (2, 0.5), 1: (1, 1.0), 2: (2, 1.0), 3: (3, 0.5)}
    worst = max(
        abs(g_function(t, k) / t**p / c - 1) for k, (p, c) in targets.items()
    )
    return worst <= 0.01, f"max rel coefficient error = {worst:.2e}"


def _check_detector_curves(full):
    crossing = abs(detector_efficiency(1.0) - dark_count_probability(1.0))
    grid = np.linspace(0.01, 0.99, 99)
    ordered = np.all(detector_efficiency(grid) > dark_count_probability(grid))
    return crossing <= 1e-14 and bool(ordered), f"|eta(1) - p_D(1)| = {crossing:.1e}"


def _check_projection_at_zero(full):
    exact = all(
        prcv_povm_diag(1, 0.0, k) == (1.0 if k == 1 else 0.0) for k in range(21)
    )
    return exact, "radius-zero element projects on |1>"


def _check_phase_average(full):
    cutoff, n_theta = (20, 2048) if full else (12, 512)
    worst = 0.0
    for big_r in (0.3, 2.0):
        averaged = prcv_phase_average(1, big_r, cutoff, n_theta)
        off = np.abs(averaged.entries - np.diag(np.diag(averaged.entries))).max()
        diag = max(
            abs(averaged.entries[k, k].real - prcv_povm_diag(1, big_r, k))
            for k in range(cutoff + 1)
        )
        worst = max(worst, off, diag)
    return worst <= 1e-8, f"max defect = {worst:.2e}"


def _check_completeness(full):
    ancillas = (0, 1, 2) if full else (0, 1)
    cutoff = 5 if full else 3
    worst = max(
        prcv_completeness_residual(n, cutoff, 50.0).max() for n in ancillas
    )
    return worst <= 1e-8, f"max residual = {worst:.2e}"


def _check_click_complement(full):
    click, no_click = dprcv1_povm(0.17, 10)
    exact = np.array_equal(click.entries + no_click.entries, np.eye(11).astype(complex))
    return exact, "click + no-click = identity exactly"


def _check_table_normalization(full):
    if full:
        cases = [(6, 3, 1), (12, 4, 5)]
    else:
        cases = [(6, 2, 1)]
    worst = max(
        distribution_table(haar_unitary(m, s), n, 0.05).normalization_residual
        for m, n, s in cases
    )
    return worst <= 1e-10, f"max residual = {worst:.2e}"


def _check_hom(full):
    bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    amp11 = abs(fock_amplitude(bs, (1, 1))) ** 2
    t = 0.07
    coincidence = abs(
        prob_dprcv(bs, (1, 1), t, 2) - g_function(t, 0) * g_function(t, 2)
    )
    return amp11 <= 1e-20 and coincidence <= 1e-12, (
        f"|amp|^2 = {amp11:.1e}, coincidence defect = {coincidence:.1e}"
    )


def _check_leading_order(full):
    sweep = deviation_sweep(np.eye(1), 1, np.geomspace(1e-4, 1e-2, 8))
    slope_ok = abs(sweep.linear_coeff + 1.5) <= 0.015
    bound_ok = True
    for seed in range(20 if full else 5):
        u = haar_unitary(5, seed)
        _, mass = leading_order(u, (1, 1, 0, 0, 0), 1e-3)
        bound_ok = bound_ok and 0 <= mass <= 1
    return slope_ok and bound_ok, f"slope = {sweep.linear_coeff:.4f}, neighbor mass bounded"


def _check_sampler_determinism(full):
    u = haar_unitary(4, 5)
    a = sample_dprcv1(u, 2, 0.05, 3000, 9)
    b = sample_dprcv1(u, 2, 0.05, 3000, 9, threads=4)
    prefix = sample_dprcv1(u, 2, 0.05, 1000, 9)
    ok = np.array_equal(a.outcomes, b.outcomes) and np.array_equal(
        a.outcomes[:1000], prefix.outcomes
    )
    return ok, "thread- and chunk-independent"


def _check_sampler_tv(full):
    modes, photons, shots = (6, 3, 100_000) if full else (4, 2, 100_000)
    u = haar_unitary(modes, 33)
    patterns = enumerate_fock_patterns(modes, photons)
    probs = np.array([abs(fock_amplitude(u, p)) ** 2 for p in patterns])
    batch = sample_fock(u, photons, shots, 7)
    counts = {}
    for row in map(tuple, batch.outcomes):
        counts[row] = counts.get(row, 0) + 1
    tv = 0.5 * sum(abs(counts.get(p, 0) / shots - q) for p, q in zip(patterns, probs))
    return tv <= 0.01, f"TV = {tv:.4f} at {shots} shots"


def _check_coarse_graining(full):
    u = haar_unitary(2, 27)
    t = 0.4
    shots = 30_000 if full else 10_000
    radial = sample_prcv1(u, 1, shots, 37)
    coarse = (radial.outcomes <= t).astype(int)
    table = distribution_table(u, 1, t)
    counts = {}
    for row in map(tuple, coarse):
        counts[row] = counts.get(row, 0) + 1
    statistic = 0.0
    for pattern, prob in table.entries.items():
        expected = prob * shots
        if expected >= 5:
            statistic += (counts.get(pattern, 0) - expected) ** 2 / expected
    from scipy import stats

    p_value = stats.chi2.sf(statistic, max(1, len(table.entries) - 1))
    return p_value > 0.001, f"chi-square p = {p_value:.4f}"


def _check_bound_chain(full):
    rng = np.random.default_rng(99)
    for _ in range(10_000 if full else 1000):
        lower = rng.uniform(0.01, 1.0)
        perm_sq = lower * rng.uniform(1.0, 10.0)
        error = rng.uniform(-0.499, 0.499) * lower
        g = 1.0 + rng.uniform(1e-6, 3.0)
        p_tilde = rng.uniform(
            (perm_sq + error) / g * (1 + 1e-12), (perm_sq + error) * g * (1 - 1e-12)
        )
        verdict = mult_bound_check(perm_sq, error, lower, g, p_tilde)
        if not verdict.passed:
            return False, f"violated at {(perm_sq, error, lower, g, p_tilde)}"
        rejected = mult_bound_check(perm_sq, 0.6 * lower, lower, g, p_tilde)
        if rejected.applicable:
            return False, "failed to reject |E|/L >= 1/2"
    exact = mult_bound_check(1.0, 0.0, 0.5, 1.25, 1.0)
    if exact.g_prime != 1.25:
        return False, "E = 0 did not reduce g' to g"
    return True, "all premise-satisfying cases hold; large ratios rejected"


_CHECKS = [
    ("haar-unitarity", _check_haar_unitarity),
    ("haar-determinism", _check_haar_determinism),
    ("amplitude-normalization", _check_amplitude_normalization),
    ("amplitude-vs-naive-permanent", _check_amplitude_against_naive_permanent),
    ("permanent-cross-check", _check_permanent_cross),
    ("special-closed-forms", _check_special_closed_forms),
    ("click-series-coefficients", _check_click_series),
    ("detector-curves-crossing", _check_detector_curves),
    ("radius-zero-projection", _check_projection_at_zero),
    ("phase-average-identity", _check_phase_average),
    ("completeness-residuals", _check_completeness),
    ("click-complement-identity", _check_click_complement),
    ("table-normalization", _check_table_normalization),
    ("hong-ou-mandel", _check_hom),
    ("leading-order", _check_leading_order),
    ("sampler-determinism", _check_sampler_determinism),
    ("sampler-total-variation", _check_sampler_tv),
    ("coarse-graining-consistency", _check_coarse_graining),
    ("bound-chain", _check_bound_chain),
]


def run_checks(level="quick"):
    """Run the invariant suite; returns a list of CheckResult."""
    if level not in ("quick", "full"):
        raise ValueError(f"unknown level {level!r}")
    full = level == "full"
    results = []
    for name, check in _CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check(full)
        except Exception as exc:  # a crash is a failed invariant, not a crash of verify
            passed, detail = False, f"exception: {exc!r}"
        results.append(CheckResult(name, passed, detail, time.perf_counter() - start))
    return results
