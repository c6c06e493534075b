"""Exact output distributions of a photonic network under the CV detectors.

Given an M-mode unitary with one photon in each of the first N input modes,
this module evaluates the joint outcome density for CV-1 detection, the
radial density for phase-randomized detection, and the 2^M click-pattern
probabilities for the discretized detector, together with the small-threshold
leading-order structure of the click probabilities.

Pattern weights use normalized transition amplitudes (see fock_amplitude),
so every distribution here sums or integrates to one, including patterns
with multiply-occupied modes.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import GuardLimitError, InvalidPatternError
from .fock import (
    check_unitary,
    displacement_element,
    enumerate_fock_patterns,
    fock_amplitude,
)
from .povm import DetectorConfig, g_function, prcv_povm_diag

DENSITY_MAX_MODES = 10
DENSITY_MAX_PHOTONS = 4
TABLE_MAX_MODES = 12


def _guard_scale(modes, photons, max_modes, max_photons=DENSITY_MAX_PHOTONS):
    if modes > max_modes:
        raise GuardLimitError(f"guarded at M <= {max_modes} modes, got {modes}")
    if photons > max_photons:
        raise GuardLimitError(f"guarded at N <= {max_photons} photons, got {photons}")


def check_click_pattern(pattern, modes=None):
    """Validate a click pattern (binary vector) and return it as a tuple of ints."""
    pattern = tuple(int(m) for m in pattern)
    if any(m not in (0, 1) for m in pattern):
        raise InvalidPatternError(f"click entries must be 0 or 1, got {pattern}")
    if modes is not None and len(pattern) != modes:
        raise InvalidPatternError(f"click pattern has {len(pattern)} modes, expected {modes}")
    return pattern


def amplitude_table(u, photons):
    """All transition amplitudes for `photons` photons through U.

    Returns (patterns, amplitudes) over enumerate_fock_patterns(M, photons);
    the squared amplitudes sum to one.
    """
    u = check_unitary(u)
    modes = u.shape[0]
    if photons > modes:
        raise InvalidPatternError(f"need N <= M, got N={photons}, M={modes}")
    patterns = enumerate_fock_patterns(modes, photons)
    amps = np.array([fock_amplitude(u, p) for p in patterns], dtype=complex)
    return patterns, amps


def _kahan_sum(terms):
    total = 0j
    comp = 0j
    for term in terms:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def density_cv(u, alphas, photons):
    """Joint outcome density of CV-1 detection on every output mode.

    P(alpha) = |sum_n amp(n) prod_j <1|D+(alpha_j)|n_j>|^2 / (2 pi)^M, where
    the per-mode factor is e^{-|a|^2/2} (a*)^{n_j - 1} (n_j - |a|^2) / sqrt(n_j!)
    (with the n_j = 0 case evaluated as -a e^{-|a|^2/2}). Zero outcomes
    select n_j = 1: the density vanishes at alpha_j = 0 unless every
    contributing pattern has exactly one photon in mode j.

    Normalized over the per-mode outcome measure dR dtheta (R = |alpha|^2),
    the same convention under which the detector elements are complete;
    averaging over the phases gives density_prcv / (2 pi)^M.
    """
    u = check_unitary(u)
    modes = u.shape[0]
    _guard_scale(modes, photons, DENSITY_MAX_MODES)
    alphas = np.asarray(alphas, dtype=complex)
    if alphas.shape != (modes,):
        raise ValueError(f"expected {modes} outcomes, got shape {alphas.shape}")
    patterns, amps = amplitude_table(u, photons)
    factors = np.array(
        [
            [np.conj(displacement_element(v, 1, a)) for v in range(photons + 1)]
            for a in alphas
        ]
    )
    mode_idx = np.arange(modes)
    total = _kahan_sum(
        amp * complex(np.prod(factors[mode_idx, pattern]))
        for pattern, amp in zip(patterns, amps)
    )
    return abs(total) ** 2 / (2.0 * np.pi) ** modes


def density_prcv(u, radii, photons):
    """Joint radial density of phase-randomized detection on every mode.

    P(R) = sum_n |amp(n)|^2 prod_j e^{-R_j} R_j^{n_j-1} (n_j - R_j)^2 / n_j!,
    i.e. the pattern-weighted product of the Fock-diagonal detector
    densities. Integrates to one over R in [0, inf)^M.
    """
    u = check_unitary(u)
    modes = u.shape[0]
    radii = np.asarray(radii, dtype=float)
    if radii.shape != (modes,):
        raise ValueError(f"expected {modes} radii, got shape {radii.shape}")
    if np.any(radii < 0):
        raise ValueError("radii must be non-negative")
    patterns, amps = amplitude_table(u, photons)
    weights = np.abs(amps) ** 2
    factors = np.array(
        [[prcv_povm_diag(1, r, v) for v in range(photons + 1)] for r in radii]
    )
    occ = np.asarray(patterns)
    terms = weights * np.prod(factors[np.arange(modes)[None, :], occ], axis=1)
    return float(terms.sum())


def _click_factors(t, photons):
    g_vals = np.array([g_function(t, v) for v in range(photons + 1)])
    return g_vals, 1.0 - g_vals


def prob_dprcv(u, clicks, t, photons):
    """Probability of one click pattern under the discretized detector.

    P(m) = sum_n |amp(n)|^2 prod_{m_j=1} G(t, n_j) prod_{m_j=0} (1 - G(t, n_j)).
    Defined for any click count; the 2^M probabilities sum to one.
    """
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t}")
    u = check_unitary(u)
    modes = u.shape[0]
    clicks = check_click_pattern(clicks, modes=modes)
    patterns, amps = amplitude_table(u, photons)
    weights = np.abs(amps) ** 2
    g_vals, gbar_vals = _click_factors(t, photons)
    occ = np.asarray(patterns)
    click_row = np.asarray(clicks, dtype=bool)
    factors = np.where(click_row[None, :], g_vals[occ], gbar_vals[occ])
    return float((weights * factors.prod(axis=1)).sum())


@dataclass(frozen=True)
class DistributionTable:
    """Full click-pattern distribution for one detector setting."""

    detector: DetectorConfig
    entries: dict
    normalization_residual: float

    def patterns(self):
        return tuple(self.entries.keys())

    def probabilities(self):
        return np.array(list(self.entries.values()))


def distribution_table(u, photons, t):
    """Exact probabilities of all 2^M click patterns, in lexicographic order."""
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t}")
    u = check_unitary(u)
    modes = u.shape[0]
    _guard_scale(modes, photons, TABLE_MAX_MODES)
    patterns, amps = amplitude_table(u, photons)
    weights = np.abs(amps) ** 2
    g_vals, gbar_vals = _click_factors(t, photons)
    occ = np.asarray(patterns)
    g_occ = g_vals[occ]
    gbar_occ = gbar_vals[occ]
    entries = {}
    for clicks in itertools.product((0, 1), repeat=modes):
        click_row = np.asarray(clicks, dtype=bool)
        factors = np.where(click_row[None, :], g_occ, gbar_occ)
        entries[clicks] = float((weights * factors.prod(axis=1)).sum())
    residual = abs(sum(entries.values()) - 1.0)
    detector = DetectorConfig(ancilla_n=1, threshold_t=t)
    return DistributionTable(detector=detector, entries=entries, normalization_residual=residual)


def leading_order(u, clicks, t, photons=None):
    """Small-threshold structure of a click-pattern probability.

    For a pattern with N clicks, returns (leading, neighbor_mass) where
    leading = |Per(U restricted to the clicked columns)|^2 t^N is the
    dominant term of prob_dprcv as t -> 0, and neighbor_mass is the summed
    squared permanent over all patterns obtained by interchanging one click
    and one non-click. The neighbor mass never exceeds one (the squared
    permanents form a probability distribution over patterns).
    """
    u = check_unitary(u)
    modes = u.shape[0]
    clicks = check_click_pattern(clicks, modes=modes)
    n_clicks = sum(clicks)
    if photons is not None and photons != n_clicks:
        raise InvalidPatternError(
            f"pattern has {n_clicks} clicks but {photons} photons were requested"
        )
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t}")
    leading = abs(fock_amplitude(u, clicks)) ** 2 * t**n_clicks
    neighbor_mass = 0.0
    ones = [j for j, m in enumerate(clicks) if m == 1]
    zeros = [j for j, m in enumerate(clicks) if m == 0]
    for i in ones:
        for j in zeros:
            swapped = list(clicks)
            swapped[i], swapped[j] = 0, 1
            neighbor_mass += abs(fock_amplitude(u, tuple(swapped))) ** 2
    return leading, neighbor_mass


def radial_tail_cutoff(k, eps=1e-12):
    """Smallest grid radius R with 1 - G(R, k) <= eps (closed-form tail scan)."""
    for big_r in range(10, 1000, 5):
        if 1.0 - g_function(float(big_r), k) <= eps:
            return float(big_r)
    raise RuntimeError(f"no cutoff below 1000 for level {k} at eps={eps}")


def prcv_cell_integral(u, clicks, t, photons, tail_eps=1e-12):
    """Click-pattern probability by per-mode quadrature of the radial density.

    Independent route to prob_dprcv: each mode's factor is integrated
    numerically over [0, t] (click) or [t, R_max] (no click), with R_max
    chosen per Fock level so the neglected tail is below tail_eps.
    """
    u = check_unitary(u)
    modes = u.shape[0]
    clicks = check_click_pattern(clicks, modes=modes)
    patterns, amps = amplitude_table(u, photons)
    weights = np.abs(amps) ** 2
    cell = {}
    for v in range(photons + 1):
        in_cell, _ = integrate.quad(
            lambda r: prcv_povm_diag(1, r, v), 0.0, t, epsabs=1e-13, epsrel=1e-12
        )
        out_cell, _ = integrate.quad(
            lambda r: prcv_povm_diag(1, r, v),
            t,
            radial_tail_cutoff(v, tail_eps),
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        cell[v] = (in_cell, out_cell)
    total = 0.0
    for pattern, w in zip(patterns, weights):
        product = w
        for m_j, n_j in zip(clicks, pattern):
            product *= cell[n_j][0] if m_j else cell[n_j][1]
        total += product
    return total
