"""Measurement model for the continuous-variable detectors.

Three detector variants built around mixing the signal with a Fock state
|n> on a balanced beamsplitter and reading two conjugate quadratures:

* CV-n: both quadrature outcomes kept, aggregated into one complex alpha;
  element (1/2pi) D(alpha)|n><n|D+(alpha).
* PRCV-n: local-oscillator phase randomized, outcome collapses to
  R = x1^2 + p2^2; the element is diagonal in the Fock basis.
* DPRCV-1: PRCV-1 with R split into a click region [0, t] and its
  complement; the click response per Fock level k is G(t, k).

The module also carries numeric verification helpers (phase averaging,
completeness residuals) for the closed forms above.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .fock import displacement_element
from .special import (
    dark_count_probability,
    detector_efficiency,
    g_function,
    laguerre,
    lower_incomplete_gamma,
)

__all__ = [
    "DetectorConfig",
    "CVOutcome",
    "TruncatedOperator",
    "laguerre",
    "lower_incomplete_gamma",
    "g_function",
    "detector_efficiency",
    "dark_count_probability",
    "prcv_povm_diag",
    "cvn_povm_element",
    "dprcv1_povm",
    "detector_curves",
    "prcv_completeness_residual",
    "prcv_phase_average",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters: Fock ancilla, click threshold, optional word size.

    When built from a word size b, the click region is the lowest of the
    2^b - 1 equal partitions of [0, 2], i.e. threshold_t = 2 / (2^b - 1).
    threshold_t may be None for the continuous (CV / PRCV) variants.
    """

    ancilla_n: int = 1
    threshold_t: float | None = None
    bits_b: int | None = None

    def __post_init__(self):
        if self.ancilla_n < 0:
            raise ValueError(f"ancilla photon number must be >= 0, got {self.ancilla_n}")
        if self.threshold_t is not None and not self.threshold_t > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold_t}")
        if self.bits_b is not None:
            if self.bits_b < 1:
                raise ValueError(f"word size must be >= 1, got {self.bits_b}")
            expected = 2.0 / (2 ** self.bits_b - 1)
            if self.threshold_t is None:
                object.__setattr__(self, "threshold_t", expected)
            elif not math.isclose(self.threshold_t, expected, rel_tol=1e-12):
                raise ValueError(
                    f"threshold {self.threshold_t} inconsistent with {self.bits_b}-bit "
                    f"discretization (expected {expected})"
                )

    @classmethod
    def from_bits(cls, bits_b, ancilla_n=1):
        return cls(ancilla_n=ancilla_n, bits_b=bits_b)


@dataclass(frozen=True)
class CVOutcome:
    """One CV measurement record: quadrature pair, aggregated alpha, radius R."""

    x1: float
    p2: float
    alpha: complex
    R: float

    def __post_init__(self):
        if abs(self.R - (self.x1**2 + self.p2**2)) > 1e-12:
            raise ValueError("R must equal x1^2 + p2^2")
        if abs(abs(self.alpha) ** 2 - self.R) > 1e-12:
            raise ValueError("|alpha|^2 must equal R")

    @classmethod
    def from_alpha(cls, alpha):
        alpha = complex(alpha)
        return cls(x1=alpha.real, p2=alpha.imag, alpha=alpha, R=abs(alpha) ** 2)


@dataclass(frozen=True)
class TruncatedOperator:
    """Operator on Fock space truncated at photon number `cutoff`."""

    cutoff: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.cutoff + 1, self.cutoff + 1):
            raise ValueError(
                f"entries shape {entries.shape} inconsistent with cutoff {self.cutoff}"
            )
        object.__setattr__(self, "entries", entries)

    def hermiticity_defect(self):
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def min_eigenvalue(self):
        sym = (self.entries + self.entries.conj().T) / 2.0
        return float(np.linalg.eigvalsh(sym).min())

    def validate(self, hermitian_tol=1e-12, psd_floor=-1e-10):
        """Check the POVM-element invariants (hermitian, positive semidefinite)."""
        defect = self.hermiticity_defect()
        if defect > hermitian_tol:
            raise ValueError(f"hermiticity defect {defect:.3e} > {hermitian_tol:.0e}")
        lo = self.min_eigenvalue()
        if lo < psd_floor:
            raise ValueError(f"minimum eigenvalue {lo:.3e} < {psd_floor:.0e}")
        return self


def prcv_povm_diag(ancilla_n, big_r, k):
    """Fock-diagonal element k of the phase-randomized detector at outcome R.

    Equals n! e^{-R} R^{k-n} (L_n^{k-n}(R))^2 / k!; evaluated in the
    symmetric form min! / max! e^{-R} R^{|k-n|} (L_min^{|k-n|}(R))^2 so that
    k < n costs no negative powers of R and R = 0 is exact. For the ancilla-1
    detector this is e^{-R} R^{k-1} (k - R)^2 / k!.
    Accepts scalar or ndarray R.
    """
    if ancilla_n < 0 or k < 0:
        raise ValueError("Fock indices must be non-negative")
    big_r = np.asarray(big_r, dtype=float)
    if np.any(big_r < 0):
        raise ValueError("R must be non-negative")
    lo, hi = min(ancilla_n, k), max(ancilla_n, k)
    d = hi - lo
    ratio = math.factorial(lo) / math.factorial(hi)
    value = ratio * np.exp(-big_r) * big_r**d * laguerre(lo, d, big_r) ** 2
    return value if value.ndim else float(value)


def cvn_povm_element(ancilla_n, alpha, cutoff):
    """CV-n element (1/2pi) D(alpha)|n><n|D+(alpha), truncated at `cutoff`.

    Rank one by construction; entry (j, k) is
    (1/2pi) <j|D(alpha)|n> conj(<k|D(alpha)|n>). With this normalization the
    elements integrate to the identity over the outcome measure dR dtheta
    (R = |alpha|^2), which is the convention the radial elements inherit:
    integrating prcv_povm_diag over dR alone already gives 1 per level.
    """
    if cutoff < ancilla_n:
        raise ValueError(f"cutoff {cutoff} must cover the ancilla level {ancilla_n}")
    v = np.array(
        [displacement_element(j, ancilla_n, alpha) for j in range(cutoff + 1)],
        dtype=complex,
    )
    return TruncatedOperator(cutoff=cutoff, entries=np.outer(v, v.conj()) / (2.0 * np.pi))


def dprcv1_povm(t, cutoff):
    """Click / no-click pair of the discretized ancilla-1 detector.

    Both operators are Fock-diagonal: the click element carries G(t, k) and
    the no-click element 1 - G(t, k), so they sum to the identity exactly.
    """
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t}")
    diag = np.array([g_function(t, k) for k in range(cutoff + 1)])
    click = TruncatedOperator(cutoff=cutoff, entries=np.diag(diag).astype(complex))
    no_click = TruncatedOperator(cutoff=cutoff, entries=np.diag(1.0 - diag).astype(complex))
    return click, no_click


def detector_curves(t_grid):
    """Efficiency and dark-count curves on a threshold grid.

    Returns an (n, 3) array of rows (t, eta(t), p_dark(t)) where
    eta(t) = 1 - e^{-t}(1 + t^2) and p_dark(t) = 1 - e^{-t}(1 + t).
    The two curves cross at t = 1.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1:
        raise ValueError("t_grid must be one-dimensional")
    if np.any(t < 0):
        raise ValueError("thresholds must be non-negative")
    return np.column_stack([t, detector_efficiency(t), dark_count_probability(t)])


def prcv_completeness_residual(ancilla_n, cutoff, r_max, epsabs=1e-12):
    """Per-level defect of integrating the phase-randomized element over [0, r_max].

    residual[k] = |1 - int_0^{r_max} prcv_povm_diag(n, R, k) dR| by adaptive
    quadrature; decreasing in r_max with an e^{-r_max} poly(r_max) tail.
    Raises if the quadrature cannot certify the requested accuracy.
    """
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    residuals = np.empty(cutoff + 1)
    for k in range(cutoff + 1):
        value, abserr = integrate.quad(
            lambda big_r: prcv_povm_diag(ancilla_n, big_r, k),
            0.0,
            r_max,
            epsabs=epsabs,
            epsrel=1e-12,
            limit=200,
        )
        if abserr > 1e-9:
            raise RuntimeError(
                f"quadrature did not converge for level {k}: achieved tolerance {abserr:.3e}"
            )
        residuals[k] = abs(1.0 - value)
    return residuals


def prcv_phase_average(ancilla_n, big_r, cutoff, n_theta=2048):
    """Grid average over the oscillator phase of the CV-n element at radius sqrt(R).

    Averages 2pi * cvn_povm_element(n, sqrt(R) e^{i theta}, cutoff) over a
    uniform theta grid. The result should be Fock-diagonal with diagonal
    prcv_povm_diag(n, R, k); both facts are what the callers verify.
    """
    acc = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    root_r = math.sqrt(big_r)
    for theta in 2.0 * np.pi * np.arange(n_theta) / n_theta:
        alpha = root_r * complex(math.cos(theta), math.sin(theta))
        acc += cvn_povm_element(ancilla_n, alpha, cutoff).entries
    return TruncatedOperator(cutoff=cutoff, entries=acc * (2.0 * np.pi / n_theta))
