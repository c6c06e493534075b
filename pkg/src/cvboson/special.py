"""Special functions used by the detector model.

Everything here is evaluated by stable recurrences rather than library
wrappers: the detector formulas live at very small arguments where naive
evaluation of the incomplete gamma function cancels catastrophically.
"""

import math

import numpy as np


def laguerre(n, m, x):
    """Generalized Laguerre polynomial L_n^m(x) by the three-term recurrence.

    The recurrence (i+1) L_{i+1}^m = (2i+1+m-x) L_i^m - (i+m) L_{i-1}^m is a
    polynomial identity in m, so negative integer superscripts (which arise
    for displaced-number matrix elements) are handled without special cases.
    The degree-one case L_1^{k-1}(x) = k - x is the form the single-photon
    detector response is built from. Accepts scalar or ndarray x.
    """
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + m - x
    for i in range(1, n):
        prev, cur = cur, ((2 * i + 1 + m - x) * cur - (i + m) * prev) / (i + 1)
    return cur if cur.ndim else float(cur)


def lower_incomplete_gamma(k, t):
    """Lower incomplete gamma gamma(k, t) = int_0^t e^{-R} R^{k-1} dR, integer k >= 1.

    Two regimes, chosen per element:

    * t < k + 1: the all-positive power series
      gamma(k,t) = t^k e^{-t} sum_i t^i / (k (k+1) ... (k+i)),
      free of cancellation at small t (where the click probabilities live);
    * t >= k + 1: upward recurrence gamma(j+1,t) = j gamma(j,t) - t^j e^{-t}
      from gamma(1,t) = -expm1(-t), where the subtracted term is already
      subdominant.

    Accepts scalar or ndarray t; t = inf returns (k-1)!.
    """
    if k < 1 or k != int(k):
        raise ValueError(f"order must be a positive integer, got {k}")
    k = int(k)
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    out = np.empty_like(t_arr)

    infinite = np.isinf(t_arr)
    out[infinite] = math.factorial(k - 1)

    small = (~infinite) & (t_arr < k + 1)
    if np.any(small):
        ts = t_arr[small]
        term = np.full_like(ts, 1.0 / k)
        total = term.copy()
        for i in range(1, 400):
            term = term * ts / (k + i)
            total += term
            if np.all(term <= 1e-17 * total):
                break
        out[small] = total * ts**k * np.exp(-ts)

    large = (~infinite) & ~small
    if np.any(large):
        tl = t_arr[large]
        g = -np.expm1(-tl)
        tj = tl * np.exp(-tl)  # t^j e^{-t} at j = 1
        for j in range(1, k):
            g = j * g - tj
            tj = tj * tl
        out[large] = g

    return float(out[0]) if scalar else out


def g_function(t, k):
    """Click response G(t, k): probability that Fock level k lands in [0, t].

    G(t,k) = [k^2 gamma(k,t) - 2k gamma(k+1,t) + gamma(k+2,t)] / k!, with the
    k = 0 case reducing to gamma(2,t). Non-decreasing in t, G(0,k) = 0 and
    G(inf,k) = 1. Accepts scalar or ndarray t.
    """
    if k < 0 or k != int(k):
        raise ValueError(f"Fock index must be a non-negative integer, got {k}")
    k = int(k)
    if k == 0:
        return lower_incomplete_gamma(2, t)
    value = (
        k * k * lower_incomplete_gamma(k, t)
        - 2 * k * lower_incomplete_gamma(k + 1, t)
        + lower_incomplete_gamma(k + 2, t)
    )
    return value / math.factorial(k)


def detector_efficiency(t):
    """Click probability on a single photon: eta(t) = 1 - e^{-t} (1 + t^2)."""
    t = np.asarray(t, dtype=float)
    value = 1.0 - np.exp(-t) * (1.0 + t * t)
    return value if value.ndim else float(value)


def dark_count_probability(t):
    """Click probability on vacuum: p_D(t) = 1 - e^{-t} (1 + t)."""
    t = np.asarray(t, dtype=float)
    value = 1.0 - np.exp(-t) * (1.0 + t)
    return value if value.ndim else float(value)
