"""Exact matrix permanents: a Gray-code Ryser engine and a naive oracle.

The permanent is the determinant without sign alternation,
Per(A) = sum_sigma prod_i A[i, sigma(i)]. The naive sum over permutations is
kept as an independent cross-check for the Ryser implementation.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import GuardLimitError

NAIVE_MAX_DIM = 10
RYSER_MAX_DIM = 30

_PERM_CHUNK = 200_000


@dataclass(frozen=True)
class PermanentResult:
    value: complex
    method: str
    dimension: int


def _as_square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def permanent_naive(a):
    """Permanent by direct summation over all permutations (O(n! n)).

    Guarded at n <= 10; use permanent_ryser beyond that.
    """
    a = _as_square(a)
    n = a.shape[0]
    if n > NAIVE_MAX_DIM:
        raise GuardLimitError(f"naive permanent guarded at n <= {NAIVE_MAX_DIM}, got {n}")
    if n == 0:
        return 1 + 0j
    rows = np.arange(n)
    total = 0 + 0j
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(perms, _PERM_CHUNK)),
            dtype=np.intp,
        )
        if chunk.size == 0:
            break
        cols = chunk.reshape(-1, n)
        total += complex(a[rows, cols].prod(axis=1).sum())
    return total


def permanent_ryser(a, *, subset_order="gray"):
    """Permanent by Ryser's inclusion-exclusion formula (O(2^n n)).

    subset_order selects how column subsets are visited: "gray" updates the
    row sums one column flip at a time, "lex" recomputes them per subset.
    Both orders must agree; the option exists so that path independence can
    be tested. Terms are accumulated with Kahan compensation because the
    2^n-term sum cancels heavily for near-singular-permanent matrices.
    """
    a = _as_square(a)
    n = a.shape[0]
    if n > RYSER_MAX_DIM:
        raise GuardLimitError(f"Ryser permanent guarded at n <= {RYSER_MAX_DIM}, got {n}")
    if n == 0:
        return 1 + 0j
    if subset_order not in ("gray", "lex"):
        raise ValueError(f"unknown subset order {subset_order!r}")

    cols = [list(a[:, j]) for j in range(n)]
    total = 0j
    comp = 0j

    def accumulate(term):
        nonlocal total, comp
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t

    if subset_order == "gray":
        row_sums = [0j] * n
        gray = 0
        for k in range(1, 1 << n):
            flip = (k & -k).bit_length() - 1
            gray ^= 1 << flip
            col = cols[flip]
            if gray & (1 << flip):
                for i in range(n):
                    row_sums[i] += col[i]
            else:
                for i in range(n):
                    row_sums[i] -= col[i]
            sign = -1.0 if (gray.bit_count() & 1) else 1.0
            accumulate(sign * math.prod(row_sums))
    else:
        for subset in range(1, 1 << n):
            row_sums = [0j] * n
            for j in range(n):
                if subset & (1 << j):
                    col = cols[j]
                    for i in range(n):
                        row_sums[i] += col[i]
            sign = -1.0 if (subset.bit_count() & 1) else 1.0
            accumulate(sign * math.prod(row_sums))

    return total * (-1.0 if n & 1 else 1.0)


def compute_permanent(a, method="ryser"):
    """Permanent with provenance, for callers that record which engine ran."""
    a = _as_square(a)
    if method == "ryser":
        value = permanent_ryser(a)
    elif method == "naive":
        value = permanent_naive(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PermanentResult(value=value, method=method, dimension=a.shape[0])
