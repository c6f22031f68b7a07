"""Shared test helpers: random profile factories and naive definitional oracles.

The naive oracles recompute quantities with plain loops (exact Fractions
where possible) so the library implementations are checked against an
independent path.
"""

from fractions import Fraction

import numpy as np
import pytest

from covdev import VarianceProfile


def rational_profile(rng, d, n, max_num=6, max_den=4) -> VarianceProfile:
    ent = tuple(
        tuple(Fraction(int(rng.integers(0, max_num + 1)), int(rng.integers(1, max_den + 1))) for _ in range(n))
        for _ in range(d)
    )
    return VarianceProfile(ent, exact=True)


def float_profile(rng, d, n, zero_frac=0.15) -> VarianceProfile:
    arr = rng.uniform(0.0, 2.0, size=(d, n))
    arr[rng.uniform(size=(d, n)) < zero_frac] = 0.0
    return VarianceProfile(tuple(tuple(float(x) for x in row) for row in arr), exact=False)


def naive_squared_params(B: VarianceProfile) -> dict:
    """Squared parameter values straight from the definitions (exact for
    rational profiles): sigma_C^2, sigma_R^2, sigma_star^2, sigma_tilde^2,
    sigma_bar^2, sigma_inf^2 and the trace sum."""
    ent, d, n = B.entries, B.d, B.n
    colsq = [sum(ent[i][j] ** 2 for i in range(d)) for j in range(n)]
    rowsq = [sum(ent[i][j] ** 2 for j in range(n)) for i in range(d)]
    out = {
        "sigma_C2": max(colsq),
        "sigma_R2": max(rowsq),
        "sigma_star2": max(x**2 for row in ent for x in row),
        "sigma_bar2": max(sum(ent[i][j] ** 4 for j in range(n)) for i in range(d)),
        "total": sum(rowsq),
    }
    if d >= 2:
        out["sigma_tilde2"] = max(
            sum(ent[i][j] ** 2 * ent[l][j] ** 2 for j in range(n))
            for i in range(d)
            for l in range(d)
            if i != l
        )
        out["sigma_inf2"] = max(
            sum(ent[i][j] ** 2 * ent[l][j] ** 2 for j in range(n) for l in range(d) if l != i)
            for i in range(d)
        )
    else:
        out["sigma_tilde2"] = Fraction(0) if B.exact else 0.0
        out["sigma_inf2"] = Fraction(0) if B.exact else 0.0
    return out


def naive_offdiag_p2(B: VarianceProfile):
    """sum_{i != l} sum_j b_ij^2 b_lj^2, the closed form of the order-2
    off-diagonal trace moment."""
    ent, d, n = B.entries, B.d, B.n
    return sum(
        ent[i][j] ** 2 * ent[l][j] ** 2
        for i in range(d)
        for l in range(d)
        if l != i
        for j in range(n)
    )


def naive_diag_p2(B: VarianceProfile):
    """2 sum_i sum_j b_ij^4, the closed form of the order-2 diagonal moment."""
    return 2 * sum(x**4 for row in B.entries for x in row)


def close(a, b, rel=1e-12, abs_=1e-300):
    return abs(a - b) <= rel * max(abs(a), abs(b)) + abs_
