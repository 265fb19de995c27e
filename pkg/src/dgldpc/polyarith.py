"""Exact integer polynomial products and powers (uni- and bivariate).

Coefficients live in numpy ``object`` arrays so that every entry is a Python
int; ``np.convolve`` handles the univariate schoolbook product.  Bivariate
products iterate over the nonzero terms of the sparser factor.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError

DEFAULT_MAX_DEGREE = 100_000
DEFAULT_MAX_CELLS = 4_000_000


def as_poly(coeffs: Sequence[int]) -> np.ndarray:
    arr = np.empty(len(coeffs), dtype=object)
    arr[:] = [int(c) for c in coeffs]
    return arr


def as_bipoly(coeffs: Mapping[tuple[int, int], int]) -> np.ndarray:
    du = max(u for u, _ in coeffs) + 1
    dv = max(v for _, v in coeffs) + 1
    arr = np.zeros((du, dv), dtype=object)
    arr[:] = 0
    for (u, v), c in coeffs.items():
        arr[u, v] = int(c)
    return arr


def _one(shape) -> np.ndarray:
    out = np.zeros(shape, dtype=object)
    out[...] = 0
    out[(0,) * len(shape)] = 1
    return out


def poly_mul(a: np.ndarray, b: np.ndarray, max_deg: int | None = None) -> np.ndarray:
    if max_deg is not None:
        a, b = a[: max_deg + 1], b[: max_deg + 1]
    out = np.convolve(a, b)
    return out if max_deg is None else out[: max_deg + 1]


def poly_pow(a: np.ndarray, e: int, max_deg: int | None = None) -> np.ndarray:
    result = _one((1,))
    base = a if max_deg is None else a[: max_deg + 1]
    while e:
        if e & 1:
            result = poly_mul(result, base, max_deg)
        e >>= 1
        if e:
            base = poly_mul(base, base, max_deg)
    return result


def bipoly_mul(a: np.ndarray, b: np.ndarray, max_deg: tuple[int, int] | None = None) -> np.ndarray:
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    du, dv = a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1
    if max_deg is not None:
        du, dv = min(du, max_deg[0] + 1), min(dv, max_deg[1] + 1)
    out = np.zeros((du, dv), dtype=object)
    out[...] = 0
    for u, v in zip(*np.nonzero(a)):
        if u >= du or v >= dv:
            continue
        c = a[u, v]
        hu, hv = min(b.shape[0], du - u), min(b.shape[1], dv - v)
        out[u : u + hu, v : v + hv] += c * b[:hu, :hv]
    return out


def bipoly_pow(a: np.ndarray, e: int, max_deg: tuple[int, int] | None = None) -> np.ndarray:
    """Power by repeated multiplication with the (sparse) base factor."""
    result = _one((1, 1))
    for _ in range(e):
        result = bipoly_mul(result, a, max_deg)
    return result


def poly_product_of_powers(factors: Sequence[tuple[Sequence[int], int]], max_deg: int | None = None) -> np.ndarray:
    """prod_t A_t(x)^{e_t} for ``factors = [(coeffs_t, e_t), ...]``."""
    total = sum((len(c) - 1) * e for c, e in factors)
    if total > DEFAULT_MAX_DEGREE and (max_deg is None or max_deg > DEFAULT_MAX_DEGREE):
        raise CapacityError(f"product degree {total} exceeds the capacity bound {DEFAULT_MAX_DEGREE}")
    result = _one((1,))
    for coeffs, e in factors:
        result = poly_mul(result, poly_pow(as_poly(coeffs), e, max_deg), max_deg)
    return result


def bipoly_product_of_powers(
    factors: Sequence[tuple[Mapping[tuple[int, int], int], int]],
    max_deg: tuple[int, int] | None = None,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> np.ndarray:
    du = sum(max(u for u, _ in c) * e for c, e in factors)
    dv = sum(max(v for _, v in c) * e for c, e in factors)
    if max_deg is not None:
        du, dv = min(du, max_deg[0]), min(dv, max_deg[1])
    if (du + 1) * (dv + 1) > max_cells:
        raise CapacityError(f"bivariate product needs {(du + 1) * (dv + 1)} cells (> {max_cells})")
    result = _one((1, 1))
    for coeffs, e in factors:
        base = as_bipoly(coeffs)
        for _ in range(e):
            result = bipoly_mul(result, base, (du, dv))
    return result
