"""Minimum-distance-2 structure of an ensemble and the small-weight slope.

The slope is ``log(1 / x*)`` where ``x*`` solves ``P(x) = 1/C``; for plain LDPC
ensembles this collapses to ``log(lambda'(0) rho'(1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .ensemble import Ensemble
from .errors import PNotDefinedError, TheoremHypothesisError

P_INVERSE_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralParams:
    r: int
    p: int
    X_c: tuple[int, ...]
    X_v: tuple[int, ...]
    C_t: dict[int, Fraction]
    C: Fraction
    P_coeffs: dict[int, Fraction] | None
    L_t: dict[int, tuple[int, ...]]

    def P(self, x: float) -> float:
        if self.P_coeffs is None:
            raise PNotDefinedError(f"P(x) is only defined when p = 2 (here p = {self.p})")
        return sum(float(c) * x**i for i, c in self.P_coeffs.items())

    def dP(self, x: float) -> float:
        assert self.P_coeffs is not None
        return sum(i * float(c) * x ** (i - 1) for i, c in self.P_coeffs.items())


def spectral_params(ensemble: Ensemble) -> SpectralParams:
    cns, vns = ensemble.cn_types, ensemble.vn_types
    r = min(t.r_t for t in cns)
    p = min(t.p_t for t in vns)
    X_c = tuple(t.id for t in cns if t.r_t == r)
    X_v = tuple(t.id for t in vns if t.p_t == p)
    C_t = {t.id: Fraction(t.r_t * t.enumerator[t.r_t], t.s) for t in cns}
    C = sum((cns[i].rho * C_t[i] for i in X_c), Fraction(0))

    L_t: dict[int, tuple[int, ...]] = {}
    P_coeffs: dict[int, Fraction] | None = None
    if p == 2:
        P_coeffs = {}
        for tid in X_v:
            t = vns[tid]
            B = t.io_enumerator
            L_t[tid] = tuple(sorted(i for (i, j) in B.support() if j == 2))
            for i in L_t[tid]:
                P_coeffs[i] = P_coeffs.get(i, Fraction(0)) + t.lam * Fraction(2 * B[i, 2], t.q)
        P_coeffs = dict(sorted(P_coeffs.items()))
    return SpectralParams(r, p, X_c, X_v, C_t, C, P_coeffs, L_t)


def p_inverse(params: SpectralParams, y: float) -> float:
    """Unique ``x >= 0`` with ``P(x) = y``: bracket by doubling, bisect, Newton-polish."""
    if params.P_coeffs is None:
        raise PNotDefinedError(f"P(x) is only defined when p = 2 (here p = {params.p})")
    y = float(y)
    if not y > 0:
        raise ValueError(f"p_inverse needs y > 0, got {y}")
    P = params.P
    lo, hi = 0.0, 1.0
    while P(hi) < y:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if P(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * hi:
            break
    x = 0.5 * (lo + hi)
    for _ in range(50):
        step = (P(x) - y) / params.dP(x)
        x_new = min(max(x - step, lo), hi)
        if abs(x_new - x) <= 1e-16 * x:
            x = x_new
            break
        x = x_new
    return x


def check_hypothesis(params: SpectralParams) -> None:
    failing = tuple(name for name, val in (("r", params.r), ("p", params.p)) if val != 2)
    if failing:
        detail = ", ".join(f"{name}={getattr(params, name)}" for name in failing)
        raise TheoremHypothesisError(f"{detail}: the small-weight slope requires r=2 and p=2", failing)


def stability_bound(ensemble: Ensemble) -> float:
    """P^{-1}(1/C): the BEC stability bound on the erasure threshold."""
    params = spectral_params(ensemble)
    check_hypothesis(params)
    return p_inverse(params, 1 / float(params.C))


def growth_rate_slope(ensemble: Ensemble, base: float = math.e) -> float:
    """First-order coefficient of the growth rate at alpha -> 0 (nats by default)."""
    params = spectral_params(ensemble)
    check_hypothesis(params)
    x = p_inverse(params, 1 / float(params.C))
    return math.log(1.0 / x) / math.log(base)
