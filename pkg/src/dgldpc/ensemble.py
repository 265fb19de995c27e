"""Irregular D-GLDPC ensembles: node-type tables and exact structural counts.

All fractions are :class:`fractions.Fraction`.  Feeding floats into
:func:`build_ensemble` is refused on purpose: instance integrality checks must
be exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .codes import (
    IOWeightEnumerator,
    LinearCode,
    WeightEnumerator,
    io_weight_enumerator,
    weight_enumerator,
)
from .errors import DegenerateTypeError, FractionSumError, InputError, NonIntegralInstanceError


@dataclass(frozen=True)
class CNTypeSpec:
    id: int
    code: LinearCode
    rho: Fraction
    enumerator: WeightEnumerator
    r_t: int

    @property
    def s(self) -> int:
        return self.code.n

    @property
    def h(self) -> int:
        return self.code.k


@dataclass(frozen=True)
class VNTypeSpec:
    id: int
    code: LinearCode
    lam: Fraction
    io_enumerator: IOWeightEnumerator
    p_t: int

    @property
    def q(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k


@dataclass(frozen=True)
class Ensemble:
    cn_types: tuple[CNTypeSpec, ...]
    vn_types: tuple[VNTypeSpec, ...]
    int_rho: Fraction
    int_lambda: Fraction
    gamma: tuple[Fraction, ...]
    delta: tuple[Fraction, ...]
    name: str = ""

    @property
    def edges_per_vn(self) -> Fraction:
        return 1 / self.int_lambda

    @property
    def cns_per_vn(self) -> Fraction:
        """m/n, the check-node count per variable node."""
        return self.int_rho / self.int_lambda

    @property
    def period(self) -> int:
        """Smallest n for which every node count is an integer."""
        dens = [(t.lam / t.q).denominator for t in self.vn_types]
        dens += [(t.rho / t.s).denominator for t in self.cn_types]
        e_min = math.lcm(*dens)
        n_min = e_min * self.int_lambda
        assert n_min.denominator == 1
        return int(n_min)

    def next_valid_n(self, n: int) -> int:
        p = self.period
        return max(p, -(-n // p) * p)

    def lambda_coeffs(self) -> dict[int, Fraction]:
        """Edge-perspective VN degree polynomial as {exponent: coefficient}."""
        out: dict[int, Fraction] = {}
        for t in self.vn_types:
            out[t.q - 1] = out.get(t.q - 1, Fraction(0)) + t.lam
        return out

    def rho_coeffs(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for t in self.cn_types:
            out[t.s - 1] = out.get(t.s - 1, Fraction(0)) + t.rho
        return out


@dataclass(frozen=True)
class EnsembleInstanceDims:
    n: int
    E: int
    m: int
    N: int
    M: int
    vn_counts: tuple[int, ...]
    cn_counts: tuple[int, ...]


def _as_exact(x, what: str) -> Fraction:
    if isinstance(x, float):
        raise InputError(f"{what} must be an exact rational, got float {x!r}")
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}: cannot interpret {x!r} as a rational") from exc


def build_ensemble(
    cn_specs: Sequence[tuple[LinearCode, Fraction]],
    vn_specs: Sequence[tuple[LinearCode, Fraction]],
    name: str = "",
) -> Ensemble:
    """Build an ensemble from ``(code, edge_fraction)`` pairs for each side."""
    if not cn_specs or not vn_specs:
        raise InputError("an ensemble needs at least one CN type and one VN type")

    for side, specs in (("CN", cn_specs), ("VN", vn_specs)):
        seen: dict[LinearCode, int] = {}
        for idx, (code, _) in enumerate(specs):
            if code in seen:
                raise DegenerateTypeError(f"{side} types {seen[code]} and {idx} share the same code and generator")
            seen[code] = idx

    rhos = [_as_exact(f, f"rho[{i}]") for i, (_, f) in enumerate(cn_specs)]
    lams = [_as_exact(f, f"lambda[{i}]") for i, (_, f) in enumerate(vn_specs)]
    for label, fr in (("rho", rhos), ("lambda", lams)):
        if any(f <= 0 or f > 1 for f in fr):
            raise FractionSumError(f"every {label} fraction must lie in (0, 1]")
        if sum(fr) != 1:
            raise FractionSumError(f"sum of {label} fractions is {sum(fr)}, expected 1")

    cn_types = []
    for i, ((code, _), rho) in enumerate(zip(cn_specs, rhos)):
        if code.k == code.n:
            warnings.warn(f"CN type {i} has h = s = {code.n}; it imposes no constraint", RuntimeWarning)
        enum = weight_enumerator(code)
        cn_types.append(CNTypeSpec(i, code, rho, enum, enum.min_distance))
    vn_types = []
    for i, ((code, _), lam) in enumerate(zip(vn_specs, lams)):
        io = io_weight_enumerator(code)
        vn_types.append(VNTypeSpec(i, code, lam, io, io.min_distance))

    int_rho = sum((t.rho / t.s for t in cn_types), Fraction(0))
    int_lambda = sum((t.lam / t.q for t in vn_types), Fraction(0))
    gamma = tuple(t.rho / (t.s * int_rho) for t in cn_types)
    delta = tuple(t.lam / (t.q * int_lambda) for t in vn_types)
    return Ensemble(tuple(cn_types), tuple(vn_types), int_rho, int_lambda, gamma, delta, name)


def instance_dims(ensemble: Ensemble, n: int) -> EnsembleInstanceDims:
    if not isinstance(n, int) or n <= 0:
        raise InputError(f"n must be a positive integer, got {n!r}")
    suggestion = ensemble.next_valid_n(n)

    def need_int(value: Fraction, label: str) -> int:
        if value.denominator != 1:
            raise NonIntegralInstanceError(
                f"n={n} gives non-integral {label} = {value}; smallest valid n >= {n} is {suggestion}",
                label,
                suggestion,
            )
        return int(value)

    E = need_int(n / ensemble.int_lambda, "E")
    m = need_int(E * ensemble.int_rho, "m")
    vn_counts = tuple(need_int(E * t.lam / t.q, f"VN count of type {t.id}") for t in ensemble.vn_types)
    cn_counts = tuple(need_int(E * t.rho / t.s, f"CN count of type {t.id}") for t in ensemble.cn_types)
    N = sum(c * t.k for c, t in zip(vn_counts, ensemble.vn_types))
    M = sum(c * (t.s - t.h) for c, t in zip(cn_counts, ensemble.cn_types))
    return EnsembleInstanceDims(n, E, m, N, M, vn_counts, cn_counts)


def design_rate(ensemble: Ensemble) -> Fraction:
    """1 - M/N; independent of n because both scale with E."""
    per_edge_N = sum((t.lam * t.k / t.q for t in ensemble.vn_types), Fraction(0))
    per_edge_M = sum((t.rho * (t.s - t.h) / t.s for t in ensemble.cn_types), Fraction(0))
    return 1 - per_edge_M / per_edge_N
