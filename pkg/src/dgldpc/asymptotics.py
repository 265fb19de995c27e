"""Exponential growth of generating-function coefficients.

Every limit of the form ``(1/l) log Coeff[F(x)^l, x^{xi l}]`` is a maximum
entropy problem over the support of ``F``; we solve its convex dual

    min_theta  log F(e^theta) - <target, theta>

(a one- or two-dimensional smooth problem) and read the maximising
distribution off the tilted coefficients ``F_p e^{<p, theta>} / F(e^theta)``.
Targets on the boundary of the support hull are handled exactly by restricting
to the face that contains them, where the dual optimum would sit at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Mapping, Sequence

import numpy as np

from . import polyarith
from .codes import IOWeightEnumerator, WeightEnumerator
from .ensemble import Ensemble
from .errors import CapacityError, ConvergenceError, InfeasibleRatioError

Point = tuple[int, int]

# ---------------------------------------------------------------------------
# input normalisation


def to_fraction(x) -> Fraction:
    """Exact rational view of a ratio; floats are read as their shortest decimal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InfeasibleRatioError(f"ratio {x!r} is not finite")
        return Fraction(repr(float(x)))
    if isinstance(x, (int, str)) or isinstance(x, Real):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a ratio")


def _poly_items(A) -> list[tuple[int, int]]:
    if isinstance(A, WeightEnumerator):
        A = A.coeffs
    if isinstance(A, Mapping):
        items = sorted((int(i), c) for i, c in A.items())
    else:
        items = list(enumerate(A))
    out = [(i, c) for i, c in items if c]
    if any(c < 0 for _, c in out) or any(i < 0 for i, _ in out):
        raise ValueError("coefficients and exponents must be nonnegative")
    if not out:
        raise ValueError("zero polynomial")
    return out


def _bipoly_items(B) -> list[tuple[Point, int]]:
    if isinstance(B, IOWeightEnumerator):
        B = B.coeffs
    out = sorted(((int(i), int(j)), c) for (i, j), c in B.items() if c)
    if any(c < 0 for _, c in out) or any(i < 0 or j < 0 for (i, j), _ in out):
        raise ValueError("coefficients and exponents must be nonnegative")
    if not out:
        raise ValueError("zero polynomial")
    return out


def _logc(c) -> float:
    return math.log(c)  # exact for huge ints as well


# ---------------------------------------------------------------------------
# log-partition functions and their duals


class LogPartition:
    """``theta -> sum_k w_k log sum_p c_{k,p} exp(<p, theta>)`` with derivatives."""

    def __init__(self, parts: Sequence[tuple[float, np.ndarray, np.ndarray]]):
        self.parts = [(float(w), np.asarray(P, dtype=float), np.asarray(lc, dtype=float)) for w, P, lc in parts]
        self.dim = self.parts[0][1].shape[1]

    def tilted(self, theta: np.ndarray) -> list[np.ndarray]:
        out = []
        for _, P, lc in self.parts:
            a = lc + P @ theta
            e = np.exp(a - a.max())
            out.append(e / e.sum())
        return out

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        val = 0.0
        grad = np.zeros(self.dim)
        hess = np.zeros((self.dim, self.dim))
        for w, P, lc in self.parts:
            a = lc + P @ theta
            top = int(np.argmax(a))
            e = np.exp(a - a[top])
            e[top] = 0.0
            rest = e.sum()
            e[top] = 1.0
            val += w * (a[top] + math.log1p(rest))
            prob = e / (1.0 + rest)
            mean = prob @ P
            grad += w * mean
            centered = P - mean
            hess += w * (centered.T * prob) @ centered
        return val, grad, hess

    def value(self, theta: np.ndarray) -> float:
        return self(theta)[0]


def _dual_1d(lp: LogPartition, target: float) -> tuple[float, float]:
    """Root of ``d/dt log F(e^t) = target`` (bracket + bisection + Newton); returns (t, dual value)."""

    def slope(t: float) -> float:
        return lp(np.array([t]))[1][0]

    lo, hi = -1.0, 1.0
    while slope(lo) > target:
        lo, hi = 2.0 * lo, lo
        if lo < -1e6:
            raise ConvergenceError("could not bracket the 1-D dual root from below", {"target": target})
    while slope(hi) < target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ConvergenceError("could not bracket the 1-D dual root from above", {"target": target})
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slope(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-7 * max(1.0, abs(mid)):
            break
    t = 0.5 * (lo + hi)
    for _ in range(200):
        _, g, h = lp(np.array([t]))
        resid = g[0] - target
        if resid < 0:
            lo = t
        elif resid > 0:
            hi = t
        else:
            break
        step = resid / h[0, 0] if h[0, 0] > 0 else 0.0
        t_new = t - step
        if not lo <= t_new <= hi:
            t_new = 0.5 * (lo + hi)
        tol = 4e-16 * max(1.0, abs(t))
        t = t_new
        if abs(step) <= tol or hi - lo <= tol:
            break
    return t, lp.value(np.array([t])) - target * t


def _dual_2d(lp: LogPartition, target: np.ndarray, theta0: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Damped Newton on the convex dual ``log F(e^theta) - <target, theta>``."""
    theta = np.zeros(2) if theta0 is None else np.array(theta0, dtype=float)

    def psi(th):
        v, g, h = lp(th)
        return v - target @ th, g - target, h

    gtol = 1e-15 * max(1.0, float(np.max(np.abs(target))))
    f, g, H = psi(theta)
    for it in range(500):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= gtol:
            return theta, f
        try:
            d = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            d = -np.linalg.solve(H + 1e-12 * np.eye(2), g)
        dec = -(g @ d)
        if dec <= 1e-12 * max(1.0, abs(f)):
            # f is flat to rounding here, so Armijo cannot judge the step; plain
            # Newton converges quadratically and the moment residual decides
            cand = theta + d
            f_new, g_new, H_new = psi(cand)
            if float(np.max(np.abs(g_new))) >= gnorm:
                return theta, f
            theta, f, g, H = cand, f_new, g_new, H_new
            continue
        step = 1.0
        while True:
            cand = theta + step * d
            f_new, g_new, H_new = psi(cand)
            if f_new <= f - 1e-4 * step * dec:
                break
            step *= 0.5
            if step < 1e-20:
                if dec < 1e-16 * max(1.0, abs(f)):
                    return theta, f
                raise ConvergenceError(
                    "2-D dual line search stalled",
                    {"target": target.tolist(), "theta": theta.tolist(), "decrement": dec},
                )
        moved = np.max(np.abs(cand - theta))
        theta, f, g, H = cand, f_new, g_new, H_new
        # below this the accepted step no longer changes theta, so f cannot improve
        if moved <= 4e-16 * (1.0 + np.max(np.abs(theta))):
            return theta, f
    raise ConvergenceError("2-D dual Newton did not converge", {"target": target.tolist()})


# ---------------------------------------------------------------------------
# exact planar geometry on integer supports


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Counter-clockwise hull vertices without collinear points (monotone chain)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _affine_dim(points: Sequence[Point]) -> int:
    pts = list(set(points))
    if len(pts) == 1:
        return 0
    p0, p1 = pts[0], pts[1]
    return 2 if any(_cross(p0, p1, q) != 0 for q in pts[2:]) else 1


def _primitive(v: Point) -> Point:
    g = math.gcd(v[0], v[1])
    d = (v[0] // g, v[1] // g)
    return d if d > (0, 0) else (-d[0], -d[1])


# ---------------------------------------------------------------------------
# result containers


@dataclass
class BetaDistribution:
    support: tuple[int, ...]
    weights: np.ndarray
    z: float | None = None  # dual variable; None at a vertex of the support

    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    def primal_value(self, coeffs: Mapping[int, int]) -> float:
        return float(sum(w * (_logc(coeffs[i]) - math.log(w)) for i, w in zip(self.support, self.weights) if w > 0))


@dataclass
class EtaDistribution:
    support: tuple[Point, ...]
    weights: np.ndarray
    multipliers: tuple[float, float] | None = None  # (x, y); None if the target sits on a face

    def means(self) -> tuple[float, float]:
        P = np.array(self.support, dtype=float)
        m = self.weights @ P
        return float(m[0]), float(m[1])

    def primal_value(self, coeffs: Mapping[Point, int]) -> float:
        return float(sum(w * (_logc(coeffs[p]) - math.log(w)) for p, w in zip(self.support, self.weights) if w > 0))

    def as_dict(self) -> dict[Point, float]:
        return {p: float(w) for p, w in zip(self.support, self.weights)}


# ---------------------------------------------------------------------------
# one-dimensional problems


def _growth_1d_support(exps: Sequence[int], logc: Sequence[float], target: Fraction | float):
    """Max entropy on an integer support: returns (value, weights, t)."""
    exps = list(exps)
    lo, hi = min(exps), max(exps)
    tf = to_fraction(target) if not isinstance(target, float) else None
    at_lo = target == lo if tf is None else tf == lo
    at_hi = target == hi if tf is None else tf == hi
    if (tf is not None and not lo <= tf <= hi) or (tf is None and not lo <= target <= hi):
        raise InfeasibleRatioError(f"ratio {target} outside the feasible range [{lo}, {hi}]", (lo, hi))
    w = np.zeros(len(exps))
    if at_lo or at_hi:
        idx = exps.index(lo if at_lo else hi)
        w[idx] = 1.0
        return float(logc[idx]), w, None
    lp = LogPartition([(1.0, np.array(exps, dtype=float)[:, None], np.array(logc))])
    t, value = _dual_1d(lp, float(target))
    w[:] = lp.tilted(np.array([t]))[0]
    return value, w, t


def coeff_growth_1d(A, xi) -> tuple[float, BetaDistribution]:
    """``lim (1/l) log Coeff[A(x)^l, x^{xi l}]`` and the maximising distribution.

    ``A`` is a coefficient sequence, a ``{exponent: coeff}`` mapping or a
    :class:`WeightEnumerator`.
    """
    items = _poly_items(A)
    exps = [i for i, _ in items]
    target = xi if isinstance(xi, float) else to_fraction(xi)
    if target < 0 or target > max(exps):
        raise InfeasibleRatioError(f"xi={xi} outside the feasible range [0, {max(exps)}]", (0, max(exps)))
    if target < min(exps):
        raise InfeasibleRatioError(f"xi={xi} below the smallest exponent {min(exps)}", (min(exps), max(exps)))
    value, w, t = _growth_1d_support(exps, [_logc(c) for _, c in items], target)
    return value, BetaDistribution(tuple(exps), w, None if t is None else math.exp(t))


def small_xi_expansion_1d(A_c, c: int, xi) -> float:
    """First-order small-ratio form ``(xi/c) log(e c A_c / xi)``; 0 at xi = 0."""
    xi = float(xi)
    if xi == 0:
        return 0.0
    return (xi / c) * (1.0 + math.log(c * float(A_c) / xi))


# ---------------------------------------------------------------------------
# two-dimensional problems


def _solve_on_points(points: list[Point], logc: list[float], target: tuple[Fraction, Fraction]):
    """Max entropy over integer points of any affine dimension; returns (value, weights, multipliers)."""
    T = target
    dim = _affine_dim(points)
    if dim == 0:
        if (Fraction(points[0][0]), Fraction(points[0][1])) != T:
            raise InfeasibleRatioError(f"target {tuple(map(str, T))} is not the single support point {points[0]}")
        return logc[0], np.ones(1), None
    if dim == 1:
        p0 = min(points)
        d = _primitive((max(points)[0] - p0[0], max(points)[1] - p0[1]))
        rel = (T[0] - p0[0], T[1] - p0[1])
        if rel[0] * d[1] - rel[1] * d[0] != 0:
            raise InfeasibleRatioError(f"target {tuple(map(str, T))} is off the support line through {p0} along {d}")
        dd = d[0] * d[0] + d[1] * d[1]
        ks = [((p[0] - p0[0]) * d[0] + (p[1] - p0[1]) * d[1]) // dd for p in points]
        kappa = (rel[0] * d[0] + rel[1] * d[1]) / dd
        value, w, _ = _growth_1d_support(ks, logc, kappa)
        return value, w, None

    hull = convex_hull(points)
    zeros = []
    for a, b in zip(hull, hull[1:] + hull[:1]):
        cr = _cross(a, b, T)
        if cr < 0:
            raise InfeasibleRatioError(f"target {tuple(map(str, T))} lies outside the support hull {hull}")
        if cr == 0:
            zeros.append((a, b))
    if zeros:
        a, b = zeros[0]
        on_face = [idx for idx, p in enumerate(points) if _cross(a, b, p) == 0]
        value, w_face, _ = _solve_on_points([points[i] for i in on_face], [logc[i] for i in on_face], T)
        w = np.zeros(len(points))
        w[on_face] = w_face
        return value, w, None
    lp = LogPartition([(1.0, np.array(points, dtype=float), np.array(logc))])
    theta, value = _dual_2d(lp, np.array([float(T[0]), float(T[1])]))
    w = lp.tilted(theta)[0]
    return value, w, (math.exp(theta[0]), math.exp(theta[1]))


def coeff_growth_2d(B, xi, theta) -> tuple[float, EtaDistribution]:
    """``lim (1/l) log Coeff[B(x,y)^l, x^{xi l} y^{theta l}]`` and the maximiser.

    ``B`` is an :class:`IOWeightEnumerator` or a ``{(i, j): coeff}`` mapping.
    """
    items = _bipoly_items(B)
    points = [p for p, _ in items]
    T = (to_fraction(xi), to_fraction(theta))
    value, w, mult = _solve_on_points(points, [_logc(c) for _, c in items], T)
    return value, EtaDistribution(tuple(points), w, mult)


# ---------------------------------------------------------------------------
# exact coefficient oracles


def exact_coeff_power_1d(A, ell: int, w: int, max_degree: int = polyarith.DEFAULT_MAX_DEGREE) -> int:
    items = _poly_items(A)
    deg = max(i for i, _ in items)
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if ell * deg > max_degree:
        raise CapacityError(f"ell*deg = {ell * deg} exceeds the capacity bound {max_degree}")
    if not 0 <= w <= ell * deg:
        return 0
    coeffs = [0] * (deg + 1)
    for i, c in items:
        coeffs[i] = c
    return int(polyarith.poly_pow(polyarith.as_poly(coeffs), ell, max_deg=w)[w]) if w < ell * deg + 1 else 0


def exact_coeff_power_2d(B, ell: int, u: int, v: int, max_degree: int = polyarith.DEFAULT_MAX_DEGREE) -> int:
    items = dict(_bipoly_items(B))
    du = max(i for i, _ in items)
    dv = max(j for _, j in items)
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if ell * max(du, dv) > max_degree:
        raise CapacityError(f"ell*deg = {ell * max(du, dv)} exceeds the capacity bound {max_degree}")
    if not (0 <= u <= ell * du and 0 <= v <= ell * dv):
        return 0
    power = polyarith.bipoly_pow(polyarith.as_bipoly(items), ell, max_deg=(u, v))
    return int(power[u, v]) if u < power.shape[0] and v < power.shape[1] else 0


def finite_growth_1d(A, xi, ell: int) -> float | None:
    """``(1/l) log Coeff[A^l, x^{xi l}]``, or None where the limit convention skips ``l``."""
    w = to_fraction(xi) * ell
    if w.denominator != 1:
        return None
    c = exact_coeff_power_1d(A, ell, int(w))
    return math.log(c) / ell if c > 0 else None


def finite_growth_2d(B, xi, theta, ell: int) -> float | None:
    u, v = to_fraction(xi) * ell, to_fraction(theta) * ell
    if u.denominator != 1 or v.denominator != 1:
        return None
    c = exact_coeff_power_2d(B, ell, int(u), int(v))
    return math.log(c) / ell if c > 0 else None


# ---------------------------------------------------------------------------
# check-node side


@dataclass
class CheckSideSolution:
    delta: float
    value: float  # mixture-dual route
    value_by_types: float  # per-type allocation route
    epsilon: tuple[float, ...]
    z: float | None


def _check_parts(ensemble: Ensemble):
    parts = []
    for t, g in zip(ensemble.cn_types, ensemble.gamma):
        items = _poly_items(t.enumerator)
        parts.append((float(g), np.array([[i] for i, _ in items], dtype=float), np.array([_logc(c) for _, c in items])))
    return parts


def check_side_max_ratio(ensemble: Ensemble) -> Fraction:
    return sum((g * t.enumerator.degree for t, g in zip(ensemble.cn_types, ensemble.gamma)), Fraction(0))


def _check_side_dual(ensemble: Ensemble, delta: float) -> tuple[float, float | None]:
    dmax = float(check_side_max_ratio(ensemble))
    if delta < 0 or delta > dmax * (1 + 1e-15):
        raise InfeasibleRatioError(f"delta={delta} outside [0, {dmax}]", (0.0, dmax))
    if delta == 0:
        return 0.0, None
    if delta >= dmax:
        return sum(float(g) * _logc(t.enumerator[t.enumerator.degree]) for t, g in zip(ensemble.cn_types, ensemble.gamma)), None
    lp = LogPartition(_check_parts(ensemble))
    t, value = _dual_1d(lp, delta)
    return value, t


def check_side_solution(ensemble: Ensemble, delta) -> CheckSideSolution:
    """Both evaluation routes of ``lim (1/m) log N_c(delta m)``."""
    delta = float(delta)
    value, t = _check_side_dual(ensemble, delta)
    if t is None:
        eps = tuple(float(g) * (0 if delta == 0 else t_.enumerator.degree) for t_, g in zip(ensemble.cn_types, ensemble.gamma))
        return CheckSideSolution(delta, value, value, eps, None)

    # per-type route: bisection on the common multiplier, then independent 1-D solves
    parts = _check_parts(ensemble)
    singles = [LogPartition([(1.0, P, lc)]) for _, P, lc in parts]

    def alloc(mu: float) -> list[float]:
        return [float(g) * s(np.array([mu]))[1][0] for g, s in zip(ensemble.gamma, singles)]

    lo, hi = -1.0, 1.0
    while sum(alloc(lo)) > delta:
        lo *= 2.0
    while sum(alloc(hi)) < delta:
        hi *= 2.0
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if sum(alloc(mid)) < delta:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
    eps = alloc(0.5 * (lo + hi))
    by_types = 0.0
    for t_, g, e in zip(ensemble.cn_types, ensemble.gamma, eps):
        by_types += float(g) * coeff_growth_1d(t_.enumerator, e / float(g))[0]
    return CheckSideSolution(delta, value, by_types, tuple(eps), math.exp(t))


def check_side_growth(ensemble: Ensemble, delta, tol: float = 1e-9) -> float:
    sol = check_side_solution(ensemble, delta)
    if abs(sol.value - sol.value_by_types) > tol:
        raise ConvergenceError(
            "check-side routes disagree",
            {"delta": sol.delta, "mixture": sol.value, "per_type": sol.value_by_types},
        )
    return sol.value


def check_side_expansion(ensemble: Ensemble, delta) -> float:
    """Small-delta form ``(delta/r) log(e C / (delta int_rho))``."""
    from .spectral import spectral_params

    params = spectral_params(ensemble)
    delta = float(delta)
    if delta == 0:
        return 0.0
    return delta / params.r * (1.0 + math.log(float(params.C) / (delta * float(ensemble.int_rho))))


# ---------------------------------------------------------------------------
# Minkowski geometry of the variable-node side


def _edge_vectors(poly: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    if len(poly) == 1:
        return []
    return [(b[0] - a[0], b[1] - a[1]) for a, b in zip(poly, poly[1:] + poly[:1])]


def _angle_key(v):
    # half-plane index then pseudo-angle ordering, exact for rationals
    upper = v[1] > 0 or (v[1] == 0 and v[0] > 0)
    return (0 if upper else 1, -Fraction(v[0]) / (abs(v[0]) + abs(v[1])) if upper else Fraction(v[0]) / (abs(v[0]) + abs(v[1])))


def minkowski_sum(polys: Sequence[list[tuple[Fraction, Fraction]]]) -> list[tuple[Fraction, Fraction]]:
    """Vertices (CCW, starting bottom-left) of a Minkowski sum of convex polygons."""
    start = [Fraction(0), Fraction(0)]
    edges = []
    for poly in polys:
        lowest = min(poly, key=lambda p: (p[1], p[0]))
        start[0] += lowest[0]
        start[1] += lowest[1]
        edges.extend(_edge_vectors(poly))
    edges.sort(key=_angle_key)
    out = [tuple(start)]
    cur = list(start)
    for v in edges:
        cur = [cur[0] + v[0], cur[1] + v[1]]
        out.append(tuple(cur))
    out = out[:-1] if len(out) > 1 else out
    # drop duplicates and collinear points
    clean: list[tuple[Fraction, Fraction]] = []
    for p in out:
        if clean and p == clean[-1]:
            continue
        clean.append(p)
    if len(clean) > 1 and clean[0] == clean[-1]:
        clean.pop()
    return convex_hull_frac(clean)


def convex_hull_frac(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def vertical_chord(poly, x: Fraction) -> tuple[Fraction, Fraction] | None:
    """[y_lo, y_hi] of the polygon's intersection with the line ``X = x``."""
    ys = []
    n = len(poly)
    if n == 1:
        return (poly[0][1], poly[0][1]) if poly[0][0] == x else None
    segs = [(poly[0], poly[1])] if n == 2 else list(zip(poly, poly[1:] + poly[:1]))
    for a, b in segs:
        if a[0] == b[0]:
            if a[0] == x:
                ys.extend([a[1], b[1]])
            continue
        lo, hi = min(a[0], b[0]), max(a[0], b[0])
        if lo <= x <= hi:
            ys.append(a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]))
    if not ys:
        return None
    return min(ys), max(ys)


# ---------------------------------------------------------------------------
# general growth rate


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


def binary_entropy_derivative(x: float) -> float:
    return math.log1p(-x) - math.log(x)


@dataclass
class GeneralGrowthSolution:
    alpha: float
    value: float
    beta: float
    beta_range: tuple[float, float]
    beta_over_alpha_range: tuple[float, float]
    vn_term: float
    check_term: float
    binomial_term: float
    multipliers: tuple[float, ...]
    per_type: list[dict] = field(default_factory=list)
    nu: dict[tuple[int, int, int], float] = field(default_factory=dict)
    dual_gap: float = 0.0
    evaluations: int = 0

    @property
    def mass_j_above_2(self) -> float:
        """Mass of ``nu`` (normalised per unit input weight) on output weights j > 2."""
        return float(sum(v for (t, i, j), v in self.nu.items() if j > 2))

    @property
    def vn_fraction_j_above_2(self) -> float:
        """Fraction of all VNs carrying a local codeword of output weight j > 2."""
        return self.alpha * self.mass_j_above_2


class _VNSide:
    """Variable-node log-partition ``sum_t delta_t log B_t(x, y)`` plus its geometry."""

    def __init__(self, ensemble: Ensemble):
        self.ensemble = ensemble
        self.items = [_bipoly_items(t.io_enumerator) for t in ensemble.vn_types]
        self.points = [[p for p, _ in it] for it in self.items]
        self.logc = [[_logc(c) for _, c in it] for it in self.items]
        self.deltas = [float(d) for d in ensemble.delta]
        polys = []
        for d, pts in zip(ensemble.delta, self.points):
            hull = convex_hull(pts)
            polys.append([(d * p[0], d * p[1]) for p in hull])
        self.region = minkowski_sum(polys)
        all_pts = [p for pts in self.points for p in pts]
        self.dim = _affine_dim(all_pts)
        self.alpha_max = max(p[0] for p in self.region)
        if self.dim == 1:
            self.direction = _primitive(max(all_pts))
            dd = self.direction[0] ** 2 + self.direction[1] ** 2
            ks = [[(p[0] * self.direction[0] + p[1] * self.direction[1]) // dd for p in pts] for pts in self.points]
            self.ks = ks
            self.lp = LogPartition(
                [(d, np.array(k, dtype=float)[:, None], np.array(lc)) for d, k, lc in zip(self.deltas, ks, self.logc)]
            )
        else:
            self.lp = LogPartition(
                [(d, np.array(p, dtype=float), np.array(lc)) for d, p, lc in zip(self.deltas, self.points, self.logc)]
            )
        ratios = [Fraction(j, i) for pts in self.points for (i, j) in pts if i > 0]
        self.ratio_range = (min(ratios), max(ratios))
        self._theta = None

    def value(self, alpha: float, beta: float) -> tuple[float, np.ndarray]:
        if self.dim == 1:
            kappa = alpha / self.direction[0]
            t, val = _dual_1d(self.lp, kappa)
            return val, np.array([t])
        target = np.array([alpha, beta])
        try:
            theta, val = _dual_2d(self.lp, target, self._theta)
        except ConvergenceError:
            if self._theta is None:
                raise
            # a warm start far out on a flat direction can stall; the origin never does here
            theta, val = _dual_2d(self.lp, target, None)
        self._theta = theta
        return val, theta

    def tilted(self, theta: np.ndarray) -> list[np.ndarray]:
        return self.lp.tilted(theta)


def solve_growth_general(ensemble: Ensemble, alpha, grid: int = 48, xtol: float = 1e-13) -> GeneralGrowthSolution:
    """Growth rate G(alpha) of the expected weight spectrum, for any alpha.

    ``G(alpha) = max_beta [ V(alpha, beta) + (m/n) Phi_c(beta n/m) - (E/n) H(beta n/E) ]``
    with ``V`` the variable-node coefficient growth (2-D dual), ``Phi_c`` the
    check-node growth and ``H`` the natural binary entropy.  The outer
    maximisation is a grid scan followed by golden-section refinement; the
    objective is not concave in general because the entropy term is subtracted.
    """
    a = to_fraction(alpha)
    if a == 0:
        return GeneralGrowthSolution(0.0, 0.0, 0.0, (0.0, 0.0), (0.0, 0.0), 0.0, 0.0, 0.0, ())
    vn = _VNSide(ensemble)
    if a < 0 or a >= vn.alpha_max:
        raise InfeasibleRatioError(f"alpha={alpha} outside (0, {vn.alpha_max})", (0.0, float(vn.alpha_max)))
    chord = vertical_chord(vn.region, a)
    assert chord is not None
    il, ir = ensemble.int_lambda, ensemble.int_rho
    beta_cmax = check_side_max_ratio(ensemble) * ir / il
    b_lo, b_hi = chord
    b_top = min(b_hi, beta_cmax)
    if b_top < b_lo or (b_top == b_lo and vn.dim == 2):
        raise InfeasibleRatioError(
            f"alpha={alpha}: no edge weight satisfies both node sides ({float(b_lo)} > {float(beta_cmax)})",
            (0.0, float(vn.alpha_max)),
        )
    af = float(a)
    ilf, irf = float(il), float(ir)
    evals = 0

    def terms(beta: float):
        nonlocal evals
        evals += 1
        v, theta = vn.value(af, beta)
        c = irf / ilf * _check_side_dual(ensemble, beta * ilf / irf)[0]
        h = binary_entropy(beta * ilf) / ilf
        return v, c, h, theta

    def objective(beta: float) -> float:
        v, c, h, _ = terms(beta)
        return v + c - h

    lo_f, top_f = float(b_lo), float(b_top)
    top_open = b_top == b_hi  # the VN boundary itself is excluded from the 2-D dual
    if vn.dim == 1 or lo_f == top_f:
        beta_star = lo_f
    else:
        width = top_f - lo_f

        def beta_of(u: float) -> float:
            return lo_f + u * width

        edge = np.geomspace(1e-12, 0.25, grid // 3)
        us = np.unique(np.concatenate([edge, np.linspace(0.0, 1.0, grid // 3 + 2)[1:-1], 1.0 - edge]))
        if not top_open:
            us = np.append(us, 1.0)
        vals = []
        for u in us:
            try:
                vals.append(objective(beta_of(u)))
            except ConvergenceError:
                vals.append(-np.inf)
        vals = np.array(vals)
        k = int(np.argmax(vals))
        if not np.isfinite(vals[k]):
            raise ConvergenceError("objective could not be evaluated on the beta grid", {"alpha": af})
        left = us[k - 1] if k > 0 else 0.5 * us[0]
        right = us[k + 1] if k + 1 < len(us) else us[k]
        # golden-section maximisation on [left, right]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = right - invphi * (right - left)
        x2 = left + invphi * (right - left)
        f1, f2 = objective(beta_of(x1)), objective(beta_of(x2))
        for _ in range(400):
            if right - left <= xtol * max(us[k], 1e-300) or right - left <= 1e-300:
                break
            if f1 < f2:
                left, x1, f1 = x1, x2, f2
                x2 = left + invphi * (right - left)
                f2 = objective(beta_of(x2))
            else:
                right, x2, f2 = x2, x1, f1
                x1 = right - invphi * (right - left)
                f1 = objective(beta_of(x1))
        else:
            raise ConvergenceError("golden-section search did not reach tolerance", {"alpha": af, "bracket": (left, right)})
        cands = [(vals[k], us[k]), (f1, x1), (f2, x2)]
        best_u = max(cands)[1]
        if max(cands)[0] - vals[k] < -1e-8:
            raise ConvergenceError("outer search lost the grid maximum", {"alpha": af})
        beta_star = beta_of(best_u)

    v, c, h, theta = terms(beta_star)
    sol = GeneralGrowthSolution(
        alpha=af,
        value=v + c - h,
        beta=beta_star,
        beta_range=(float(b_lo), float(b_top)),
        beta_over_alpha_range=(float(vn.ratio_range[0]), float(vn.ratio_range[1])),
        vn_term=v,
        check_term=c,
        binomial_term=h,
        multipliers=tuple(float(x) for x in theta),
        evaluations=evals,
    )
    primal = 0.0
    for tidx, (w, pts, items, d) in enumerate(zip(vn.tilted(theta), vn.points, vn.items, vn.deltas)):
        eta = EtaDistribution(tuple(pts), w)
        mi, mj = eta.means()
        sol.per_type.append({"type": tidx, "alpha_t": d * mi, "beta_t": d * mj, "eta": eta.as_dict()})
        primal += d * eta.primal_value(dict(items))
        for (i, j), wt in zip(pts, w):
            if (i, j) != (0, 0):
                sol.nu[(tidx, i, j)] = d * float(wt) / af
    sol.dual_gap = abs(primal - v)
    return sol


def growth_rate_general(ensemble: Ensemble, alpha) -> float:
    return solve_growth_general(ensemble, alpha).value


# ---------------------------------------------------------------------------
# second-order correction from the all-zero local codewords


def vn_zero_correction(ensemble: Ensemble, etas: Sequence[Mapping[Point, float]]) -> float:
    """``sum_t delta_t F_t(eta_t)`` with ``F = eta00 log(1/eta00) - sum_{S^-} eta``."""
    total = 0.0
    for d, eta in zip(ensemble.delta, etas):
        sigma = float(sum(w for p, w in eta.items() if p != (0, 0)))
        e00 = eta.get((0, 0), 1.0 - sigma)
        f = (-e00 * math.log(e00) if e00 > 0 else 0.0) - sigma
        total += float(d) * f
    return total


def vn_zero_correction_bound(ensemble: Ensemble) -> float:
    """Constant K with ``|sum_t delta_t F_t| <= K alpha^2``.

    Uses ``|(1 - s) log(1 - s) + s| <= s^2`` on [0, 1] and ``s_t <= alpha_t / delta_t``.
    """
    return max(1.0 / float(d) for d in ensemble.delta)
