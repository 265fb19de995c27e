"""Finite-length ground truth for the expected weight spectrum.

Three independent routes:

* :func:`expected_spectrum` - generating functions over split assignments,
  exact rationals;
* :func:`brute_force_spectrum` - every one of the ``E!`` edge permutations,
  each code enumerated outright;
* :func:`sample_spectrum` - Monte Carlo over uniformly drawn permutations.

Socket convention: VN sockets are laid out type by type, node by node, local
code bit by local code bit (CN sockets likewise), and a permutation ``perm``
wires VN socket ``e`` to CN socket ``perm[e]``.  Multi-edges are allowed, as
in the plain permutation ensemble.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import polyarith
from .codes import codeword_table
from .ensemble import Ensemble, EnsembleInstanceDims, instance_dims
from .errors import CapacityError, EmptySequenceError, InputError, SeedRequiredError

BRUTE_FORCE_MAX_E = 8
EXHAUSTIVE_MAX_N = 30
MAX_SAMPLE_WORDS = 1 << 20


@dataclass
class SpectrumReport:
    n: int
    weights: list[int]
    values: list  # Fraction for exact methods, float for monte-carlo
    method: str
    stderr: list[float] | None = None
    trials: int | None = None
    seed: int | None = None
    splits: dict[tuple[int, int], Fraction] | None = None
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict[int, object]:
        return dict(zip(self.weights, self.values))

    def __getitem__(self, w: int):
        return self.as_dict().get(w, Fraction(0) if self.method != "monte-carlo" else 0.0)


# ---------------------------------------------------------------------------
# generating-function route


@functools.lru_cache(maxsize=64)
def _check_polynomial(ensemble: Ensemble, n: int) -> np.ndarray:
    dims = instance_dims(ensemble, n)
    factors = [(t.enumerator.coeffs, c) for t, c in zip(ensemble.cn_types, dims.cn_counts)]
    return polyarith.poly_product_of_powers(factors)


def check_valid_count(ensemble: Ensemble, n: int, v: int) -> int:
    """Number of weight-``v`` edge subsets under which every CN sees a local codeword."""
    dims = instance_dims(ensemble, n)
    if not 0 <= v <= dims.E:
        raise InputError(f"v={v} outside 0..E={dims.E}")
    poly = _check_polynomial(ensemble, n)
    return int(poly[v]) if v < len(poly) else 0


def p_valid(ensemble: Ensemble, n: int, v: int) -> Fraction:
    dims = instance_dims(ensemble, n)
    return Fraction(check_valid_count(ensemble, n, v), math.comb(dims.E, v))


def variable_split_counts(ensemble: Ensemble, n: int, max_u: int | None = None) -> np.ndarray:
    """Table ``V[u, v]`` of variable-valid split assignments over all VNs."""
    dims = instance_dims(ensemble, n)
    factors = [(t.io_enumerator.coeffs, c) for t, c in zip(ensemble.vn_types, dims.vn_counts)]
    max_deg = None if max_u is None else (max_u, dims.E)
    return polyarith.bipoly_product_of_powers(factors, max_deg)


def expected_spectrum(
    ensemble: Ensemble, n: int, max_weight: int | None = None, include_splits: bool = False
) -> SpectrumReport:
    """Exact ``E[N_u]`` for ``u = 0..N`` (or ``0..max_weight``)."""
    dims = instance_dims(ensemble, n)
    top = dims.N if max_weight is None else min(max_weight, dims.N)
    V = variable_split_counts(ensemble, n, top)
    check = _check_polynomial(ensemble, n)
    pv = [Fraction(int(check[v]) if v < len(check) else 0, math.comb(dims.E, v)) for v in range(V.shape[1])]
    values = []
    splits: dict[tuple[int, int], Fraction] = {}
    for u in range(top + 1):
        total = Fraction(0)
        if u < V.shape[0]:
            for v in range(V.shape[1]):
                c = V[u, v]
                if c and pv[v]:
                    term = c * pv[v]
                    total += term
                    if include_splits:
                        splits[(u, v)] = term
        values.append(total)
    return SpectrumReport(
        n, list(range(top + 1)), values, "exact-gf", splits=splits if include_splits else None, meta={"E": dims.E, "N": dims.N}
    )


# ---------------------------------------------------------------------------
# concrete codes


class _Wiring:
    """Socket bookkeeping shared by the brute-force and sampling routes."""

    def __init__(self, ensemble: Ensemble, dims: EnsembleInstanceDims):
        self.dims = dims
        vn_nodes = [t for t, c in zip(ensemble.vn_types, dims.vn_counts) for _ in range(c)]
        cn_nodes = [t for t, c in zip(ensemble.cn_types, dims.cn_counts) for _ in range(c)]
        self.vn_nodes, self.cn_nodes = vn_nodes, cn_nodes
        # local codeword bits, per VN node, for every local info word
        self.vn_offsets = np.cumsum([0] + [t.q for t in vn_nodes])
        self.info_offsets = np.cumsum([0] + [t.k for t in vn_nodes])
        self.cn_offsets = np.cumsum([0] + [t.s for t in cn_nodes])
        self.cn_tables = [codeword_table(t.code) for t in cn_nodes]

    def socket_bits(self, info_words: np.ndarray) -> np.ndarray:
        """(W, E) uint8 matrix of VN-socket bits for each global info word."""
        W = len(info_words)
        out = np.zeros((W, self.dims.E), dtype=np.uint8)
        for node, t in enumerate(self.vn_nodes):
            local_info = (info_words >> int(self.info_offsets[node])) & ((1 << t.k) - 1)
            word = np.zeros(W, dtype=np.int64)
            for b, row in enumerate(t.code.rows):
                word ^= np.where((local_info >> b) & 1, row, 0)
            base = int(self.vn_offsets[node])
            for j in range(t.q):
                out[:, base + j] = (word >> j) & 1
        return out

    def valid(self, sockets: np.ndarray, perms: np.ndarray) -> np.ndarray:
        """(P, W) bool: does info word w give a codeword under permutation p?"""
        inv = np.argsort(perms, axis=1)  # CN socket -> VN socket
        cn_bits = sockets[:, inv].transpose(1, 0, 2)  # (P, W, E)
        ok = np.ones(cn_bits.shape[:2], dtype=bool)
        for node, table in enumerate(self.cn_tables):
            lo, hi = int(self.cn_offsets[node]), int(self.cn_offsets[node + 1])
            weights = (1 << np.arange(hi - lo)).astype(np.int64)
            idx = cn_bits[:, :, lo:hi].astype(np.int64) @ weights
            ok &= table[idx]
        return ok


def brute_force_spectrum(ensemble: Ensemble, n: int, batch: int = 2520) -> SpectrumReport:
    """Average true spectrum over all ``E!`` permutations (exact rationals)."""
    dims = instance_dims(ensemble, n)
    if dims.E > BRUTE_FORCE_MAX_E:
        raise CapacityError(f"brute force needs E <= {BRUTE_FORCE_MAX_E}, got E={dims.E}")
    if dims.N > 20:
        raise CapacityError(f"brute force needs N <= 20, got N={dims.N}")
    wiring = _Wiring(ensemble, dims)
    info = np.arange(1 << dims.N, dtype=np.int64)
    weights = np.bitwise_count(info).astype(np.int64)
    sockets = wiring.socket_bits(info)
    counts = np.zeros(dims.N + 1, dtype=np.int64)
    perm_iter = itertools.permutations(range(dims.E))
    while True:
        chunk = list(itertools.islice(perm_iter, batch))
        if not chunk:
            break
        ok = wiring.valid(sockets, np.array(chunk, dtype=np.int64))
        counts += np.bincount(weights, weights=ok.sum(axis=0), minlength=dims.N + 1).astype(np.int64)
    total = math.factorial(dims.E)
    values = [Fraction(int(c), total) for c in counts]
    return SpectrumReport(n, list(range(dims.N + 1)), values, "brute-force", meta={"E": dims.E, "N": dims.N})


def _bounded_info_words(N: int, wmax: int) -> np.ndarray:
    if N <= EXHAUSTIVE_MAX_N and (1 << N) <= MAX_SAMPLE_WORDS:
        words = np.arange(1 << N, dtype=np.int64)
        return words[np.bitwise_count(words) <= wmax]
    count = sum(math.comb(N, w) for w in range(wmax + 1))
    if count > MAX_SAMPLE_WORDS:
        raise CapacityError(f"weight-bounded search over {count} info words exceeds {MAX_SAMPLE_WORDS}")
    if N > 62:
        raise CapacityError(f"N={N} exceeds the 62-bit info word layout")
    out = [0]
    for w in range(1, wmax + 1):
        for combo in itertools.combinations(range(N), w):
            out.append(sum(1 << i for i in combo))
    return np.array(out, dtype=np.int64)


def sample_spectrum(
    ensemble: Ensemble,
    n: int,
    trials: int,
    seed: int | None,
    wmax: int | None = None,
    reproducible: bool = True,
    batch: int = 512,
) -> SpectrumReport:
    """Empirical mean and standard error of ``N_w`` for ``w <= wmax``.

    Trial ``i`` draws its permutation from a Philox stream keyed by ``seed`` and
    jumped ``i`` times, so results do not depend on batching.
    """
    if seed is None:
        if reproducible:
            raise SeedRequiredError("sample_spectrum needs a seed in reproducible mode")
        seed = int(np.random.SeedSequence().entropy % (1 << 64))
    if trials < 1:
        raise InputError("trials must be >= 1")
    dims = instance_dims(ensemble, n)
    wmax = dims.N if wmax is None else wmax
    if not 0 <= wmax <= dims.N:
        raise InputError(f"wmax={wmax} outside 0..N={dims.N}")
    wiring = _Wiring(ensemble, dims)
    info = _bounded_info_words(dims.N, wmax)
    weights = np.bitwise_count(info).astype(np.int64)
    sockets = wiring.socket_bits(info)
    base = np.random.Philox(key=int(seed) & ((1 << 64) - 1))

    per_trial = np.zeros((trials, wmax + 1))
    for start in range(0, trials, batch):
        stop = min(trials, start + batch)
        perms = np.stack([np.random.Generator(base.jumped(i)).permutation(dims.E) for i in range(start, stop)])
        ok = wiring.valid(sockets, perms)
        for row, valid in enumerate(ok):
            per_trial[start + row] = np.bincount(weights[valid], minlength=wmax + 1)[: wmax + 1]
    mean = per_trial.mean(axis=0)
    stderr = per_trial.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(wmax + 1)
    return SpectrumReport(
        n,
        list(range(wmax + 1)),
        [float(x) for x in mean],
        "monte-carlo",
        stderr=[float(x) for x in stderr],
        trials=trials,
        seed=int(seed),
        meta={"E": dims.E, "N": dims.N},
    )


# ---------------------------------------------------------------------------
# finite-length growth estimates


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def growth_estimate(ensemble: Ensemble, alpha, n_list: Iterable[int]) -> list[tuple[int, float]]:
    """``(n, (1/n) log E[N_{alpha n}])`` over the admissible ``n`` of ``n_list``."""
    from .asymptotics import to_fraction

    a = to_fraction(alpha)
    out = []
    for n in n_list:
        w = a * n
        if w.denominator != 1:
            continue
        try:
            dims = instance_dims(ensemble, n)
        except InputError:
            continue
        if w > dims.N:
            continue
        val = expected_spectrum(ensemble, n, max_weight=int(w))[int(w)]
        if val > 0:
            out.append((n, _log_fraction(val) / n))
    if not out:
        raise EmptySequenceError(f"no admissible n in the list for alpha={alpha}")
    return out


def fit_log_model(points: Sequence[tuple[int, float]]) -> tuple[float, float, float]:
    """Least-squares fit ``g(n) = a + b log(n)/n``; returns (a, b, R^2)."""
    ns = np.array([p[0] for p in points], dtype=float)
    g = np.array([p[1] for p in points])
    X = np.column_stack([np.ones_like(ns), np.log(ns) / ns])
    coef, *_ = np.linalg.lstsq(X, g, rcond=None)
    resid = g - X @ coef
    ss_tot = float(((g - g.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2
