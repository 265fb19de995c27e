"""Small binary linear block codes and their exhaustive weight enumerators.

Generator rows are stored as Python ints with bit ``j`` holding column ``j``
(so the bit-string ``"1011"`` becomes ``0b1101``).  Every enumerator is built
by walking all ``2**k`` information words; no row reduction is applied, the
supplied generator *is* the encoder.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, InvalidCodeError

DEFAULT_MAX_K = 24
HARD_MAX_K = 64


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of a list of bitmask rows."""
    pivots: list[int] = []
    for row in rows:
        for p in pivots:
            row = min(row, row ^ p)
        if row:
            pivots.append(row)
    return len(pivots)


def bits_to_int(bits: str) -> int:
    if not bits or any(ch not in "01" for ch in bits):
        raise InvalidCodeError(f"bad generator row {bits!r}: expected a non-empty 0/1 string")
    return sum(1 << j for j, ch in enumerate(bits) if ch == "1")


def int_to_bits(row: int, n: int) -> str:
    return "".join("1" if row >> j & 1 else "0" for j in range(n))


@dataclass(frozen=True)
class LinearCode:
    """A binary ``(n, k)`` code together with a fixed generator matrix."""

    rows: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if not self.rows:
            raise InvalidCodeError("a code needs at least one generator row (k >= 1)")
        if not 1 <= self.n <= HARD_MAX_K:
            raise InvalidCodeError(f"code length n={self.n} outside 1..{HARD_MAX_K}")
        if self.k > self.n:
            raise InvalidCodeError(f"k={self.k} exceeds n={self.n}")
        for row in self.rows:
            if row < 0 or row >> self.n:
                raise InvalidCodeError(f"generator row {row:#x} does not fit in n={self.n} bits")
        if gf2_rank(self.rows) != self.k:
            raise InvalidCodeError("generator rows are linearly dependent over GF(2)")

    @property
    def k(self) -> int:
        return len(self.rows)

    @classmethod
    def from_bitstrings(cls, rows: Sequence[str]) -> "LinearCode":
        if not rows:
            raise InvalidCodeError("empty generator matrix")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise InvalidCodeError("generator rows have unequal lengths")
        return cls(tuple(bits_to_int(r) for r in rows), n)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]]) -> "LinearCode":
        return cls.from_bitstrings(["".join(str(int(b) & 1) for b in row) for row in matrix])

    def bitstrings(self) -> list[str]:
        return [int_to_bits(r, self.n) for r in self.rows]

    def encode(self, info: int) -> int:
        word = 0
        for j, row in enumerate(self.rows):
            if info >> j & 1:
                word ^= row
        return word

    def __repr__(self) -> str:
        return f"LinearCode(n={self.n}, k={self.k}, rows={self.bitstrings()})"


def repetition(q: int) -> LinearCode:
    return LinearCode(((1 << q) - 1,), q)


def single_parity_check(s: int) -> LinearCode:
    """(s, s-1) SPC code with the systematic generator ``e_i + e_{s-1}``."""
    if s < 2:
        raise InvalidCodeError("SPC length must be at least 2")
    last = 1 << (s - 1)
    return LinearCode(tuple((1 << i) | last for i in range(s - 1)), s)


def hamming74() -> LinearCode:
    return LinearCode.from_bitstrings(["1000110", "0100101", "0010011", "0001111"])


def identity_code(n: int) -> LinearCode:
    return LinearCode(tuple(1 << i for i in range(n)), n)


@dataclass(frozen=True)
class WeightEnumerator:
    """Exact codeword counts ``A_0..A_n`` indexed by Hamming weight."""

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return max(u for u, a in enumerate(self.coeffs) if a)

    @property
    def min_distance(self) -> int:
        return min(u for u, a in enumerate(self.coeffs) if u > 0 and a)

    def __getitem__(self, u: int) -> int:
        return self.coeffs[u] if 0 <= u < len(self.coeffs) else 0

    def support(self) -> list[int]:
        return [u for u, a in enumerate(self.coeffs) if a]

    def __str__(self) -> str:
        terms = [str(a) if u == 0 else f"{'' if a == 1 else a}x^{u}" for u, a in enumerate(self.coeffs) if a]
        return " + ".join(terms)


@dataclass(frozen=True)
class IOWeightEnumerator:
    """Exact input/output weight counts ``B_{u,v}``; stored sparsely."""

    items: tuple[tuple[tuple[int, int], int], ...]
    k: int
    n: int
    _map: Mapping[tuple[int, int], int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_map", dict(self.items))

    @classmethod
    def from_mapping(cls, coeffs: Mapping[tuple[int, int], int], k: int, n: int) -> "IOWeightEnumerator":
        return cls(tuple(sorted((key, int(c)) for key, c in coeffs.items() if c)), k, n)

    @property
    def coeffs(self) -> Mapping[tuple[int, int], int]:
        return self._map

    def __getitem__(self, uv: tuple[int, int]) -> int:
        return self._map.get(uv, 0)

    def support(self) -> list[tuple[int, int]]:
        return [key for key, _ in self.items]

    def marginal(self) -> tuple[int, ...]:
        """Sum over input weight; equals the plain weight enumerator."""
        out = [0] * (self.n + 1)
        for (_, v), c in self.items:
            out[v] += c
        return tuple(out)

    @property
    def min_distance(self) -> int:
        return min(v for (_, v), _c in self.items if v > 0)

    def __str__(self) -> str:
        parts = []
        for (u, v), c in self.items:
            mono = "".join(s for s in (f"x^{u}" if u else "", f"y^{v}" if v else ""))
            parts.append(f"{c}" if not mono else f"{'' if c == 1 else c}{mono}")
        return " + ".join(parts)


def _check_capacity(code: LinearCode, max_k: int) -> None:
    if max_k > HARD_MAX_K:
        raise CapacityError(f"enumeration guard cannot exceed k={HARD_MAX_K}")
    if code.k > max_k:
        raise CapacityError(f"k={code.k} exceeds the enumeration guard k<={max_k}")
    if code.k > DEFAULT_MAX_K:
        warnings.warn(f"enumerating 2^{code.k} codewords; this may take very long", RuntimeWarning)


def _enumerate(code: LinearCode) -> tuple[np.ndarray, np.ndarray]:
    """All codewords (as uint64 bitmasks) with the input weight that produced each."""
    words = np.zeros(1, dtype=np.uint64)
    in_w = np.zeros(1, dtype=np.int64)
    for row in code.rows:
        words = np.concatenate([words, words ^ np.uint64(row)])
        in_w = np.concatenate([in_w, in_w + 1])
    return words, in_w


@functools.lru_cache(maxsize=256)
def _weight_enumerator(code: LinearCode) -> WeightEnumerator:
    words, _ = _enumerate(code)
    counts = np.bincount(np.bitwise_count(words).astype(np.int64), minlength=code.n + 1)
    return WeightEnumerator(tuple(int(c) for c in counts))


@functools.lru_cache(maxsize=256)
def _io_weight_enumerator(code: LinearCode) -> IOWeightEnumerator:
    words, in_w = _enumerate(code)
    out_w = np.bitwise_count(words).astype(np.int64)
    flat = np.bincount(in_w * (code.n + 1) + out_w, minlength=(code.k + 1) * (code.n + 1))
    table = {(int(i // (code.n + 1)), int(i % (code.n + 1))): int(c) for i, c in enumerate(flat) if c}
    return IOWeightEnumerator.from_mapping(table, code.k, code.n)


def weight_enumerator(code: LinearCode, max_k: int = DEFAULT_MAX_K) -> WeightEnumerator:
    _check_capacity(code, max_k)
    return _weight_enumerator(code)


def io_weight_enumerator(code: LinearCode, max_k: int = DEFAULT_MAX_K) -> IOWeightEnumerator:
    _check_capacity(code, max_k)
    return _io_weight_enumerator(code)


def min_distance(code: LinearCode, max_k: int = DEFAULT_MAX_K) -> int:
    return weight_enumerator(code, max_k).min_distance


def codeword_table(code: LinearCode) -> np.ndarray:
    """Boolean membership table of length ``2**n`` (used by the oracle samplers)."""
    if code.n > 24:
        raise CapacityError(f"membership table for n={code.n} is too large")
    words, _ = _enumerate(code)
    table = np.zeros(1 << code.n, dtype=bool)
    table[words.astype(np.int64)] = True
    return table
