"""Decoder monomials over encoder outputs and their count.

A decoder variable is ``x^(m)_i``: the encoder output of order ``m`` for mode
``i``; its weight is ``m``. A monomial multiplies at most three distinct
variables, each raised to a positive power ``j``, with total weight
``sum j*m <= L``. The constant term is always present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EULER_GAMMA = 0.5772156649
MAX_FACTORS = 3

# (mode i, order m, exponent j)
Factor = tuple[int, int, int]
Monomial = tuple[Factor, ...]


def _variables(d_x: int, L: int) -> list[tuple[int, int]]:
    return [(i, m) for m in range(1, L + 1) for i in range(d_x)]


@lru_cache(maxsize=None)
def enumerate_monomials(d_x: int, L: int) -> tuple[Monomial, ...]:
    """All admissible monomials, constant (empty tuple) last.

    Ordered by total weight, then by number of factors, then by factor tuple.
    """
    if d_x < 1 or L < 1:
        raise ValueError(f"need d_x >= 1 and L >= 1, got d_x={d_x}, L={L}")
    vars_ = _variables(d_x, L)
    out: list[Monomial] = []

    def extend(start: int, budget: int, acc: list[Factor]):
        if acc:
            out.append(tuple(acc))
        if len(acc) == MAX_FACTORS:
            return
        for v in range(start, len(vars_)):
            i, m = vars_[v]
            for j in range(1, budget // m + 1):
                acc.append((i, m, j))
                extend(v + 1, budget - j * m, acc)
                acc.pop()

    extend(0, L, [])
    out.sort(key=lambda mono: (monomial_weight(mono), len(mono), sorted(mono)))
    out.append(())
    return tuple(out)


def monomial_weight(mono: Monomial) -> int:
    return sum(m * j for _, m, j in mono)


def decoder_term_count(d_x: int, L: int) -> int:
    return len(enumerate_monomials(d_x, L))


def harmonic_floor_sum(L: int) -> int:
    return sum(L // m for m in range(1, L + 1))


def effective_order(L: int) -> float:
    """L ln L + L gamma, the large-L estimate of sum_m floor(L/m)."""
    return L * math.log(L) + L * EULER_GAMMA


def parameter_bound(d_x: int, L: int) -> float:
    """Upper estimate 1 + (d_x Lt / 36) (35 + d_x^2 Lt^2) with Lt = L ln L + L gamma."""
    lt = effective_order(L)
    return 1.0 + d_x * lt / 36.0 * (35.0 + d_x**2 * lt**2)


def bound_applies(L: int) -> bool:
    """The estimate replaces sum_m floor(L/m) by L ln L + L gamma, which is only
    an upper bound when that replacement does not undercount."""
    return harmonic_floor_sum(L) <= effective_order(L)


@dataclass(frozen=True)
class DecoderBasis:
    d_x: int
    L: int

    @property
    def monomials(self) -> tuple[Monomial, ...]:
        return enumerate_monomials(self.d_x, self.L)

    def __len__(self) -> int:
        return len(self.monomials)

    def index_of(self, mono) -> int:
        key = tuple(sorted(tuple(f) for f in mono))
        for t, cand in enumerate(self.monomials):
            if tuple(sorted(cand)) == key:
                return t
        raise KeyError(f"monomial {mono} not in basis (d_x={self.d_x}, L={self.L})")

    @property
    def n_vars(self) -> int:
        return self.d_x * self.L

    def var_index(self, mode: int, order: int) -> int:
        # flattened position of x^(order)_mode in an (L, d_x) array
        return (order - 1) * self.d_x + mode

    def slots(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-monomial variable indices and exponents, padded to three slots.

        Padding points at an extra variable fixed to 1 (index ``n_vars``).
        """
        return _slots(self.d_x, self.L)

    def describe(self) -> list[list[list[int]]]:
        return [[list(f) for f in mono] for mono in self.monomials]


@lru_cache(maxsize=None)
def _slots(d_x: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    monos = enumerate_monomials(d_x, L)
    pad = d_x * L
    var = np.full((len(monos), MAX_FACTORS), pad, dtype=np.int64)
    exp = np.ones((len(monos), MAX_FACTORS), dtype=np.int64)
    for t, mono in enumerate(monos):
        for s, (i, m, j) in enumerate(mono):
            var[t, s] = (m - 1) * d_x + i
            exp[t, s] = j
    var.flags.writeable = False
    exp.flags.writeable = False
    return var, exp
