"""Closed-form predictions for model statistics.

Each predictor returns a :class:`Prediction` whose fields are the published
closed forms evaluated at the requested size.  Where a published formula
disagrees with the expansion of its own defining expression, ``errata`` maps
the field name to the expanded value; :meth:`Prediction.corrected` applies
them.  ``prose`` holds competing values quoted elsewhere for the same cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction as F

from .bqm import Kind, ModelStats

HALF = F(1, 2)


@dataclass(frozen=True)
class Prediction:
    num_vars: int
    linear_term_count: int
    linear_coeff_set: frozenset
    quadratic_term_count: int
    quadratic_coeff_set: frozenset
    diameter: int
    offset: F
    optimum: F
    errata: dict = field(default_factory=dict)
    prose: dict = field(default_factory=dict)

    def corrected(self) -> "Prediction":
        return replace(self, errata={}, **self.errata)

    def compare(self, s: ModelStats) -> dict[str, tuple]:
        """Fields where ``s`` differs from the prediction, as (predicted, measured)."""
        measured = {
            "num_vars": s.num_vars,
            "linear_term_count": s.linear_term_count,
            "linear_coeff_set": frozenset(s.linear_coeff_set),
            "quadratic_term_count": s.quadratic_term_count,
            "quadratic_coeff_set": frozenset(s.quadratic_coeff_set),
            "offset": s.offset,
        }
        if s.diameter is not None:
            measured["diameter"] = s.diameter
        return {
            key: (getattr(self, key), value)
            for key, value in measured.items()
            if getattr(self, key) != value
        }


def _p(vars_, lc, lset, qc, qset, diam, offset, opt, errata=None, prose=None) -> Prediction:
    return Prediction(
        int(vars_),
        int(lc),
        frozenset(int(v) for v in lset),
        int(qc),
        frozenset(int(v) for v in qset),
        int(diam),
        F(offset),
        F(opt),
        errata or {},
        prose or {},
    )


def vector_prediction(scheme: str, k: int, kind: Kind | str) -> Prediction:
    """Statistics of the single-vector models for ``k >= 2``."""
    from .encodings import Scheme

    scheme = Scheme.parse(scheme)
    kind = Kind.parse(kind)
    pairs = k * (k - 1) // 2
    if kind is Kind.QUBO:
        if scheme is Scheme.ONE_HOT:
            return _p(k, k, {-1}, pairs, {2}, 1, 1, 0)
        if scheme is Scheme.ZERO_ONE_HOT:
            return _p(k, 0, set(), pairs, {1}, 1, 0, 0)
        return _p(k, k - 1, {1}, k - 1, {-1}, k - 1, HALF, HALF)
    if scheme is Scheme.ONE_HOT:
        # at k = 2 the coefficient k - 2 vanishes and zero terms are not stored
        errata = {"linear_term_count": 0, "linear_coeff_set": frozenset()} if k == 2 else None
        return _p(k, k, {k - 2}, pairs, {1}, 1, F(k * k, 2) - F(3 * k, 2) + 2, 0, errata)
    if scheme is Scheme.ZERO_ONE_HOT:
        return _p(k, k, {k - 1}, pairs, {1}, 1, F(k * k - k, 2), 0)
    return _p(k, 2, {-1, 1}, k - 1, {-1}, k - 1, k + 1, 2)


def kernel_prediction(technique, m: int, n: int, kind: Kind | str) -> Prediction:
    """Statistics of a permutation kernel (``m == n``) or partial kernel (``m < n``).

    Valid for ``n >= 3`` in the full case and ``2 <= m < n`` in the partial case;
    smaller sizes hit boundary effects (empty coefficient sets, collapsed
    diameters) that the closed forms do not describe.
    """
    from .kernels import Technique

    t = Technique.parse(technique)
    kind = Kind.parse(kind)
    if m == n:
        return _full(t, n, kind)
    return _partial(t, m, n, kind)


def _full(t, n: int, kind: Kind) -> Prediction:
    from .kernels import Technique

    q = kind is Kind.QUBO
    if t is Technique.ONE_HOT:
        if q:
            return _p(n * n, n * n, {-1}, n**3 - n**2, {1}, 2, n, 0)
        return _p(n * n, n * n, {2 * n - 4}, n**3 - n**2, {1}, 2, n**3 - 3 * n**2 + 4 * n, 0)
    if t is Technique.ALL_DIFFERENT:
        quad = F(n**3, 2) - F(3 * n, 2)
        if q:
            printed = F(n**3, 3) - F(n**2, 2) - 2 * n
            expanded = F(n**3, 3) - F(n**2, 2) + F(2 * n, 3)
            lset = _all_different_qubo_linear(n)
            # the published offset lies below the optimum; the expansion gives
            # n/2 from the wall guards plus sum_{t<n} t^2
            return _p(
                n * n - n, n * n - 2 * n, lset, quad, {-1, 2}, n - 1,
                printed, HALF * n, {"offset": expanded},
            )
        lcount = n * n + n * (n % 2) - 2 * n
        lset = _all_different_ising_linear(n)
        return _p(
            n * n - n, lcount, lset, quad, {-1, 1}, n - 1,
            F(n**3, 6) + n * n - F(n, 6), 2 * n,
        )
    if t is Technique.DUAL_MATRIX:
        quad = 6 * n * n - 12 * n + 4
        if q:
            return _p(2 * n * n - 2 * n, 2 * n * n - 4 * n, {2}, quad, {-2, -1, 1}, 2 * n - 3, 2 * n - 1, n)
        return _p(2 * n * n - 2 * n, 4 * n, {-2, 2}, quad, {-2, -1, 1}, 2 * n - 3, 4 * n * n - 4, 4 * n)
    quad = 6 * n * n - 8 * n
    if q:
        return _p(3 * n * n - 2 * n, 3 * n * n - 6 * n + 2, {-1, 1, 2}, quad, {-2, -1, 1}, 2 * n, 2 * n, n)
    return _p(3 * n * n - 2 * n, n * n + 4 * n - 4, {-2, 1, 2}, quad, {-2, -1, 1}, 2 * n, 6 * n * n - 4 * n, 4 * n)


def _all_different_qubo_linear(n: int) -> set[int]:
    # first column -(2n-3); inner columns -2(n-j-2); the last column cancels to 0
    return {-(2 * n - 3)} | {-2 * t for t in range(1, n - 2)}


def _all_different_ising_linear(n: int) -> set[int]:
    # column j carries -(n-2j-2); the guards shift the outer columns by one
    out = set()
    for j in range(n - 1):
        c = -(n - 2 * j - 2)
        if j == 0:
            c -= 1
        if j == n - 2:
            c += 1
        if c:
            out.add(c)
    return out


def _partial(t, m: int, n: int, kind: Kind) -> Prediction:
    from .kernels import Technique

    q = kind is Kind.QUBO
    if t is Technique.ONE_HOT:
        quad = F(m * m * n + m * n * n, 2) - m * n
        if q:
            return _p(m * n, m * n, {-1}, quad, {1, 2}, 2, m, 0)
        offset = F(m * m * n + m * n * n, 2) - 2 * m * n + 2 * m
        return _p(m * n, m * n, {m + n - 3}, quad, {1}, 2, offset, 0)
    if t is Technique.DUAL_MATRIX:
        bits = 2 * m * n - m - n
        quad = 6 * m * n - 6 * m - 6 * n + 4
        prose = {"quadratic_term_count": 6 * m * n - 4 * m - 4 * n}
        # with m = 2, B is a single row touching both guard rows: their
        # contributions cancel in the Ising linear terms and the row-to-row
        # path through B is one step longer
        errata = {"diameter": m + n - 2} if m == 2 else {}
        if q:
            return _p(
                bits, 2 * m * n - 2 * m - 2 * n, {2}, quad, {-2, -1, 1}, m + n - 3, m + n - 1, n,
                errata, prose,
            )
        if m == 2:
            errata["linear_term_count"] = 2 * m
        return _p(
            bits, 2 * m + 2 * n, {-2, 2}, quad, {-2, -1, 1}, m + n - 3, 4 * m * n - 4, 4 * n,
            errata, prose,
        )
    bits = 3 * m * n - m - n
    quad = 6 * m * n - 4 * m - 4 * n
    if q:
        return _p(
            bits, 3 * m * n - 3 * m - 2 * n + 1, {-1, 1, 2, 3}, quad, {-3, -2, -1, 1, 2}, m + n,
            F(3 * m, 2) + F(n, 2), F(m, 2) + F(n, 2),
        )
    # with m = 2 every cell of S sits next to both guard rows of B, whose
    # constants cancel its linear coefficient
    errata = {"linear_term_count": 2 * m + 2 * n, "linear_coeff_set": frozenset({-3, 1, 3})} if m == 2 else None
    return _p(
        bits, m * n + 2 * m + 2 * n, {-3, -1, 1, 2, 3, 4}, quad, {-3, -2, -1, 1, 2}, m + n,
        8 * m * n - 4 * m - 2 * n, 2 * m + 2 * n, errata,
    )
