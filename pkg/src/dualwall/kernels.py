"""Permutation and partial-permutation kernels.

A kernel over ``m`` rows and ``n`` columns is a model whose minimizers are
exactly the encodings of injections ``pi: [0, m) -> [0, n)``.

Matrix conventions (``hot`` is 1 for QUBO and +1 for Ising, ``cold`` is 0
or -1):

* ``X`` (``m x n``): one-hot rows, ``X[i, pi(i)]`` hot.
* ``A`` (``m x (n-1)``): row ``i`` is the domain wall of ``pi(i)``, so
  ``A[i, j]`` is hot for ``j < pi(i)``.  Guard columns ``A[i, -1] = hot`` and
  ``A[i, n-1] = cold``.
* ``B`` (``(m-1) x n``): column ``j`` is the domain wall of ``p(j)``, the
  row mapped to ``j``; guard rows ``B[-1, j] = hot`` and ``B[m-1, j] = cold``.

``dA[i, j] = A[i, j-1] - A[i, j]`` and ``dB[i, j] = B[i-1, j] - B[i, j]``
mark the single wall of each row of ``A`` and column of ``B``.  Variables are
numbered ``A`` row-major, then ``B`` row-major, then ``X`` row-major.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .bqm import ExpressionBuilder, Forms, Kind, QuadraticModel, VariableLayout, stats
from .errors import InconsistentDimensions, OutOfRange, UnsupportedCombination

HALF = Fraction(1, 2)


class Technique(str, Enum):
    ONE_HOT = "one-hot"
    ALL_DIFFERENT = "all-different"
    DUAL_MATRIX = "dual-matrix"
    EXTENDED = "extended"

    @classmethod
    def parse(cls, value: "Technique | str") -> "Technique":
        if isinstance(value, Technique):
            return value
        return cls(str(value).lower().replace("_", "-"))


@dataclass(frozen=True)
class PartialPermutation:
    """Injection ``i -> values[i]`` from ``[0, m)`` into ``[0, n)``."""

    m: int
    n: int
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.m:
            raise InconsistentDimensions(f"{len(vals)} values for m={self.m}")
        if not 0 <= self.m <= self.n:
            raise InconsistentDimensions(f"need 0 <= m <= n, got m={self.m}, n={self.n}")
        if any(not 0 <= v < self.n for v in vals):
            raise OutOfRange(f"values must lie in [0, {self.n})")
        if len(set(vals)) != len(vals):
            raise ValueError(f"values {vals} repeat an element")

    @classmethod
    def full(cls, values: Sequence[int]) -> "PartialPermutation":
        return cls(len(values), len(values), tuple(values))

    @property
    def is_full(self) -> bool:
        return self.m == self.n

    def inverse(self) -> list:
        """``inv[j]`` is the row mapped to ``j``, or ``None`` if ``j`` is unused."""
        inv: list = [None] * self.n
        for i, v in enumerate(self.values):
            inv[v] = i
        return inv

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return self.m


@dataclass(frozen=True)
class Infeasible:
    reason: str

    def __bool__(self) -> bool:
        return False


def _blocks(technique: Technique, m: int, n: int) -> list[tuple[str, int, int]]:
    if technique is Technique.ONE_HOT:
        return [("X", m, n)]
    if technique is Technique.ALL_DIFFERENT:
        return [("A", m, n - 1)]
    out = [("A", m, n - 1), ("B", m - 1, n)]
    if technique is Technique.EXTENDED:
        out.append(("X", m, n))
    return out


def _guards(technique: Technique, m: int, n: int, kind: Kind) -> dict:
    hot, cold = 1, kind.domain[0]
    g = {}
    if technique is Technique.ONE_HOT:
        return g
    for i in range(m):
        g[("A", i, -1)] = hot
        g[("A", i, n - 1)] = cold
    if technique is Technique.ALL_DIFFERENT:
        return g
    for j in range(n):
        g[("B", -1, j)] = hot
        g[("B", m - 1, j)] = cold
    return g


@dataclass(frozen=True, eq=False)
class KernelHandle:
    technique: Technique
    m: int
    n: int
    kind: Kind
    model: QuadraticModel
    layout: VariableLayout
    optimal_value: Fraction
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def is_full(self) -> bool:
        return self.m == self.n

    # -- index grids ------------------------------------------------------

    def grid(self, matrix: str) -> np.ndarray:
        """Variable indices of a whole matrix (no guard cells)."""
        key = ("grid", matrix)
        if key not in self._cache:
            rows, cols = {
                "X": (self.m, self.n),
                "A": (self.m, self.n - 1),
                "B": (self.m - 1, self.n),
            }[matrix]
            idx, _ = self.layout.grid(matrix, range(rows), range(cols))
            self._cache[key] = idx
        return self._cache[key]

    def delta_forms(self, matrix: str) -> Forms:
        """Row-major ``m x n`` batch of wall indicators ``dA`` or ``dB``."""
        key = ("delta", matrix)
        if key not in self._cache:
            self._cache[key] = _delta(self.layout, matrix, self.m, self.n)
        return self._cache[key]

    def stats(self, with_diameter: bool = True):
        return stats(self.model, with_diameter)

    # -- encode / decode --------------------------------------------------

    def encode(self, p) -> np.ndarray:
        return encode_permutation(self, p)

    def decode(self, assignment):
        return decode_permutation(self, assignment)


def _delta(layout: VariableLayout, matrix: str, m: int, n: int) -> Forms:
    if matrix == "A":
        idx, const = layout.grid("A", range(m), range(-1, n))
        prev = Forms.from_grid(idx[:, :-1], const[:, :-1])
        cur = Forms.from_grid(idx[:, 1:], const[:, 1:])
    else:
        idx, const = layout.grid("B", range(-1, m), range(n))
        prev = Forms.from_grid(idx[:-1, :], const[:-1, :])
        cur = Forms.from_grid(idx[1:, :], const[1:, :])
    return prev - cur


def build_kernel(technique: Technique | str, m: int, n: int, kind: Kind | str) -> KernelHandle:
    """Expand the kernel expression for ``technique`` with guard constants substituted."""
    technique = Technique.parse(technique)
    kind = Kind.parse(kind)
    m, n = int(m), int(n)
    if not 1 <= m <= n:
        raise InconsistentDimensions(f"need 1 <= m <= n, got m={m}, n={n}")
    full = m == n
    if technique is Technique.ALL_DIFFERENT and not full:
        raise UnsupportedCombination("all-different kernels only generate full permutations")
    layout = VariableLayout.from_blocks(_blocks(technique, m, n), _guards(technique, m, n, kind))
    b = ExpressionBuilder(kind, layout.num_vars)
    ising = kind is Kind.ISING
    build = {
        Technique.ONE_HOT: _one_hot,
        Technique.ALL_DIFFERENT: _all_different,
        Technique.DUAL_MATRIX: _dual_matrix,
        Technique.EXTENDED: _extended,
    }[technique]
    optimum = build(b, layout, m, n, ising)
    model = b.finalize(layout)
    return KernelHandle(technique, m, n, kind, model, layout, Fraction(optimum))


def _one_hot(b: ExpressionBuilder, layout: VariableLayout, m: int, n: int, ising: bool):
    idx, _ = layout.grid("X", range(m), range(n))
    rows = Forms.sums(idx)
    cols = Forms.sums(idx.T)
    if m == n:
        if ising:
            b.add_square(rows + (n - 2), scale=HALF)
            b.add_square(cols + (n - 2), scale=HALF)
        else:
            b.add_square(1 - rows, scale=HALF)
            b.add_square(1 - cols, scale=HALF)
        return 0
    # rows one-hot, columns zero-one-hot
    if ising:
        b.add_square(rows + (n - 2), scale=HALF)
        b.add_product(cols + m, cols + (m - 2), scale=HALF)
    else:
        b.add_square(1 - rows)
        b.add_product(cols, cols - 1, scale=HALF)
    return 0


def _all_different(b: ExpressionBuilder, layout: VariableLayout, m: int, n: int, ising: bool):
    da = _delta(layout, "A", m, n)
    b.add_square(da, scale=HALF)
    if n > 1:
        idx, _ = layout.grid("A", range(m), range(n - 1))
        cols = Forms.sums(idx.T)
        j = np.arange(n - 1)
        if ising:
            b.add_square(cols - (n - 2 * j - 2), scale=HALF)
        else:
            b.add_square(cols - (n - j - 1))
    return 2 * n if ising else HALF * n


def _dual_matrix(b: ExpressionBuilder, layout: VariableLayout, m: int, n: int, ising: bool):
    da = _delta(layout, "A", m, n)
    db = _delta(layout, "B", m, n)
    b.add_square(da, scale=HALF)
    b.add_square(db, scale=HALF)
    b.add_square(da - db, scale=HALF)
    return 4 * n if ising else n


def _extended(b: ExpressionBuilder, layout: VariableLayout, m: int, n: int, ising: bool):
    da = _delta(layout, "A", m, n)
    db = _delta(layout, "B", m, n)
    idx, const = layout.grid("X", range(m), range(n))
    x = Forms.from_grid(idx, const)
    if ising:
        x = x + 1  # s + 1 takes the values 0 and 2, like dA and dB
    b.add_square(da, scale=HALF)
    b.add_square(db, scale=HALF)
    if m == n:
        b.add_square(x - da, scale=HALF)
        b.add_square(x - db, scale=HALF)
        return 4 * n if ising else n
    b.add_square(x - da)
    b.add_product(x, (2 if ising else 1) - db)
    return 2 * m + 2 * n if ising else HALF * m + HALF * n


# --------------------------------------------------------------------------
# encode / decode


def _as_partial(handle: KernelHandle, p) -> PartialPermutation:
    if not isinstance(p, PartialPermutation):
        p = PartialPermutation(handle.m, handle.n, tuple(p))
    if (p.m, p.n) != (handle.m, handle.n):
        raise InconsistentDimensions(
            f"permutation is {p.m} of {p.n}, kernel is {handle.m} of {handle.n}"
        )
    return p


def canonical_inverse(p: PartialPermutation) -> list[int]:
    """Row index stored in column ``j`` of ``B``.

    Columns that no row maps to are free; they get ``m - 1``, an all-hot
    column whose wall sits on the bottom guard.
    """
    return [p.m - 1 if r is None else r for r in p.inverse()]


def encode_permutation(handle: KernelHandle, p) -> np.ndarray:
    """Assignment at which the kernel takes its optimal value."""
    p = _as_partial(handle, p)
    m, n = handle.m, handle.n
    cold = handle.kind.domain[0]
    out = np.full(handle.layout.num_vars, cold, dtype=np.int8)
    pi = np.asarray(p.values, dtype=np.int64)
    t = handle.technique
    if t in (Technique.ONE_HOT, Technique.EXTENDED):
        out[handle.grid("X")[np.arange(m), pi]] = 1
    if t is not Technique.ONE_HOT and n > 1:
        a = handle.grid("A")
        hot = np.arange(n - 1)[None, :] < pi[:, None]
        out[a[hot]] = 1
    if t in (Technique.DUAL_MATRIX, Technique.EXTENDED) and m > 1:
        inv = np.asarray(canonical_inverse(p), dtype=np.int64)
        bgrid = handle.grid("B")
        hot = np.arange(m - 1)[:, None] < inv[None, :]
        out[bgrid[hot]] = 1
    return out


def _walls(bits: np.ndarray, axis: int) -> tuple[np.ndarray | None, np.ndarray]:
    """Wall positions of domain-wall rows (axis=1) or columns (axis=0).

    ``bits`` is boolean (hot) without guards.  Returns (positions or None,
    extended difference matrix).
    """
    if axis == 0:
        pos, diff = _walls(bits.T, 1)
        return pos, diff.T
    r = bits.shape[0]
    ext = np.hstack([np.ones((r, 1), bool), bits, np.zeros((r, 1), bool)]).astype(np.int8)
    diff = ext[:, :-1] - ext[:, 1:]
    ok = (diff >= 0).all(axis=1)
    if not ok.all():
        return None, diff
    return diff.argmax(axis=1), diff


def decode_permutation(handle: KernelHandle, assignment):
    """Partial permutation encoded by ``assignment``, or :class:`Infeasible`."""
    v = np.asarray(assignment)
    if v.shape != (handle.layout.num_vars,):
        raise InconsistentDimensions(
            f"assignment has shape {v.shape}, expected ({handle.layout.num_vars},)"
        )
    hot = v == 1
    m, n = handle.m, handle.n
    t = handle.technique
    if t is Technique.ONE_HOT:
        x = hot[handle.grid("X")]
        per_row = x.sum(axis=1)
        if (per_row != 1).any():
            return Infeasible(f"row {int(np.argmax(per_row != 1))} of X is not one-hot")
        per_col = x.sum(axis=0)
        limit_bad = per_col != 1 if m == n else per_col > 1
        if limit_bad.any():
            return Infeasible(f"column {int(np.argmax(limit_bad))} of X has {int(per_col[np.argmax(limit_bad)])} hot cells")
        return PartialPermutation(m, n, tuple(int(c) for c in x.argmax(axis=1)))

    a = hot[handle.grid("A")].reshape(m, n - 1)
    pi, da = _walls(a, 1)
    if pi is None:
        return Infeasible("row domain-wall condition fails in A")
    if t is Technique.ALL_DIFFERENT:
        if len(set(pi.tolist())) != m:
            return Infeasible("rows of A repeat a value")
        return PartialPermutation(m, n, tuple(int(c) for c in pi))

    bmat = hot[handle.grid("B")].reshape(m - 1, n)
    p, db = _walls(bmat, 0)
    if p is None:
        return Infeasible("column domain-wall condition fails in B")
    if (da > db).any():
        return Infeasible("dual-permutation condition fails: A and B disagree")
    if m == n and (da != db).any():
        return Infeasible("dual-permutation condition fails: B is not the inverse of A")
    if t is Technique.EXTENDED:
        x = hot[handle.grid("X")].astype(np.int8)
        if (x != da).any():
            return Infeasible("X is not the wall matrix of A")
    return PartialPermutation(m, n, tuple(int(c) for c in pi))


def is_feasible(handle: KernelHandle, assignment) -> bool:
    return not isinstance(decode_permutation(handle, assignment), Infeasible)


# --------------------------------------------------------------------------
# statistics table

TABLE_COLUMNS = (
    "technique", "kind", "m", "n", "vars", "linear_count", "linear_coeffs",
    "quad_count", "quad_coeffs", "diameter", "offset", "predicted_quad", "match",
)


def kernel_stats_table(
    techniques: Iterable[Technique | str],
    kind: Kind | str,
    sizes: Iterable[tuple[int, int]],
    with_diameter: bool = True,
) -> list[dict]:
    """Measured statistics against closed-form predictions, one row per kernel."""
    from .tables import kernel_prediction

    kind = Kind.parse(kind)
    rows = []
    for tech in techniques:
        tech = Technique.parse(tech)
        for m, n in sizes:
            if tech is Technique.ALL_DIFFERENT and m != n:
                continue
            handle = build_kernel(tech, m, n, kind)
            s = handle.stats(with_diameter)
            pred = kernel_prediction(tech, m, n, kind)
            diff = pred.compare(s)
            rows.append(
                {
                    "technique": tech.value,
                    "kind": kind.value,
                    "m": m,
                    "n": n,
                    "vars": s.num_vars,
                    "linear_count": s.linear_term_count,
                    "linear_coeffs": ",".join(map(str, s.linear_coeff_set)),
                    "quad_count": s.quadratic_term_count,
                    "quad_coeffs": ",".join(map(str, s.quadratic_coeff_set)),
                    "diameter": s.diameter,
                    "offset": s.offset,
                    "predicted_quad": pred.quadratic_term_count,
                    "match": not diff,
                }
            )
    return rows


def format_tsv(rows: list[dict], columns: Sequence[str] = TABLE_COLUMNS) -> str:
    lines = ["\t".join(columns)]
    for row in rows:
        lines.append("\t".join(str(row[c]).lower() if isinstance(row[c], bool) else str(row[c]) for c in columns))
    return "\n".join(lines) + "\n"
