"""The particle placement problem and its composition with permutation kernels.

Placing particle ``i`` at position ``pi(i)`` costs the potential
``P[i, pi(i)]``, and each pair of particles ``i < i'`` adds the interaction
``I[i, pi(i), i', pi(i')]``.  Interactions are keyed by *canonical quartets*
``(i, j, i', j')`` with ``i < i'`` and ``j != j'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .bqm import ExpressionBuilder, Forms, Kind, QuadraticModel
from .errors import DimensionMismatch, UnsupportedCombination, UnsupportedTarget
from .kernels import (
    Infeasible,
    KernelHandle,
    PartialPermutation,
    Technique,
    build_kernel,
    decode_permutation,
    encode_permutation,
)
from .solvers import Solution

AUTO = "auto"


def _coalesce_rows(keys: np.ndarray, values: np.ndarray, radix: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Sum values of identical key rows; drop zero sums; sort lexicographically.

    Rows are packed into one int64 per key using the mixed ``radix``.
    """
    if keys.shape[0] == 0:
        return keys, values
    packed = np.zeros(keys.shape[0], dtype=np.int64)
    for col, r in enumerate(radix):
        packed = packed * r + keys[:, col]
    uniq, inverse = np.unique(packed, return_inverse=True)
    sums = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(sums, inverse.ravel(), values)
    keep = sums != 0
    uniq, sums = uniq[keep], sums[keep]
    out = np.empty((uniq.size, len(radix)), dtype=np.int64)
    for col in range(len(radix) - 1, -1, -1):
        uniq, out[:, col] = np.divmod(uniq, radix[col])
    return out, sums


class PPPInstance:
    """Sparse PPP instance with integer potentials and interactions.

    Repeated keys accumulate.  Quartets with ``i > i'`` are folded onto their
    canonical ``(i', j', i, j)`` form; quartets with ``i == i'`` or
    ``j == j'`` lie outside the instance and are rejected.
    """

    def __init__(
        self,
        m: int,
        n: int,
        potentials: Mapping[tuple[int, int], int] | None = None,
        interactions: Mapping[tuple[int, int, int, int], int] | None = None,
    ):
        pot = list((potentials or {}).items())
        inter = list((interactions or {}).items())
        p_keys = np.array([k for k, _ in pot], dtype=np.int64).reshape(-1, 2)
        p_vals = np.array([v for _, v in pot], dtype=np.int64)
        i_keys = np.array([k for k, _ in inter], dtype=np.int64).reshape(-1, 4)
        i_vals = np.array([v for _, v in inter], dtype=np.int64)
        self._init(m, n, p_keys, p_vals, i_keys, i_vals)

    @classmethod
    def from_arrays(
        cls,
        m: int,
        n: int,
        potentials: tuple[np.ndarray, np.ndarray] | None = None,
        interactions: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> "PPPInstance":
        """``potentials = (keys[K, 2], values[K])``, ``interactions = (keys[K, 4], values[K])``."""
        self = object.__new__(cls)
        pk, pv = potentials if potentials is not None else (np.zeros((0, 2)), np.zeros(0))
        ik, iv = interactions if interactions is not None else (np.zeros((0, 4)), np.zeros(0))
        self._init(
            m,
            n,
            np.asarray(pk, dtype=np.int64).reshape(-1, 2),
            np.asarray(pv, dtype=np.int64).ravel(),
            np.asarray(ik, dtype=np.int64).reshape(-1, 4),
            np.asarray(iv, dtype=np.int64).ravel(),
        )
        return self

    def _init(self, m, n, p_keys, p_vals, i_keys, i_vals):
        m, n = int(m), int(n)
        if not 0 <= m <= n:
            raise DimensionMismatch(f"need 0 <= m <= n, got m={m}, n={n}")
        self.m, self.n = m, n
        if p_keys.shape[0] != p_vals.shape[0] or i_keys.shape[0] != i_vals.shape[0]:
            raise DimensionMismatch("keys and values differ in length")
        if p_keys.size and (
            (p_keys[:, 0] < 0).any() or (p_keys[:, 0] >= m).any()
            or (p_keys[:, 1] < 0).any() or (p_keys[:, 1] >= n).any()
        ):
            raise DimensionMismatch(f"potential key outside {m} x {n}")
        if i_keys.size:
            rows_ok = (i_keys[:, [0, 2]] >= 0).all() and (i_keys[:, [0, 2]] < m).all()
            cols_ok = (i_keys[:, [1, 3]] >= 0).all() and (i_keys[:, [1, 3]] < n).all()
            if not (rows_ok and cols_ok):
                raise DimensionMismatch(f"interaction key outside {m} x {n}")
            if (i_keys[:, 0] == i_keys[:, 2]).any() or (i_keys[:, 1] == i_keys[:, 3]).any():
                raise DimensionMismatch("interaction quartet repeats a particle or a position")
            swap = i_keys[:, 0] > i_keys[:, 2]
            i_keys = i_keys.copy()
            i_keys[swap] = i_keys[swap][:, [2, 3, 0, 1]]
        self._pk, self._pv = _coalesce_rows(p_keys, p_vals, (max(m, 1), max(n, 1)))
        self._ik, self._iv = _coalesce_rows(i_keys, i_vals, (max(m, 1), max(n, 1)) * 2)
        for a in (self._pk, self._pv, self._ik, self._iv):
            a.flags.writeable = False

    # -- views ------------------------------------------------------------

    @property
    def potentials(self) -> dict[tuple[int, int], int]:
        return {(int(i), int(j)): int(v) for (i, j), v in zip(self._pk, self._pv)}

    @property
    def interactions(self) -> dict[tuple[int, int, int, int], int]:
        return {tuple(int(x) for x in k): int(v) for k, v in zip(self._ik, self._iv)}

    @property
    def potential_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._pk, self._pv

    @property
    def interaction_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._ik, self._iv

    @property
    def num_potentials(self) -> int:
        return int(self._pv.size)

    @property
    def num_interactions(self) -> int:
        return int(self._iv.size)

    @property
    def abs_total(self) -> int:
        """``sum |P| + sum |I|``."""
        return int(np.abs(self._pv).sum()) + int(np.abs(self._iv).sum())

    def potential_matrix(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.int64)
        if self._pv.size:
            out[self._pk[:, 0], self._pk[:, 1]] = self._pv
        return out

    def interaction_blocks(self) -> dict[tuple[int, int], np.ndarray]:
        """``{(i, i'): n x n matrix of I[i, :, i', :]}`` for particle pairs with interactions."""
        blocks: dict[tuple[int, int], np.ndarray] = {}
        for (i, j, ip, jp), v in zip(self._ik.tolist(), self._iv.tolist()):
            mat = blocks.get((i, ip))
            if mat is None:
                mat = blocks[(i, ip)] = np.zeros((self.n, self.n), dtype=np.int64)
            mat[j, jp] = v
        return blocks

    def __eq__(self, other) -> bool:
        if not isinstance(other, PPPInstance):
            return NotImplemented
        return (
            (self.m, self.n) == (other.m, other.n)
            and np.array_equal(self._pk, other._pk)
            and np.array_equal(self._pv, other._pv)
            and np.array_equal(self._ik, other._ik)
            and np.array_equal(self._iv, other._iv)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"PPPInstance(m={self.m}, n={self.n}, potentials={self.num_potentials}, "
            f"interactions={self.num_interactions})"
        )


def quartet_count(m: int, n: int) -> int:
    """Size of the canonical quartet set: pairs of rows times ordered pairs of distinct columns."""
    return m * (m - 1) // 2 * n * (n - 1)


def _as_perm(inst: PPPInstance, p) -> tuple[int, ...]:
    if isinstance(p, PartialPermutation):
        if (p.m, p.n) != (inst.m, inst.n):
            raise DimensionMismatch(f"permutation is {p.m} of {p.n}, instance is {inst.m} of {inst.n}")
        return p.values
    values = tuple(int(v) for v in p)
    if len(values) != inst.m:
        raise DimensionMismatch(f"{len(values)} values for m={inst.m}")
    PartialPermutation(inst.m, inst.n, values)
    return values


def ppp_value(inst: PPPInstance, p) -> int:
    """Total potential plus interaction energy of a placement."""
    pi = _as_perm(inst, p)
    total = 0
    if inst.num_potentials:
        pk, pv = inst.potential_arrays
        hit = np.asarray(pi, dtype=np.int64)[pk[:, 0]] == pk[:, 1]
        total += int(pv[hit].sum())
    if inst.num_interactions:
        ik, iv = inst.interaction_arrays
        arr = np.asarray(pi, dtype=np.int64)
        hit = (arr[ik[:, 0]] == ik[:, 1]) & (arr[ik[:, 2]] == ik[:, 3])
        total += int(iv[hit].sum())
    return total


# --------------------------------------------------------------------------
# objective terms


class Target(str, Enum):
    ONE_HOT_MATRIX = "one-hot-matrix"
    DELTA_A = "delta-a"


DEFAULT_TARGET = {
    Technique.ONE_HOT: Target.ONE_HOT_MATRIX,
    Technique.EXTENDED: Target.ONE_HOT_MATRIX,
    Technique.DUAL_MATRIX: Target.DELTA_A,
    Technique.ALL_DIFFERENT: Target.DELTA_A,
}


def _indicators(handle: KernelHandle, target: Target) -> tuple[Forms, int]:
    """Placement indicators for every cell ``(i, j)`` (row-major) and their hot value."""
    g = 2 if handle.kind is Kind.ISING else 1
    if target is Target.ONE_HOT_MATRIX:
        if handle.technique not in (Technique.ONE_HOT, Technique.EXTENDED):
            raise UnsupportedTarget(f"{handle.technique.value} kernels have no one-hot matrix")
        idx = handle.grid("X").ravel()
        forms = Forms.from_grid(idx, np.zeros_like(idx))
        if g == 2:
            forms = forms + 1  # s + 1
        return forms, g
    if handle.technique not in (Technique.DUAL_MATRIX, Technique.ALL_DIFFERENT):
        raise UnsupportedTarget(f"wall-matrix objectives need a dual-matrix or all-different kernel, got {handle.technique.value}")
    return handle.delta_forms("A"), g


def _add_objective(b: ExpressionBuilder, inst: PPPInstance, handle: KernelHandle, target: Target) -> int:
    if (inst.m, inst.n) != (handle.m, handle.n):
        raise DimensionMismatch(f"instance is {inst.m} of {inst.n}, kernel is {handle.m} of {handle.n}")
    ind, g = _indicators(handle, target)
    n = handle.n
    pk, pv = inst.potential_arrays
    if pv.size:
        # potentials carry one extra factor g so every term scales by g^2
        b.add_forms(ind[pk[:, 0] * n + pk[:, 1]], weight=pv * g)
    ik, iv = inst.interaction_arrays
    if iv.size:
        b.add_product(ind[ik[:, 0] * n + ik[:, 1]], ind[ik[:, 2] * n + ik[:, 3]], weight=iv)
    return g * g


def objective_terms(
    inst: PPPInstance, handle: KernelHandle, target: Target | str | None = None
) -> QuadraticModel:
    """The PPP objective as a model over ``handle``'s variables.

    With QUBO kernels a feasible assignment evaluates to ``PPP(pi)``; with
    Ising kernels every indicator is 0 or 2, so it evaluates to ``4 PPP(pi)``.
    """
    target = DEFAULT_TARGET[handle.technique] if target is None else Target(target)
    b = ExpressionBuilder(handle.kind, handle.layout.num_vars)
    _add_objective(b, inst, handle, target)
    return b.finalize(handle.layout)


# --------------------------------------------------------------------------
# composition


def default_lambda(inst: PPPInstance, kind: Kind | str = Kind.QUBO) -> int:
    """Penalty weight that keeps every infeasible state above the feasible optimum.

    Kernel energies of one model differ by integers (QUBO) or even integers
    (Ising), while the objective spans at most ``2 S`` (QUBO) or ``8 S``
    (Ising) with ``S = sum |P| + sum |I|``.
    """
    s = inst.abs_total
    return 2 * s + 1 if Kind.parse(kind) is Kind.QUBO else 4 * s + 1


@dataclass(frozen=True, eq=False)
class EncodedProblem:
    """``model = lam * kernel + objective``; feasible energies are ``lam * opt + c * PPP + d``."""

    kernel: KernelHandle
    lam: int
    model: QuadraticModel
    target: Target
    c: int
    d: Fraction
    instance: Optional[PPPInstance] = None

    @property
    def feasible_floor(self) -> Fraction:
        return self.lam * self.kernel.optimal_value + self.d

    def encode(self, p) -> np.ndarray:
        return encode_permutation(self.kernel, p)

    def decode(self, assignment) -> Solution:
        return decode_solution(self, assignment)


def compose(
    inst: PPPInstance,
    technique: Technique | str,
    kind: Kind | str,
    lam: Union[int, str] = AUTO,
    target: Target | str | None = None,
) -> EncodedProblem:
    technique = Technique.parse(technique)
    kind = Kind.parse(kind)
    if technique is Technique.ALL_DIFFERENT and inst.m < inst.n:
        raise UnsupportedCombination("all-different kernels only generate full permutations")
    if inst.m < 1:
        raise UnsupportedCombination("an instance needs at least one particle")
    if lam == AUTO or lam is None:
        lam = default_lambda(inst, kind)
    lam = int(lam)
    if lam < 1:
        raise ValueError("penalty weight must be a positive integer")
    target = DEFAULT_TARGET[technique] if target is None else Target(target)
    handle = build_kernel(technique, inst.m, inst.n, kind)
    b = ExpressionBuilder(kind, handle.layout.num_vars)
    b.add_model(handle.model, scale=lam)
    c = _add_objective(b, inst, handle, target)
    model = b.finalize(handle.layout)
    return EncodedProblem(handle, lam, model, target, c, Fraction(0), inst)


def decode_solution(enc: EncodedProblem, assignment, meta: dict | None = None) -> Solution:
    x = np.asarray(assignment)
    energy = enc.model.energy(x)
    decoded = decode_permutation(enc.kernel, x)
    if isinstance(decoded, Infeasible):
        return Solution(x, energy, feasible=False, meta={"reason": decoded.reason, **(meta or {})})
    objective = (energy - enc.lam * enc.kernel.optimal_value - enc.d) / enc.c
    return Solution(x, energy, feasible=True, decoded=decoded, objective=objective, meta=dict(meta or {}))
