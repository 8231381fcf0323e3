"""Exact integer-coefficient QUBO / Ising models.

A :class:`QuadraticModel` stores

.. math::

    E(v) = \\sum_{i<j} q_{i,j} v_i v_j + \\sum_i l_i v_i + C

with integer ``q`` and ``l`` and a rational offset ``C``; ``v`` ranges over
``{0, 1}`` (QUBO) or ``{-1, +1}`` (Ising).  Models are produced by an
:class:`ExpressionBuilder`, which expands sums of squares and products of
affine forms while applying ``x*x = x`` or ``s*s = 1``.

Coefficient storage is columnar numpy (sorted index arrays plus int64
values) so that models with tens of millions of quadratic terms fit in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph  # noqa: F401

from .errors import (
    DomainMismatch,
    LabelCollision,
    LengthMismatch,
    NonIntegerCoefficient,
)

Rational = Union[int, Fraction]

# |coefficient mass| ceiling; keeps every int64 partial sum exact
_LIMIT = 2**62


class Kind(str, Enum):
    QUBO = "qubo"
    ISING = "ising"

    @property
    def domain(self) -> tuple[int, int]:
        """(cold, hot) variable values."""
        return (0, 1) if self is Kind.QUBO else (-1, 1)

    @property
    def other(self) -> "Kind":
        return Kind.ISING if self is Kind.QUBO else Kind.QUBO

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        return cls(str(value).lower())


# --------------------------------------------------------------------------
# variable layout


class Label(NamedTuple):
    matrix: str
    row: int
    col: int


MATRIX_IDS = ("A", "B", "X", "FLAT")


class VariableLayout:
    """Bijection between structured labels and variable indices.

    ``guards`` maps labels that are *not* variables (out-of-range cells such as
    ``a[i, -1]``) to the constant value they take in the expansion.
    """

    def __init__(self, labels: Iterable[Sequence], guards: Mapping[Sequence, int] | None = None):
        self._labels = tuple(Label(str(m), int(r), int(c)) for m, r, c in labels)
        self._index: dict[Label, int] = {}
        for i, label in enumerate(self._labels):
            if label.matrix not in MATRIX_IDS:
                raise ValueError(f"unknown matrix id {label.matrix!r}")
            if label in self._index:
                raise LabelCollision(f"duplicate label {label}")
            self._index[label] = i
        self._guards: dict[Label, int] = {}
        for key, value in (guards or {}).items():
            label = Label(str(key[0]), int(key[1]), int(key[2]))
            if label in self._index:
                raise LabelCollision(f"guard {label} is also a variable")
            self._guards[label] = int(value)

    @classmethod
    def flat(cls, k: int, guards: Mapping[Sequence, int] | None = None) -> "VariableLayout":
        return cls([("FLAT", 0, j) for j in range(k)], guards)

    @classmethod
    def from_blocks(
        cls, blocks: Sequence[tuple[str, int, int]], guards: Mapping[Sequence, int] | None = None
    ) -> "VariableLayout":
        """Row-major blocks, in the given order."""
        labels = [
            (name, r, c) for name, rows, cols in blocks for r in range(rows) for c in range(cols)
        ]
        return cls(labels, guards)

    @property
    def num_vars(self) -> int:
        return len(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple[Label, ...]:
        return self._labels

    @property
    def guards(self) -> dict[Label, int]:
        return dict(self._guards)

    def index(self, matrix: str, row: int, col: int) -> int:
        return self._index[Label(matrix, row, col)]

    def __contains__(self, label) -> bool:
        return Label(*label) in self._index

    def grid(self, matrix: str, rows: Iterable[int], cols: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        """Index grid and constant grid for a rectangular window of a matrix.

        Variables get their index and constant 0; guard cells get index -1 and
        the guard value.  Cells that are neither raise ``KeyError``.
        """
        rows, cols = list(rows), list(cols)
        idx = np.full((len(rows), len(cols)), -1, dtype=np.int64)
        const = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for a, r in enumerate(rows):
            for b, c in enumerate(cols):
                label = Label(matrix, r, c)
                if label in self._index:
                    idx[a, b] = self._index[label]
                else:
                    const[a, b] = self._guards[label]
        return idx, const

    def __eq__(self, other) -> bool:
        if not isinstance(other, VariableLayout):
            return NotImplemented
        return self._labels == other._labels and self._guards == other._guards

    def __repr__(self) -> str:
        return f"VariableLayout(num_vars={self.num_vars}, guards={len(self._guards)})"


# --------------------------------------------------------------------------
# affine forms


@dataclass(frozen=True)
class Forms:
    """A batch of ``K`` affine forms ``const[k] + sum_w coefs[k, w] * v[vars[k, w]]``.

    Slots with coefficient 0 are padding.  Arithmetic concatenates slots, so
    ``f - g`` has width ``f.width + g.width``.
    """

    vars: np.ndarray
    coefs: np.ndarray
    const: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vars, dtype=np.int64)
        c = np.asarray(self.coefs, dtype=np.int64)
        k = np.asarray(self.const, dtype=np.int64)
        if v.ndim == 1:
            v, c = v[:, None], c[:, None]
        if v.shape != c.shape or k.shape != (v.shape[0],):
            raise ValueError("inconsistent Forms shapes")
        object.__setattr__(self, "vars", v)
        object.__setattr__(self, "coefs", c)
        object.__setattr__(self, "const", k)

    @classmethod
    def from_grid(cls, idx: np.ndarray, const: np.ndarray, coef: int = 1) -> "Forms":
        """One single-slot form per cell; guard cells (index -1) become constants."""
        idx = np.asarray(idx, dtype=np.int64).ravel()
        const = np.asarray(const, dtype=np.int64).ravel()
        is_var = idx >= 0
        return cls(
            np.where(is_var, idx, 0)[:, None],
            np.where(is_var, coef, 0)[:, None],
            np.where(is_var, 0, const * coef),
        )

    @classmethod
    def sums(cls, idx: np.ndarray, const: np.ndarray | int = 0) -> "Forms":
        """Row ``k`` is ``const[k] + sum_w v[idx[k, w]]`` (idx entries -1 are skipped)."""
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        is_var = idx >= 0
        const = np.broadcast_to(np.asarray(const, dtype=np.int64), (idx.shape[0],))
        return cls(np.where(is_var, idx, 0), is_var.astype(np.int64), const.copy())

    @classmethod
    def constant(cls, values) -> "Forms":
        values = np.atleast_1d(np.asarray(values, dtype=np.int64))
        k = values.shape[0]
        return cls(np.zeros((k, 1), np.int64), np.zeros((k, 1), np.int64), values)

    def __len__(self) -> int:
        return self.vars.shape[0]

    def __getitem__(self, rows) -> "Forms":
        return Forms(self.vars[rows], self.coefs[rows], self.const[rows])

    @classmethod
    def concat(cls, parts: Sequence["Forms"]) -> "Forms":
        """Stack batches, padding narrower ones with zero slots."""
        width = max(p.width for p in parts)

        def pad(a):
            return np.pad(a, ((0, 0), (0, width - a.shape[1])))

        return cls(
            np.vstack([pad(p.vars) for p in parts]),
            np.vstack([pad(p.coefs) for p in parts]),
            np.concatenate([p.const for p in parts]),
        )

    @property
    def width(self) -> int:
        return self.vars.shape[1]

    def _coerce(self, other) -> "Forms":
        if isinstance(other, Forms):
            if len(other) != len(self):
                raise ValueError("batch sizes differ")
            return other
        return Forms.constant(np.broadcast_to(np.asarray(other, dtype=np.int64), (len(self),)))

    def __add__(self, other) -> "Forms":
        if not isinstance(other, Forms):
            return Forms(self.vars, self.coefs, self.const + np.asarray(other, dtype=np.int64))
        other = self._coerce(other)
        return Forms(
            np.hstack([self.vars, other.vars]),
            np.hstack([self.coefs, other.coefs]),
            self.const + other.const,
        )

    __radd__ = __add__

    def __neg__(self) -> "Forms":
        return Forms(self.vars, -self.coefs, -self.const)

    def __sub__(self, other) -> "Forms":
        return self + (-other)

    def __rsub__(self, other) -> "Forms":
        return (-self) + other

    def __mul__(self, scalar: int) -> "Forms":
        scalar = int(scalar)
        return Forms(self.vars, self.coefs * scalar, self.const * scalar)

    __rmul__ = __mul__


# --------------------------------------------------------------------------
# builder


def _as_fraction(value: Rational) -> Fraction:
    f = Fraction(value)
    return f


class ExpressionBuilder:
    """Accumulates expanded terms of a quadratic expression.

    Coefficients are kept as integers over a shared denominator, so halves
    and other fractions are exact until :meth:`finalize` checks that every
    linear and quadratic coefficient came out integral.
    """

    def __init__(self, kind: Kind | str, num_vars: int):
        self.kind = Kind.parse(kind)
        self.num_vars = int(num_vars)
        self._den = 1
        self._quad: list[tuple[np.ndarray, np.ndarray]] = []
        self._lin: list[tuple[np.ndarray, np.ndarray]] = []
        self._const = Fraction(0)
        self._mass = 0.0
        self._closed = False

    # -- internal helpers -------------------------------------------------

    def _multiplier(self, scale: Rational) -> int:
        """Integer factor for a term scaled by ``scale`` at the current denominator."""
        scale = _as_fraction(scale)
        if self._den % scale.denominator:
            new_den = math.lcm(self._den, scale.denominator)
            factor = new_den // self._den
            self._quad = [(k, c * factor) for k, c in self._quad]
            self._lin = [(k, c * factor) for k, c in self._lin]
            self._mass *= factor
            if self._mass >= _LIMIT:
                raise OverflowError("coefficient mass exceeds int64 range")
            self._den = new_den
        return int(scale * self._den)

    def _check_vars(self, idx: np.ndarray) -> None:
        if idx.size and (idx.min() < 0 or idx.max() >= self.num_vars):
            raise IndexError("variable index out of range")

    def _push(self, u: np.ndarray, v: np.ndarray, c: np.ndarray, mult: int) -> None:
        """Record products ``c * v_u * v_v`` (already integer-scaled by ``mult``)."""
        keep = c != 0
        if not keep.any():
            return
        u, v, c = u[keep], v[keep], c[keep] * mult
        self._mass += float(np.abs(c).sum(dtype=np.float64))
        if self._mass >= _LIMIT:
            raise OverflowError("coefficient mass exceeds int64 range")
        diag = u == v
        if diag.any():
            if self.kind is Kind.QUBO:
                self._lin.append((u[diag], c[diag]))
            else:
                self._const += Fraction(int(c[diag].sum()), self._den)
            off = ~diag
            u, v, c = u[off], v[off], c[off]
        if u.size:
            lo = np.minimum(u, v)
            hi = np.maximum(u, v)
            self._quad.append((lo * self.num_vars + hi, c))

    def _push_linear(self, idx: np.ndarray, c: np.ndarray, mult: int) -> None:
        keep = c != 0
        if not keep.any():
            return
        c = c[keep] * mult
        self._mass += float(np.abs(c).sum(dtype=np.float64))
        if self._mass >= _LIMIT:
            raise OverflowError("coefficient mass exceeds int64 range")
        self._lin.append((idx[keep], c))

    @staticmethod
    def _bound(*arrays: np.ndarray) -> int:
        b = 1
        for a in arrays:
            if a.size:
                b *= int(np.abs(a).max())
        return b

    def _guard(self) -> None:
        if self._closed:
            raise RuntimeError("builder already finalized")

    # -- public API -------------------------------------------------------

    def add_constant(self, value: Rational) -> None:
        self._guard()
        self._const += _as_fraction(value)

    def add_linear(self, var: int, coef: Rational) -> None:
        self._guard()
        self._check_vars(np.array([var]))
        mult = self._multiplier(coef)
        self._push_linear(np.array([var], np.int64), np.array([1], np.int64), mult)

    def add_quadratic(self, u: int, v: int, coef: Rational) -> None:
        self._guard()
        self._check_vars(np.array([u, v]))
        mult = self._multiplier(coef)
        self._push(np.array([u], np.int64), np.array([v], np.int64), np.array([1], np.int64), mult)

    def add_forms(self, f: Forms, weight=None, scale: Rational = 1) -> None:
        """Add ``scale * sum_k weight[k] * f[k]``."""
        self._guard()
        w = _weights(weight, len(f))
        mult = self._multiplier(scale)
        if self._bound(f.coefs, f.const, w) * abs(mult) >= _LIMIT:
            raise OverflowError("term coefficient exceeds int64 range")
        live = f.coefs != 0
        self._check_vars(f.vars[live])
        self._push_linear(f.vars[live], (f.coefs * w[:, None])[live], mult)
        self._const += Fraction(int((f.const * w).sum()) * mult, self._den)

    def add_product(self, f: Forms, g: Forms, weight=None, scale: Rational = 1) -> None:
        """Add ``scale * sum_k weight[k] * f[k] * g[k]``."""
        self._guard()
        if len(f) != len(g):
            raise ValueError("batch sizes differ")
        w = _weights(weight, len(f))
        mult = self._multiplier(scale)
        bound = self._bound(np.hstack([f.coefs, f.const[:, None]]), np.hstack([g.coefs, g.const[:, None]]), w)
        if bound * abs(mult) >= _LIMIT:
            raise OverflowError("term coefficient exceeds int64 range")
        self._check_vars(f.vars[f.coefs != 0])
        self._check_vars(g.vars[g.coefs != 0])
        fa = f.coefs * w[:, None]
        for q in range(g.width):
            self._push(f.vars.ravel(), np.repeat(g.vars[:, q], f.width), (fa * g.coefs[:, q : q + 1]).ravel(), mult)
        # cross terms with the constants
        self._push_linear(g.vars.ravel(), (g.coefs * (f.const * w)[:, None]).ravel(), mult)
        self._push_linear(f.vars.ravel(), (fa * g.const[:, None]).ravel(), mult)
        self._const += Fraction(int((f.const * g.const * w).sum()) * mult, self._den)

    def add_square(self, f: Forms, weight=None, scale: Rational = 1) -> None:
        """Add ``scale * sum_k weight[k] * f[k]**2``.

        Only the upper triangle of slot pairs is materialized, which halves
        memory for wide forms such as one-hot row sums.
        """
        self._guard()
        w = _weights(weight, len(f))
        mult = self._multiplier(scale)
        bound = self._bound(np.hstack([f.coefs, f.const[:, None]]), np.hstack([f.coefs, f.const[:, None]]), w)
        if 2 * bound * abs(mult) >= _LIMIT:
            raise OverflowError("term coefficient exceeds int64 range")
        self._check_vars(f.vars[f.coefs != 0])
        fa = f.coefs * w[:, None]
        width = f.width
        # diagonal slots
        self._push(f.vars.ravel(), f.vars.ravel(), (fa * f.coefs).ravel(), mult)
        if width > 1:
            p, q = np.triu_indices(width, 1)
            for start in range(0, len(f), max(1, 4_000_000 // len(p))):
                sl = slice(start, start + max(1, 4_000_000 // len(p)))
                self._push(
                    f.vars[sl][:, p].ravel(),
                    f.vars[sl][:, q].ravel(),
                    (2 * fa[sl][:, p] * f.coefs[sl][:, q]).ravel(),
                    mult,
                )
        self._push_linear(f.vars.ravel(), (2 * fa * f.const[:, None]).ravel(), mult)
        self._const += Fraction(int((f.const * f.const * w).sum()) * mult, self._den)

    def add_model(self, model: "QuadraticModel", scale: Rational = 1) -> None:
        """Add ``scale`` times an already-built model of the same kind."""
        self._guard()
        if model.kind is not self.kind:
            raise ValueError("model kind differs from builder kind")
        if model.num_vars > self.num_vars:
            raise IndexError("model has more variables than builder")
        mult = self._multiplier(scale)
        self._push_linear(model._lin_idx.copy(), model._lin_coef.copy(), mult)
        self._push(model._quad_row.copy(), model._quad_col.copy(), model._quad_coef.copy(), mult)
        self._const += _as_fraction(scale) * model.offset

    def finalize(self, layout: VariableLayout | None = None) -> "QuadraticModel":
        """Merge like terms, drop zeros, and check integrality."""
        self._guard()
        if layout is not None and layout.num_vars != self.num_vars:
            raise LabelCollision(
                f"layout has {layout.num_vars} labels for {self.num_vars} variables"
            )
        den = self._den
        lin_idx, lin_coef = _coalesce(self._lin)
        self._lin = []
        qkey, qcoef = _coalesce(self._quad)
        self._quad = []
        for name, keys, coefs in (("linear", lin_idx, lin_coef), ("quadratic", qkey, qcoef)):
            bad = coefs % den != 0
            if bad.any():
                k = int(keys[np.argmax(bad)])
                where = k if name == "linear" else divmod(k, self.num_vars)
                raise NonIntegerCoefficient(
                    f"{name} coefficient {Fraction(int(coefs[np.argmax(bad)]), den)} at {where}"
                )
        self._closed = True
        n = max(self.num_vars, 1)
        return QuadraticModel._from_arrays(
            self.kind,
            self.num_vars,
            lin_idx,
            lin_coef // den,
            qkey // n,
            qkey % n,
            qcoef // den,
            self._const,
        )


def _weights(weight, k: int) -> np.ndarray:
    if weight is None:
        return np.ones(k, dtype=np.int64)
    w = np.asarray(weight, dtype=np.int64)
    return np.broadcast_to(w, (k,)).copy()


def _coalesce(chunks: list[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray]:
    if not chunks:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    keys = np.concatenate([k for k, _ in chunks])
    coefs = np.concatenate([c for _, c in chunks])
    chunks.clear()
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    coefs = coefs[order]
    del order
    if keys.size == 0:
        return keys, coefs
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    sums = np.add.reduceat(coefs, starts)
    ukeys = keys[starts]
    keep = sums != 0
    return ukeys[keep], sums[keep]


def finalize(builder: ExpressionBuilder, layout: VariableLayout | None = None) -> "QuadraticModel":
    return builder.finalize(layout)


# --------------------------------------------------------------------------
# model


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.flags.writeable = False
    return a


class QuadraticModel:
    """Immutable sparse QUBO or Ising model with integer coefficients.

    Quadratic terms are stored once per unordered pair with ``row < col``,
    sorted lexicographically; linear terms are sorted by index.  Zero
    coefficients are never stored.
    """

    __slots__ = (
        "kind",
        "num_vars",
        "offset",
        "_lin_idx",
        "_lin_coef",
        "_quad_row",
        "_quad_col",
        "_quad_coef",
        "_cache",
    )

    def __init__(
        self,
        kind: Kind | str,
        num_vars: int,
        linear: Mapping[int, int] | None = None,
        quadratic: Mapping[tuple[int, int], int] | None = None,
        offset: Rational = 0,
    ):
        b = ExpressionBuilder(kind, num_vars)
        for i, c in (linear or {}).items():
            _require_int(c)
            b.add_linear(int(i), int(c))
        for (i, j), c in (quadratic or {}).items():
            _require_int(c)
            if i == j:
                raise ValueError("quadratic key with i == j; use linear terms")
            b.add_quadratic(int(i), int(j), int(c))
        b.add_constant(offset)
        m = b.finalize()
        self._set(m.kind, m.num_vars, m._lin_idx, m._lin_coef, m._quad_row, m._quad_col, m._quad_coef, m.offset)

    def _set(self, kind, num_vars, li, lc, qr, qc, qv, offset):
        object.__setattr__(self, "kind", Kind.parse(kind))
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "offset", Fraction(offset))
        object.__setattr__(self, "_lin_idx", _frozen(li))
        object.__setattr__(self, "_lin_coef", _frozen(lc))
        object.__setattr__(self, "_quad_row", _frozen(qr))
        object.__setattr__(self, "_quad_col", _frozen(qc))
        object.__setattr__(self, "_quad_coef", _frozen(qv))
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticModel is immutable")

    @classmethod
    def _from_arrays(cls, kind, num_vars, li, lc, qr, qc, qv, offset) -> "QuadraticModel":
        self = object.__new__(cls)
        self._set(kind, num_vars, li, lc, qr, qc, qv, offset)
        return self

    @classmethod
    def from_arrays(
        cls,
        kind: Kind | str,
        num_vars: int,
        linear: tuple[np.ndarray, np.ndarray],
        quadratic: tuple[np.ndarray, np.ndarray, np.ndarray],
        offset: Rational = 0,
    ) -> "QuadraticModel":
        """Build from unsorted, possibly duplicated coordinate arrays."""
        b = ExpressionBuilder(kind, num_vars)
        li, lc = (np.asarray(a, dtype=np.int64) for a in linear)
        qr, qc, qv = (np.asarray(a, dtype=np.int64) for a in quadratic)
        if np.any(qr == qc):
            raise ValueError("quadratic entry with i == j")
        b._check_vars(li)
        b._check_vars(np.concatenate([qr, qc]))
        b._push_linear(li, lc, 1)
        b._push(qr, qc, qv, 1)
        b.add_constant(offset)
        return b.finalize()

    # -- views ------------------------------------------------------------

    @property
    def linear(self) -> dict[int, int]:
        if "linear" not in self._cache:
            self._cache["linear"] = dict(zip(self._lin_idx.tolist(), self._lin_coef.tolist()))
        return self._cache["linear"]

    @property
    def quadratic(self) -> dict[tuple[int, int], int]:
        if "quadratic" not in self._cache:
            self._cache["quadratic"] = dict(
                zip(zip(self._quad_row.tolist(), self._quad_col.tolist()), self._quad_coef.tolist())
            )
        return self._cache["quadratic"]

    @property
    def linear_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._lin_idx, self._lin_coef

    @property
    def quadratic_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._quad_row, self._quad_col, self._quad_coef

    @property
    def num_linear(self) -> int:
        return int(self._lin_idx.size)

    @property
    def num_quadratic(self) -> int:
        return int(self._quad_row.size)

    @property
    def max_abs_coefficient(self) -> int:
        m = 0
        for a in (self._lin_coef, self._quad_coef):
            if a.size:
                m = max(m, int(np.abs(a).max()))
        return m

    def linear_vector(self) -> np.ndarray:
        h = np.zeros(self.num_vars, dtype=np.int64)
        h[self._lin_idx] = self._lin_coef
        return h

    def coupling_matrix(self) -> sp.csr_matrix:
        """Symmetric sparse matrix holding each quadratic coefficient twice."""
        n = self.num_vars
        r = np.concatenate([self._quad_row, self._quad_col])
        c = np.concatenate([self._quad_col, self._quad_row])
        v = np.concatenate([self._quad_coef, self._quad_coef])
        return sp.csr_matrix((v, (r, c)), shape=(n, n), dtype=np.int64)

    def _abs_mass(self) -> int:
        if "mass" not in self._cache:
            self._cache["mass"] = int(np.abs(self._lin_coef).sum()) + int(np.abs(self._quad_coef).sum())
        return self._cache["mass"]

    # -- evaluation -------------------------------------------------------

    def _check_assignment(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[-1] != self.num_vars:
            raise LengthMismatch(f"expected {self.num_vars} values, got {values.shape[-1]}")
        lo, hi = self.kind.domain
        if values.size and not np.all((values == lo) | (values == hi)):
            raise DomainMismatch(f"{self.kind.value} model takes values in {{{lo}, {hi}}}")
        return values.astype(np.int64)

    def variable_energies(self, batch) -> np.ndarray:
        """Energies without the offset, one per row of ``batch`` (exact int64)."""
        x = self._check_assignment(np.atleast_2d(batch))
        if self._abs_mass() >= 2**63:
            raise OverflowError("model too large for int64 evaluation")
        e = x[:, self._lin_idx] @ self._lin_coef
        if self._quad_row.size:
            e = e + (x[:, self._quad_row] * x[:, self._quad_col]) @ self._quad_coef
        return e

    def energy(self, assignment) -> Fraction:
        x = np.asarray(assignment)
        if x.ndim != 1:
            raise LengthMismatch("a single assignment must be one-dimensional")
        return Fraction(int(self.variable_energies(x)[0])) + self.offset

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadraticModel):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.num_vars == other.num_vars
            and self.offset == other.offset
            and np.array_equal(self._lin_idx, other._lin_idx)
            and np.array_equal(self._lin_coef, other._lin_coef)
            and np.array_equal(self._quad_row, other._quad_row)
            and np.array_equal(self._quad_col, other._quad_col)
            and np.array_equal(self._quad_coef, other._quad_coef)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"QuadraticModel({self.kind.value}, num_vars={self.num_vars}, "
            f"linear={self.num_linear}, quadratic={self.num_quadratic}, offset={self.offset})"
        )


def _require_int(c) -> None:
    if Fraction(c).denominator != 1:
        raise NonIntegerCoefficient(f"coefficient {c} is not an integer")


def evaluate(model: QuadraticModel, assignment) -> Fraction:
    """Exact energy (QUBO) or Hamiltonian (Ising) of one assignment."""
    return model.energy(assignment)


# --------------------------------------------------------------------------
# QUBO <-> Ising


def convert(model: QuadraticModel) -> tuple[QuadraticModel, int, Fraction]:
    """Convert between QUBO and Ising forms via ``s = 2x - 1``.

    Returns ``(target, a, b)`` with ``a * source(x) == target(s) + b`` for
    every assignment.  ``a`` is the smallest positive integer that keeps the
    target's coefficients integral; the target's offset is ``a`` times the
    source offset.
    """
    n = model.num_vars
    qr, qc, qv = model.quadratic_arrays
    h = model.linear_vector()
    # sum of couplings incident to each variable
    incident = np.zeros(n, dtype=np.int64)
    np.add.at(incident, qr, qv)
    np.add.at(incident, qc, qv)
    sum_q = int(qv.sum())
    if model.kind is Kind.QUBO:
        lin_num = 2 * h + incident  # times a/4
        g = math.gcd(*(int(v) for v in np.concatenate([qv, lin_num])), 0)
        a = 4 // math.gcd(4, g)
        new_q = qv * a // 4
        new_h = lin_num * a // 4
        b = a * (Fraction(sum_q, 4) + Fraction(int(h.sum()), 2))
        target_kind = Kind.ISING
    else:
        a = 1
        new_q = 4 * qv
        new_h = 2 * h - 2 * incident
        b = Fraction(sum_q - int(h.sum()))
        target_kind = Kind.QUBO
    idx = np.flatnonzero(new_h)
    target = QuadraticModel._from_arrays(
        target_kind, n, idx, new_h[idx], qr, qc, new_q, a * model.offset
    )
    return target, a, b


def normalize(model: QuadraticModel) -> tuple[QuadraticModel, int]:
    """Divide every coefficient by their greatest common divisor.

    Returns the reduced model and the divisor; the offset is divided too, so
    ``model(v) == factor * reduced(v)``.
    """
    g = math.gcd(*(int(v) for v in np.concatenate([model._lin_coef, model._quad_coef])), 0)
    if g <= 1:
        return model, 1
    return (
        QuadraticModel._from_arrays(
            model.kind,
            model.num_vars,
            model._lin_idx,
            model._lin_coef // g,
            model._quad_row,
            model._quad_col,
            model._quad_coef // g,
            model.offset / g,
        ),
        g,
    )


# --------------------------------------------------------------------------
# statistics

DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class ModelStats:
    num_vars: int
    linear_term_count: int
    linear_coeff_set: tuple[int, ...]
    quadratic_term_count: int
    quadratic_coeff_set: tuple[int, ...]
    diameter: int | str | None
    offset: Fraction

    def as_row(self) -> dict:
        return {
            "vars": self.num_vars,
            "linear_count": self.linear_term_count,
            "linear_coeffs": list(self.linear_coeff_set),
            "quad_count": self.quadratic_term_count,
            "quad_coeffs": list(self.quadratic_coeff_set),
            "diameter": self.diameter,
            "offset": self.offset,
        }


def diameter(model: QuadraticModel) -> int | str:
    """Largest shortest-path length in the graph of quadratic terms.

    Returns ``"disconnected"`` when the variables form two or more
    components; a model with at most one variable has diameter 0.
    """
    n = model.num_vars
    if n <= 1:
        return 0
    adj = model.coupling_matrix()
    ncomp, _ = sp.csgraph.connected_components(adj, directed=False)
    if ncomp > 1:
        return DISCONNECTED
    adj.data[:] = 1
    best = 0
    step = max(1, 2_000_000 // n)
    for start in range(0, n, step):
        d = sp.csgraph.shortest_path(
            adj, method="D", unweighted=True, directed=False, indices=np.arange(start, min(n, start + step))
        )
        best = max(best, int(d.max()))
    return best


def stats(model: QuadraticModel, with_diameter: bool = True) -> ModelStats:
    return ModelStats(
        num_vars=model.num_vars,
        linear_term_count=model.num_linear,
        linear_coeff_set=tuple(sorted(set(model._lin_coef.tolist()))),
        quadratic_term_count=model.num_quadratic,
        quadratic_coeff_set=tuple(sorted(set(model._quad_coef.tolist()))),
        diameter=diameter(model) if with_diameter else None,
        offset=model.offset,
    )
