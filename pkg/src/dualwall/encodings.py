"""Single-vector models for one-hot, zero-one-hot and domain-wall integers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bqm import ExpressionBuilder, Forms, Kind, QuadraticModel, VariableLayout
from .errors import InvalidK, NotAValidVector, OutOfRange

# value of an all-cold zero-one-hot vector
PHI = None


class Scheme(str, Enum):
    ONE_HOT = "one-hot"
    ZERO_ONE_HOT = "zero-one-hot"
    DOMAIN_WALL = "domain-wall"

    @classmethod
    def parse(cls, value: "Scheme | str") -> "Scheme":
        if isinstance(value, Scheme):
            return value
        return cls(str(value).lower().replace("_", "-"))


@dataclass(frozen=True)
class VectorEncoding:
    scheme: Scheme
    k: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.k < 1:
            raise InvalidK(f"vector length must be at least 1, got {self.k}")

    @property
    def values(self) -> list:
        """Every representable value, in encoding order."""
        if self.scheme is Scheme.ONE_HOT:
            return list(range(self.k))
        if self.scheme is Scheme.ZERO_ONE_HOT:
            return [PHI, *range(self.k)]
        return list(range(self.k + 1))


def _wall_guards(k: int, kind: Kind) -> dict:
    hot, cold = 1, kind.domain[0]
    return {("FLAT", 0, -1): hot, ("FLAT", 0, k): cold}


def build_vector_model(scheme: Scheme | str, k: int, kind: Kind | str) -> tuple[QuadraticModel, VariableLayout]:
    """Model whose minimizers are exactly the valid vectors of ``scheme``.

    Minimum values: 0 for one-hot and zero-one-hot, 1/2 (QUBO) or 2 (Ising)
    for domain wall, whose guard cells enter as constants.
    """
    enc = VectorEncoding(scheme, k)
    kind = Kind.parse(kind)
    scheme = enc.scheme
    ising = kind is Kind.ISING
    b = ExpressionBuilder(kind, k)
    total = Forms.sums(np.arange(k)[None, :])
    if scheme is Scheme.ONE_HOT:
        layout = VariableLayout.flat(k)
        if ising:
            b.add_square(total + (k - 2), scale=Fraction(1, 2))
        else:
            b.add_square(1 - total)
    elif scheme is Scheme.ZERO_ONE_HOT:
        layout = VariableLayout.flat(k)
        if ising:
            b.add_product(total + k, total + (k - 2), scale=Fraction(1, 2))
        else:
            b.add_product(total, total - 1, scale=Fraction(1, 2))
    else:
        layout = VariableLayout.flat(k, _wall_guards(k, kind))
        idx, const = layout.grid("FLAT", [0], range(-1, k + 1))
        cells = Forms.from_grid(idx, const)
        b.add_square(cells[:-1] - cells[1:], scale=Fraction(1, 2))
    return b.finalize(layout), layout


def decode_vector(scheme: Scheme | str, values: Sequence[int]):
    """Integer (or ``PHI``) represented by a bit or spin vector."""
    scheme = Scheme.parse(scheme)
    v = np.asarray(values, dtype=np.int64)
    if v.ndim != 1 or v.size == 0:
        raise NotAValidVector("expected a non-empty 1-D vector")
    if not np.all((v == 1) | (v == 0) | (v == -1)) or ((v == 0).any() and (v == -1).any()):
        raise NotAValidVector("values must all be bits or all be spins")
    hot = v == 1
    count = int(hot.sum())
    if scheme is Scheme.DOMAIN_WALL:
        if hot[:count].all():
            return count
        raise NotAValidVector("hot elements do not form a leading run")
    if count == 1:
        return int(np.flatnonzero(hot)[0])
    if count == 0 and scheme is Scheme.ZERO_ONE_HOT:
        return PHI
    raise NotAValidVector(f"{count} hot elements in a {scheme.value} vector")


def encode_vector(scheme: Scheme | str, value, k: int, kind: Kind | str = Kind.QUBO) -> np.ndarray:
    enc = VectorEncoding(scheme, k)
    cold = Kind.parse(kind).domain[0]
    out = np.full(k, cold, dtype=np.int8)
    if value is PHI:
        if enc.scheme is not Scheme.ZERO_ONE_HOT:
            raise OutOfRange(f"{enc.scheme.value} cannot represent an undefined value")
        return out
    value = int(value)
    if enc.scheme is Scheme.DOMAIN_WALL:
        if not 0 <= value <= k:
            raise OutOfRange(f"domain wall of length {k} holds 0..{k}, got {value}")
        out[:value] = 1
    else:
        if not 0 <= value < k:
            raise OutOfRange(f"{enc.scheme.value} of length {k} holds 0..{k - 1}, got {value}")
        out[value] = 1
    return out
