"""Physical dimensions and the value types of the policy language.

A dimension is an integer exponent triple over the base quantities
(length, time, mass).  Speeds are ``[1, -1, 0]``, plain numbers are
``[0, 0, 0]``, and so on.  Types layer bool / scalar / 2-d vector over
dimensions; a vector's dimension applies to both components.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class Dimension:
    """Exponents of (length, time, mass)."""

    length: int = 0
    time: int = 0
    mass: int = 0

    def __mul__(self, other: "Dimension") -> "Dimension":
        return Dimension(
            self.length + other.length, self.time + other.time, self.mass + other.mass
        )

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(
            self.length - other.length, self.time - other.time, self.mass - other.mass
        )

    @property
    def dimensionless(self) -> bool:
        return self.length == 0 and self.time == 0 and self.mass == 0

    def exps(self) -> tuple[int, int, int]:
        return (self.length, self.time, self.mass)

    @staticmethod
    def of(exps) -> "Dimension":
        l, t, m = exps
        return Dimension(int(l), int(t), int(m))

    def __str__(self) -> str:
        return f"[{self.length},{self.time},{self.mass}]"


DIMENSIONLESS = Dimension(0, 0, 0)
LENGTH = Dimension(1, 0, 0)
SPEED = Dimension(1, -1, 0)


class Kind(Enum):
    BOOL = "bool"
    SCALAR = "scalar"
    VECTOR = "vector"


@dataclass(frozen=True)
class AspType:
    """Type of a policy-language value: bool, or a dimensioned scalar/vector."""

    kind: Kind
    dim: Dimension = DIMENSIONLESS

    def __post_init__(self) -> None:
        if self.kind is Kind.BOOL and not self.dim.dimensionless:
            raise ValueError("bool carries no dimension")

    def __str__(self) -> str:
        if self.kind is Kind.BOOL:
            return "bool"
        if self.kind is Kind.SCALAR:
            return f"scalar{self.dim}"
        return f"vector{self.dim}"


BOOL = AspType(Kind.BOOL)


def scalar(dim: Dimension = DIMENSIONLESS) -> AspType:
    return AspType(Kind.SCALAR, dim)


def vector(dim: Dimension = DIMENSIONLESS) -> AspType:
    return AspType(Kind.VECTOR, dim)
