"""Trapezoidal membership functions and min-combination of degrees.

Every graded measure in the package is a trapezoid over a linear domain
(distances, meters) or a circular domain (angles, degrees), or the
unconstrained set whose membership is identically one.  Crisp bounds are
degenerate trapezoids (a == b and/or c == d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

from .geometry import normalize_angle


@dataclass(frozen=True)
class TrapezoidalSet:
    """Membership 0 outside [a, d], 1 on [b, c], linear on the ramps.

    Circular sets read (a, b, c, d) counterclockwise from a, spanning
    strictly less than a full turn; all four angles are stored normalized
    to [0, 360).
    """

    a: float
    b: float
    c: float
    d: float
    circular: bool = False

    def __post_init__(self) -> None:
        for v in (self.a, self.b, self.c, self.d):
            if not math.isfinite(v):
                raise ValueError(f"trapezoid corner must be finite, got {v!r}")
        if self.circular:
            object.__setattr__(self, "a", normalize_angle(self.a))
            object.__setattr__(self, "b", normalize_angle(self.b))
            object.__setattr__(self, "c", normalize_angle(self.c))
            object.__setattr__(self, "d", normalize_angle(self.d))
            b, c, d = self._offsets()
            if not (0.0 <= b <= c <= d):
                raise ValueError(
                    f"circular trapezoid corners not in counterclockwise order: "
                    f"({self.a}, {self.b}, {self.c}, {self.d})"
                )
        elif not (self.a <= self.b <= self.c <= self.d):
            raise ValueError(
                f"trapezoid corners must satisfy a <= b <= c <= d, got "
                f"({self.a}, {self.b}, {self.c}, {self.d})"
            )

    def _offsets(self) -> tuple[float, float, float]:
        """Corner positions measured counterclockwise from `a`, degrees."""
        return (
            (self.b - self.a) % 360.0,
            (self.c - self.a) % 360.0,
            (self.d - self.a) % 360.0,
        )

    def membership(self, x: float) -> float:
        if not math.isfinite(x):
            raise ValueError(f"membership argument must be finite, got {x!r}")
        if self.circular:
            b, c, d = self._offsets()
            t = (x - self.a) % 360.0
            return _linear_trapezoid(t, 0.0, b, c, d)
        return _linear_trapezoid(x, self.a, self.b, self.c, self.d)

    def core_midpoint(self) -> float:
        """The centre of the membership-1 region."""
        if self.circular:
            return normalize_angle(self.b + ((self.c - self.b) % 360.0) / 2.0)
        return (self.b + self.c) / 2.0

    def cut_interval(self, level: float) -> tuple[float, float]:
        """Endpoints of {x : membership(x) >= level} for level in (0, 1].

        For circular sets the interval is returned unwrapped (lo <= hi,
        hi may exceed 360); normalize samples drawn from it.
        """
        if not 0.0 < level <= 1.0:
            raise ValueError(f"cut level must be in (0, 1], got {level}")
        if self.circular:
            b, c, d = self._offsets()
            lo = self.a + level * b
            hi = self.a + d - level * (d - c)
            return lo, hi
        return self.a + level * (self.b - self.a), self.d - level * (self.d - self.c)


class AnySet:
    """The unconstrained set: membership is identically one."""

    _instance: "AnySet | None" = None

    def __new__(cls) -> "AnySet":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def membership(self, x: float) -> float:
        if not math.isfinite(x):
            raise ValueError(f"membership argument must be finite, got {x!r}")
        return 1.0

    def core_midpoint(self) -> float:
        raise ValueError("the unconstrained set has no unique maximizer")

    def __repr__(self) -> str:
        return "AnySet()"


ANY = AnySet()

FuzzySet = Union[TrapezoidalSet, AnySet]


def is_any(s: FuzzySet) -> bool:
    return isinstance(s, AnySet)


def _linear_trapezoid(x: float, a: float, b: float, c: float, d: float) -> float:
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


def combine_min(degrees: Iterable[float]) -> float:
    """Minimum of a non-empty collection of membership degrees."""
    values = list(degrees)
    if not values:
        raise ValueError("combine_min of an empty collection")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"membership degree out of [0, 1]: {v!r}")
    return min(values)
