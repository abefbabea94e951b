"""Problem description types and the package exception hierarchy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class PBFunError(Exception):
    """Base class for all package errors."""


class NonConvergence(PBFunError):
    pass


class TailNotDecaying(PBFunError):
    pass


class UnsupportedDrift(PBFunError):
    pass


class UnsupportedAlpha(PBFunError):
    pass


class UnsupportedDomain(PBFunError):
    pass


class TooManyCrossings(PBFunError):
    pass


class GridTooCoarse(PBFunError):
    pass


class NotPositiveDefinite(PBFunError):
    pass


@dataclass(frozen=True)
class Zero:
    """h ≡ 0."""

    def h(self, t: float, alpha: float) -> float:
        return 0.0

    def __str__(self) -> str:
        return "zero"


@dataclass(frozen=True)
class PowerAlpha:
    """h(t) = c t^alpha on t >= 0."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")

    def h(self, t: float, alpha: float) -> float:
        return self.c * abs(t) ** alpha

    def __str__(self) -> str:
        return f"power:c={self.c!r}"


@dataclass(frozen=True)
class PowerMinusQuad:
    """h(t) = c|t|^lambda - t^2."""

    c: float
    lam: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def h(self, t: float, alpha: float) -> float:
        return self.c * abs(t) ** self.lam - t * t

    @property
    def convex(self) -> bool:
        return self.lam >= 1.0

    def __str__(self) -> str:
        return f"plq:c={self.c!r},lambda={self.lam!r}"


Drift = Zero | PowerAlpha | PowerMinusQuad


@dataclass(frozen=True)
class HalfLine:
    @property
    def measure(self) -> float:
        return math.inf

    @property
    def lo(self) -> float:
        return 0.0

    @property
    def hi(self) -> float:
        return math.inf

    def __str__(self) -> str:
        return "half"


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval requires a < b")

    @property
    def measure(self) -> float:
        return self.b - self.a

    @property
    def lo(self) -> float:
        return self.a

    @property
    def hi(self) -> float:
        return self.b

    def __str__(self) -> str:
        return f"{self.a!r}:{self.b!r}"


Domain = HalfLine | Interval


@dataclass(frozen=True)
class Problem:
    alpha: float
    drift: Drift
    domain: Domain
    x: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")
        if not self.x >= 0.0:
            raise ValueError("x must be nonnegative")
        if self.x > self.domain.measure:
            raise ValueError("x exceeds the measure of the domain")

    def with_x(self, x: float) -> "Problem":
        return Problem(self.alpha, self.drift, self.domain, x)

    def quadratic_form(self) -> tuple[float, float]:
        """For alpha = 2, return (C, lam) with h(t) + t^2 = C|t|^lam on the domain."""
        if self.alpha != 2.0:
            raise UnsupportedAlpha("quadratic form exists only for alpha = 2")
        d = self.drift
        if isinstance(d, Zero):
            return 1.0, 2.0
        if isinstance(d, PowerAlpha):
            if self.domain.lo < 0.0:
                raise UnsupportedDrift("power drift is defined for t >= 0 only")
            return 1.0 + d.c, 2.0
        return d.c, d.lam


@dataclass
class PBValue:
    value: float
    err_est: float
    method: str
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.value < 0.0:
            self.value = 0.0

    def __float__(self) -> float:
        return self.value
