"""First-order closed forms for the fidelity after n Hadamard gates."""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_C = 272


def default_locations(y: int) -> int:
    return 448 + 14 * y


def _check_n(n: int) -> None:
    if n < 0 or n % 2:
        raise ValueError(f"n must be a non-negative even integer, got {n}")


def _check_p(p: float, upper: float) -> None:
    if not 0.0 <= p <= upper:
        raise ValueError(f"p={p} outside the valid range [0, {upper:g}]")


def physical_fidelity(p: float, n: int) -> float:
    _check_n(n)
    _check_p(p, 0.75)
    return (1.0 + (1.0 - 4.0 * p / 3.0) ** n) / 2.0


def encoded_noqec_fidelity(p: float, n: int) -> float:
    _check_n(n)
    _check_p(p, 0.25)
    return (1.0 + (1.0 - 4.0 * p) ** n) / 2.0


@dataclass(frozen=True)
class ApproxParams:
    """Inputs of the periodic-QEC formula.

    ``C`` counts degrading single faults in one unit (y gates, QEC, y gates,
    QEC) and ``L`` the fault locations in that unit. ``L`` defaults to
    448 + 14y.
    """

    p: float
    n: int
    y: int
    C: int = DEFAULT_C
    L: int | None = None

    def __post_init__(self):
        _check_n(self.n)
        if self.y < 1:
            raise ValueError("y must be positive")
        if self.L is None:
            object.__setattr__(self, "L", default_locations(self.y))
        if self.C < 0 or self.L < 1 or self.C > 3 * self.L:
            raise ValueError("need 0 <= C <= 3L and L >= 1")
        _check_p(self.p, 1.0)

    @property
    def units(self) -> int:
        return self.n // (2 * self.y)

    @property
    def unit_failure(self) -> float:
        return self.C / 3.0 * self.p * (1.0 - self.p) ** (self.L - 1)


def qec_period_fidelity(params: ApproxParams) -> float:
    """(1 + (1-P)^(n/2y)) / 2, using whole units only when 2y does not divide n."""
    # C <= 3L keeps the failure term below p L (1-p)^(L-1) <= 1
    return (1.0 + math.pow(1.0 - params.unit_failure, params.units)) / 2.0
