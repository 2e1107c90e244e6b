"""Degeneration-regime parametrization.

The shrinking-parameter family omega1 = i + delta = conj(omega2) with
1/delta a positive integer, coupling constants g = i sqrt(w1 w2)(m + u delta)
and lambda = i sqrt(w1 w2)(k + v delta), and for conical runs the extra
point x = i sqrt(w1 w2)(K + sigma) with K = floor(rho/delta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ParameterError
from .hyperbolic import PeriodPair


@dataclass(frozen=True)
class ComplexRegime:
    delta: float
    m: int
    u: complex
    k: int
    v: float
    rho: Optional[float] = None
    sigma: Optional[float] = None
    M: int = 3

    def __post_init__(self):
        d = float(self.delta)
        if d <= 0:
            raise ParameterError("delta must be positive")
        inv = 1.0 / d
        if abs(inv - round(inv)) > 1e-9:
            raise ParameterError(f"1/delta = {inv} must be a positive integer")
        u = complex(self.u)
        if not (-1.0 < u.imag < 0.0):
            raise ParameterError(f"Im u = {u.imag} must lie in (-1, 0)")
        if abs(complex(self.v).imag) > 0:
            raise ParameterError("v must be real")
        if self.sigma is not None and abs(self.sigma) > 0.5:
            raise ParameterError("|sigma| must be <= 1/2")
        if (self.rho is None) != (self.sigma is None):
            raise ParameterError("rho and sigma go together")
        if self.rho is not None and self.rho == 0.0:
            raise ParameterError("rho must be nonzero for conical runs")
        if self.M <= 0:
            raise ParameterError("M must be a positive integer")
        # the square root of omega1/omega2 must match i + delta up to O(delta^2)
        w1, w2 = 1j + d, -1j + d
        err = abs((w1 / w2) ** 0.5 - 1j - d)
        if err > 1.5 * d * d:
            raise ParameterError("sqrt(omega1/omega2) deviates from i + delta "
                                 f"by {err:g} > 1.5 delta^2")
        object.__setattr__(self, "delta", d)

    @property
    def omega(self) -> PeriodPair:
        return PeriodPair.degeneration(self.delta)

    @property
    def sqrt_w1w2(self) -> float:
        """sqrt(omega1 omega2) = sqrt(1 + delta^2), a positive real."""
        return math.sqrt(1.0 + self.delta ** 2)

    @property
    def i_sqrt_w1w2(self) -> complex:
        return 1j * self.sqrt_w1w2

    @property
    def g(self) -> complex:
        return self.i_sqrt_w1w2 * (self.m + complex(self.u) * self.delta)

    @property
    def lam(self) -> complex:
        return self.i_sqrt_w1w2 * (self.k + self.v * self.delta)

    @property
    def epsilon(self) -> complex:
        """(i/delta)(1 - 1/sqrt(1+delta^2)), the O(delta) parametrization drift."""
        d = self.delta
        return (1j / d) * (1.0 - 1.0 / math.sqrt(1.0 + d * d))

    @property
    def K(self) -> int:
        if self.rho is None:
            raise ParameterError("K is defined only for conical regimes")
        K = math.floor(self.rho / self.delta)
        # floor definition puts K*delta in (rho - delta, rho]
        assert self.rho - self.delta < K * self.delta <= self.rho
        return K

    @property
    def x(self) -> complex:
        return self.i_sqrt_w1w2 * (self.K + self.sigma)

    def with_delta(self, delta: float) -> "ComplexRegime":
        return ComplexRegime(delta, self.m, self.u, self.k, self.v,
                             self.rho, self.sigma, self.M)
