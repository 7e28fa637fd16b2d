"""Model-space trigonometry: s_kappa, c_kappa, the distortion coefficients and ABP constants.

Infinite coefficients are returned as ``math.inf``; callers treat any bound
containing ``inf`` as trivially satisfied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

_TAYLOR = 1e-10  # |kappa| theta^2 below this uses the series


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DistortionParams:
    K: float
    N: float
    t: float
    theta: float

    def __post_init__(self):
        if not self.N > 0:
            raise ValueError("N must be positive")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        if not self.theta >= 0.0:
            raise ValueError("theta must be non-negative")


def _check(kappa, theta):
    if theta < 0:
        raise DomainError("theta must be non-negative")
    if kappa > 0 and theta * math.sqrt(kappa) >= math.pi:
        raise DomainError(f"theta={theta} is outside (0, pi/sqrt(kappa)) for kappa={kappa}")


def s_kappa(kappa: float, theta: float) -> float:
    """sin, identity or sinh profile solving s'' + kappa s = 0, s(0) = 0, s'(0) = 1."""
    _check(kappa, theta)
    x = kappa * theta * theta
    if abs(x) < _TAYLOR:
        return theta * (1 - x / 6 + x * x / 120 - x**3 / 5040)
    if kappa > 0:
        r = math.sqrt(kappa)
        return math.sin(r * theta) / r
    r = math.sqrt(-kappa)
    return math.sinh(r * theta) / r


def c_kappa(kappa: float, theta: float) -> float:
    """Derivative of :func:`s_kappa` in theta."""
    _check(kappa, theta)
    x = kappa * theta * theta
    if abs(x) < _TAYLOR:
        return 1 - x / 2 + x * x / 24 - x**3 / 720
    if kappa > 0:
        return math.cos(math.sqrt(kappa) * theta)
    return math.cosh(math.sqrt(-kappa) * theta)


def s_over_x(kappa: float, x: float) -> float:
    """s_kappa(x)/x with the value 1 at x = 0."""
    if x == 0:
        return 1.0
    return s_kappa(kappa, x) / x


def sigma(K: float, N: float, t: float, theta: float) -> float:
    """Distortion coefficient sigma_{K,N}^{(t)}(theta); ``inf`` when K theta^2 >= N pi^2."""
    DistortionParams(K, N, t, theta)
    k2 = K * theta * theta
    if k2 >= N * math.pi**2:
        return math.inf
    if k2 == 0:
        return float(t)
    if t == 0:
        return 0.0
    if t == 1:
        return 1.0
    kappa = K / N
    return s_kappa(kappa, t * theta) / s_kappa(kappa, theta)


def tau(K: float, N: float, t: float, theta: float) -> float:
    """tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K,N-1}^{(t)}(theta)^{(N-1)/N}."""
    if not N > 1:
        raise ValueError("tau needs N > 1")
    if t == 0:
        return 0.0
    s = sigma(K, N - 1, t, theta)
    if math.isinf(s):
        return math.inf
    if K == 0 or theta == 0:
        return float(t)
    return t ** (1 / N) * s ** ((N - 1) / N)


def abp_coefficient(K: float, N: float, t: float, L: float, Theta: float, Phi: float) -> float:
    """Constant multiplying m(R) in the ABP bound.

    ``(c(r) + t s(r) L / (N r))^N`` with kappa = K/N and r = Theta for K < 0,
    r = Phi for K > 0; ``(1 + t L / N)^N`` for K = 0.  At r = 0 the ratio
    s(r)/r is replaced by its limit 1.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    if not Theta >= Phi >= 0:
        raise ValueError("need Theta >= Phi >= 0")
    if not N > 0:
        raise ValueError("N must be positive")
    if K == 0:
        return (1 + t * L / N) ** N
    kappa = K / N
    r = Theta if K < 0 else Phi
    base = c_kappa(kappa, r) + t * s_over_x(kappa, r) * L / N
    if base < 0:
        # positive curvature with Phi beyond the first zero of c_kappa
        raise DomainError(f"ABP base {base} is negative at Phi={r}")
    return base**N


def exp_bound(t: float, L: float) -> float:
    """The K = 0 exponential constant exp(t L)."""
    return math.exp(t * L)
