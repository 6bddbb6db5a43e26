"""Regularized incomplete beta function and the F-distribution tails."""

import math

from .errors import PipelineError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b), evaluated by the modified Lentz method."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise PipelineError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x, y=None):
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1.

    ``y`` may carry ``1 - x`` computed without cancellation by the caller.
    The continued fraction converges fast only below the mean, so above
    ``(a + 1) / (a + b + 2)`` the symmetry ``I_x(a, b) = 1 - I_{1-x}(b, a)``
    is used instead.
    """
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    if x > (a + 1.0) / (a + b + 2.0):
        return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b
    return math.exp(log_front) * _betacf(a, b, x) / a


def f_survival(f, d1, d2):
    """P(F > f) for an F(d1, d2) variable."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    denom = d2 + d1 * f
    return betainc(d2 / 2.0, d1 / 2.0, d2 / denom, d1 * f / denom)


def f_cdf(f, d1, d2):
    """P(F <= f) for an F(d1, d2) variable."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if f <= 0.0:
        return 0.0
    if math.isinf(f):
        return 1.0
    denom = d2 + d1 * f
    return betainc(d1 / 2.0, d2 / 2.0, d1 * f / denom, d2 / denom)
