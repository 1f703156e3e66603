"""Closed-form throughput formulas for the hard-fairness scheduler.

Special functions
-----------------
``gamma_upper``  upper incomplete gamma for any real order, x > 0
``j_integral``   J_n(mu) = int_0^inf t^(n-1) ln(1+t) e^(-mu t) dt
``expint``       generalized exponential integral E_n(x)

Throughputs (nats per channel use)
----------------------------------
``t_np``         per-user throughput of round-robin transmit diversity
``t_p_lower``    lower bound on per-user ZF throughput with equal power
``alpha_balance`` time share of the predictable class at max-min balance
"""
from dataclasses import dataclass
from math import exp, factorial, lgamma, log

import numpy as np
from scipy import special

__all__ = [
    "HfsAnalyticsInput",
    "gamma_upper",
    "j_integral",
    "expint",
    "t_np",
    "t_p_lower",
    "alpha_balance",
]

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXITER = 10_000


@dataclass(frozen=True)
class HfsAnalyticsInput:
    """Antenna count, linear SNR and class sizes."""

    M: int
    P: float
    K_p: int = 0
    K_np: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.P <= 0:
            raise ValueError("P must be > 0")
        if self.K_p < 0 or self.K_np < 0 or self.K_p + self.K_np < 1:
            raise ValueError("need K_p, K_np >= 0 and K_p + K_np >= 1")


def _check_x(x):
    if not x > 0:
        raise ValueError(f"argument must be > 0, got {x}")


def _upper_cf_scaled(a, x):
    """e^x x^-a Gamma(a, x) by modified Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError("continued fraction did not converge")


def _gamma_upper_scaled(a, x):
    """e^x Gamma(a, x)."""
    if a > 0:
        if x > a + 1.0:
            return x ** a * _upper_cf_scaled(a, x)
        return special.gammaincc(a, x) * special.gamma(a) * exp(x)
    if x > 1.0:
        return x ** a * _upper_cf_scaled(a, x)
    # downward recurrence from Gamma(0, x) = E1(x); stable for x <= 1
    n = int(round(-a))
    if abs(a + n) > 1e-12:
        # non-integer negative order: start from the fractional part
        frac = a + np.ceil(-a)
        g = _gamma_upper_scaled(frac, x) if frac > 0 else special.exp1(x) * exp(x)
        order = frac
        steps = int(round(order - a))
    else:
        g = special.exp1(x) * exp(x)
        order = 0.0
        steps = n
    for _ in range(steps):
        order -= 1.0
        # Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s, scaled by e^x
        g = (g - x ** order) / order
    return g


def gamma_upper(alpha, x):
    """Upper incomplete gamma function Gamma(alpha, x) for x > 0.

    Non-positive orders use the downward recurrence from E1 for x <= 1 and
    a continued fraction otherwise.
    """
    _check_x(x)
    return _gamma_upper_scaled(float(alpha), float(x)) * exp(-x)


def j_integral(n, mu):
    """J_n(mu) via its finite series in upper incomplete gamma functions.

    Terms are combined in log space so that large n with small mu does not
    overflow.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    _check_x(mu)
    n = int(n)
    # J = (n-1)! sum_k e^mu Gamma(k-n, mu) / mu^k ; every term is positive
    logs = [log(_gamma_upper_scaled(float(k - n), mu)) - k * log(mu)
            for k in range(1, n + 1)]
    top = max(logs)
    total = top + log(sum(exp(v - top) for v in logs))
    return exp(lgamma(n) + total)


def expint(n, x):
    """Generalized exponential integral E_n(x) = int_1^inf e^(-x t) t^-n dt."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    _check_x(x)
    return float(special.expn(int(n), x))


def t_np(inp: HfsAnalyticsInput):
    """Per-user throughput of K_np users served round-robin with transmit
    diversity, channel norm chi-square with 2M degrees of freedom."""
    if inp.K_np < 1:
        raise ValueError("K_np must be >= 1")
    M, P = inp.M, inp.P
    mu = M / P
    # (M/P)^M / (M-1)! * J_M(M/P), in logs for large M
    val = exp(M * log(mu) - log(factorial(M - 1)) + log(j_integral(M, mu)))
    return val / inp.K_np


def t_p_lower(inp: HfsAnalyticsInput):
    """Equal-power ZF lower bound on the per-user predictable throughput."""
    if inp.K_p < 1:
        raise ValueError("K_p must be >= 1")
    mu = inp.M / inp.P
    # e^mu E1(mu), scaled so that large mu does not overflow
    return inp.M / inp.K_p * _gamma_upper_scaled(0.0, mu)


def alpha_balance(T_p, T_np):
    """Fraction of slots for the predictable class that balances
    alpha_p * T_p against (1 - alpha_p) * T_np."""
    if T_p < 0 or T_np < 0:
        raise ValueError("throughputs must be non-negative")
    if T_p + T_np <= 0:
        raise ValueError("T_p + T_np must be > 0")
    return T_np / (T_p + T_np)
