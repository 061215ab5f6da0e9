"""Closed-form probability bounds and identities, with brute-force oracles.

Exponents are accumulated in the log domain and only the final value is
exponentiated. A bound is *vacuous* when it is >= 1 or its precondition
fails; vacuous values are reported but never used for pass/fail decisions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .detection import Hypothesis, logcosh, maxpower_delta, moments_U
from .model import DomainError, ParameterError, Scheme, binary_known_slot_exponent

LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class BoundValue:
    value: float
    vacuous: bool

    @classmethod
    def from_log(cls, log_value: float) -> "BoundValue":
        value = math.exp(log_value) if log_value < 700 else math.inf
        return cls(value, log_value >= 0)

    @classmethod
    def from_log2(cls, log2_value: float) -> "BoundValue":
        return cls.from_log(log2_value * math.log(2))


VACUOUS = BoundValue(math.inf, True)


def q_function(x):
    """Gaussian tail ``Q(x) = P(Z > x)``."""
    return ndtr(-np.asarray(x, dtype=float))[()]


def q_upper(x):
    """``Q(x) <= exp(-x^2/2) / 2`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ParameterError("q_upper is only valid for x >= 0")
    return (0.5 * np.exp(-0.5 * x * x))[()]


def chernoff_chi2_tail(n: int, delta: float) -> BoundValue:
    """Chernoff bound on ``P(X > n + sqrt(n) delta)`` for ``X ~ chi^2_n``."""
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    r = delta / math.sqrt(n)
    return BoundValue.from_log(0.5 * n * math.log1p(r) - 0.5 * math.sqrt(n) * delta)


def cosh_identity(a: float, n: int) -> float:
    """``cosh(a)**n``."""
    return math.cosh(a) ** n


def cosh_identity_brute(a: float, n: int) -> float:
    """Average of ``exp(a * sum(x))`` over all ``2**n`` vectors ``x`` in ``{-1, 1}^n``."""
    if n > 20:
        raise ParameterError(f"brute-force sum is limited to n <= 20, got {n}")
    return math.fsum(math.exp(a * sum(x)) for x in itertools.product((-1, 1), repeat=n)) / 2 ** n


def _log_sub(log_x: float, log_y: float) -> float:
    """``log(exp(log_x) - exp(log_y))``; ``nan`` when the difference is not positive."""
    if log_y == -math.inf:
        return log_x
    if log_y >= log_x:
        return math.nan
    return log_x + math.log(-math.expm1(log_y - log_x))


def _log_h1_moments(scheme: Scheme, n: int, sigma_w_sq: float, power: float):
    """(log E[U1], log numerator) for Alice's slot under H1."""
    r = power / sigma_w_sq
    if scheme is Scheme.GAUSSIAN:
        if r >= 0.5:
            raise DomainError("the H1 second moment needs P_f < sigma_w^2 / 2")
        log_mean = -0.5 * n * math.log1p(-r * r)
        log_second = -n * math.log1p(r) - 0.5 * n * math.log1p(-2 * r)
        return log_mean, _log_sub(log_second, 2 * log_mean)
    log_mean = n * float(logcosh(r))
    return log_mean, log_mean + n * float(logcosh(2 * r))


def chebyshev_slot_term_bound(scheme, hypothesis, n: int, T: int, sigma_w_sq: float,
                              power: float, delta: float) -> BoundValue:
    """Chebyshev bound on ``P(|U_{t_A}| / (sigma_U sqrt(T-1)) > delta)``.

    Under H0 the bound is ``sigma_U^2 / (delta sigma_U sqrt(T-1) - 1)^2``.
    Under H1 the numerator is ``Var[U1]`` (Gaussian) or its upper bound
    ``cosh^n(a^2/s^2) cosh^n(2a^2/s^2)`` (binary) and the ``1`` becomes
    ``E[U1]``. ``power`` is P_f or a**2.
    """
    scheme, hypothesis = Scheme(scheme), Hypothesis(hypothesis)
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if T < 2:
        raise ParameterError(f"T must be >= 2, got {T}")
    mom = moments_U(scheme, n, sigma_w_sq, power)
    if mom.log_sigma_U_sq == -math.inf:
        raise DomainError("the slot-term bound needs sigma_U > 0 (power > 0)")
    log_x = math.log(delta) + 0.5 * mom.log_sigma_U_sq + 0.5 * math.log(T - 1)
    if hypothesis is Hypothesis.H0:
        log_mean, log_num = 0.0, mom.log_sigma_U_sq
    else:
        log_mean, log_num = _log_h1_moments(scheme, n, sigma_w_sq, power)
    log_den = _log_sub(log_x, log_mean)
    if math.isnan(log_den):
        return VACUOUS
    return BoundValue.from_log(log_num - 2 * log_den)


def decoding_bound(scheme, slot_known: bool, M: float, n: int, T: int,
                   power: float, sigma_b_sq: float) -> BoundValue:
    """Union bound on Bob's decoding error for ``2**M`` random codewords.

    Gaussian, known slot:    ``2^(M - (n/2) log2(1 + P_f / (2 s_b^2)))``
    Gaussian, unknown slot:  ``T 2^(M - (n/2) log2(1 + P_f / (4 s_b^2)))``
    Binary, known slot:      ``2^(M - n (1 - log2(1 + exp(-a^2 / (2 s_b^2)))))``
    Binary, unknown slot:    ``(T-1) 2^(M - n a^2 log2(e) / (8 s_b^2))
                              + 2^(M - n min(known exponent, a^2 log2(e) / (8 s_b^2)))``
    """
    scheme = Scheme(scheme)
    if M < 0:
        raise ParameterError(f"M must be >= 0, got {M}")
    if scheme is Scheme.GAUSSIAN:
        snr = power / (2 * sigma_b_sq) if slot_known else power / (4 * sigma_b_sq)
        log2_val = M - 0.5 * n * math.log1p(snr) / math.log(2)
        if not slot_known:
            log2_val += math.log2(T)
        return BoundValue.from_log2(log2_val)
    known = binary_known_slot_exponent(power, sigma_b_sq)
    if slot_known:
        return BoundValue.from_log2(M - n * known)
    blank = power * LOG2E / (8 * sigma_b_sq)
    log2_terms = [M - n * min(known, blank)]
    if T > 1:
        log2_terms.append(math.log2(T - 1) + M - n * blank)
    log2_val = max(log2_terms) + math.log2(sum(2.0 ** (v - max(log2_terms)) for v in log2_terms))
    return BoundValue.from_log2(log2_val)


def noncentral_chi2_bounds(n: int, sigma_w_sq: float, symbol_power: float) -> tuple[float, float]:
    """Lower bound on the mean and upper bound on the variance of Alice's busiest slot power.

    With total codeword energy ``n P_f`` split over at most two slots, the
    larger share ``P_A`` satisfies ``n P_f / 2 <= P_A <= n P_f``.
    """
    if symbol_power < 0:
        raise ParameterError(f"symbol power must be >= 0, got {symbol_power}")
    mean_lb = sigma_w_sq * n + n * symbol_power / 2
    var_ub = 2 * n * sigma_w_sq ** 2 + 4 * n * sigma_w_sq * symbol_power
    return mean_lb, var_ub


def converse_md_bound(n: int, T: int, sigma_w_sq: float, P_f: float,
                      delta_used: float | None = None, target_p_fa: float = 0.05) -> BoundValue:
    """Chebyshev bound on the max-power detector's missed-detection probability.

    ``var_ub / (mean_lb - tau)^2`` with ``tau = sigma_w^2 (n + sqrt(n) delta)``;
    ``delta`` defaults to the calibrated value for ``target_p_fa``.
    """
    if delta_used is None:
        delta_used = maxpower_delta(T, target_p_fa)
    mean_lb, var_ub = noncentral_chi2_bounds(n, sigma_w_sq, P_f)
    margin = mean_lb - sigma_w_sq * (n + math.sqrt(n) * delta_used)
    if margin <= 0:
        return VACUOUS
    value = var_ub / margin ** 2
    return BoundValue(value, value >= 1)
