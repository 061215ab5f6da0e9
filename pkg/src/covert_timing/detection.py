"""Willie's detectors.

Likelihood ratios are kept in the log domain: per-slot terms ``log U_t``
and ``log Lambda = logsumexp(log U) - log T``. ``U_t`` and its standard
deviation grow geometrically in ``n``, so nothing is exponentiated until the
rescaled statistic is formed.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import Frame, max_slot_power, slot_powers
from .model import DomainError, ParameterError, Scheme

LN2 = math.log(2.0)
_LOGCOSH_SWITCH = 20.0
_BRUTE_MAX_N = 20


class Hypothesis(enum.IntEnum):
    H0 = 0
    H1 = 1


@dataclass
class LrtStatistic:
    log_lambda: float
    per_slot_log_U: np.ndarray


@dataclass(frozen=True)
class UMoments:
    mu_U: float
    log_sigma_U_sq: float

    @property
    def sigma_U(self) -> float:
        return math.exp(0.5 * self.log_sigma_U_sq)


@dataclass(frozen=True)
class RescaledStatistic:
    L: float
    S_part: float | None = None
    V_part: float | None = None


@dataclass(frozen=True)
class MaxPowerDetector:
    tau: float
    delta: float
    n: int
    T: int
    sigma_w_sq: float


def logcosh(x):
    """``log(cosh(x))`` without overflow or loss of precision near zero."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x <= _LOGCOSH_SWITCH
    out = np.empty_like(x)
    xs = x[small]
    # cosh x = 1 + 2 sinh^2(x/2)
    out[small] = np.log1p(2.0 * np.sinh(0.5 * xs) ** 2)
    xl = x[~small]
    out[~small] = xl - LN2 + np.log1p(np.exp(-2.0 * xl))
    return out if out.ndim else float(out)


def log_expm1(x: float) -> float:
    """``log(exp(x) - 1)`` for ``x >= 0``; ``-inf`` at zero."""
    if x == 0:
        return -math.inf
    if x > 30:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def lrt_from_log_u(log_u) -> LrtStatistic:
    """Assemble ``log Lambda = logsumexp(log U) - log T`` from per-slot terms."""
    log_u = np.asarray(log_u, dtype=float)
    return LrtStatistic(float(logsumexp(log_u) - math.log(len(log_u))), log_u)


def gaussian_log_u(Y, n: int, sigma_w_sq: float, P_f: float) -> np.ndarray:
    """Per-slot ``log U_t`` from slot powers for the Gaussian ensemble."""
    if P_f < 0:
        raise ParameterError(f"P_f must be >= 0, got {P_f}")
    Y = np.asarray(Y, dtype=float)
    prefactor = -0.5 * n * math.log1p(P_f / sigma_w_sq)
    return prefactor + P_f * Y / (2.0 * sigma_w_sq * (sigma_w_sq + P_f))


def log_lrt_gaussian(frame: Frame, sigma_w_sq: float, P_f: float) -> LrtStatistic:
    """Log likelihood ratio of a frame against a Gaussian-ensemble transmission.

    ``log U_t = (n/2) log(sigma^2 / (sigma^2 + P_f)) + P_f Y_t / (2 sigma^2 (sigma^2 + P_f))``.
    """
    return lrt_from_log_u(gaussian_log_u(slot_powers(frame), frame.n, sigma_w_sq, P_f))


def binary_log_u(slots: np.ndarray, sigma_w_sq: float, a: float) -> np.ndarray:
    """Per-slot ``log U_t`` for the +-a ensemble from a ``(T, n)`` sample array.

    Uses ``2^-n sum_b exp((a/s^2) sum_i y_i b_i) = prod_i cosh(a y_i / s^2)``.
    """
    if a < 0:
        raise ParameterError(f"a must be >= 0, got {a}")
    slots = np.atleast_2d(np.asarray(slots, dtype=float))
    n = slots.shape[1]
    return -n * a * a / (2.0 * sigma_w_sq) + logcosh(a * slots / sigma_w_sq).sum(axis=1)


def log_lrt_binary(frame: Frame, sigma_w_sq: float, a: float) -> LrtStatistic:
    """Log likelihood ratio of a frame against a binary-ensemble transmission."""
    return lrt_from_log_u(binary_log_u(frame.slots(), sigma_w_sq, a))


def _sign_vectors(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def log_lrt_binary_brute(frame: Frame, sigma_w_sq: float, a: float) -> LrtStatistic:
    """Same statistic as :func:`log_lrt_binary`, summing all ``2**n`` sign vectors."""
    n = frame.n
    if n > _BRUTE_MAX_N:
        raise ParameterError(f"brute-force LRT is limited to n <= {_BRUTE_MAX_N}, got {n}")
    B = _sign_vectors(n)
    exponents = (a / sigma_w_sq) * frame.slots() @ B.T
    log_u = -n * a * a / (2.0 * sigma_w_sq) - n * LN2 + logsumexp(exponents, axis=1)
    return lrt_from_log_u(log_u)


def moments_U(scheme, n: int, sigma_w_sq: float, power: float) -> UMoments:
    """Mean and log-variance of a quiet slot's ``U_t``.

    ``power`` is P_f (Gaussian) or a**2 (binary). The mean is exactly 1;
    the variance is ``(s^4 / (s^4 - P_f^2))^(n/2) - 1`` or
    ``cosh^n(a^2 / s^2) - 1``.
    """
    scheme = Scheme(scheme)
    if power < 0:
        raise ParameterError(f"power must be >= 0, got {power}")
    if scheme is Scheme.GAUSSIAN:
        r = power / sigma_w_sq
        if r >= 1:
            raise DomainError("Gaussian U_t has no finite variance for P_f >= sigma_w^2")
        exponent = -0.5 * n * math.log1p(-r * r)
    else:
        exponent = n * float(logcosh(power / sigma_w_sq))
    return UMoments(1.0, log_expm1(exponent))


def rescale_statistic(stat: LrtStatistic, T: int, moments: UMoments,
                      t_A: int | None = None) -> RescaledStatistic:
    """Map ``Lambda`` to ``L = (T Lambda - (T-1) mu_U) / (sigma_U sqrt(T-1))``.

    With ``t_A`` given, also return the split ``L = S + V`` where
    ``V = U_{t_A} / (sigma_U sqrt(T-1))``.
    """
    if T < 2:
        raise ParameterError(f"rescaling needs T >= 2, got {T}")
    if moments.log_sigma_U_sq == -math.inf:
        raise DomainError("rescaling needs sigma_U > 0")
    log_u = np.asarray(stat.per_slot_log_U, dtype=float)
    log_scale = 0.5 * moments.log_sigma_U_sq + 0.5 * math.log(T - 1)
    lse = float(logsumexp(log_u))
    L = math.exp(lse - log_scale) - (T - 1) * moments.mu_U * math.exp(-log_scale)
    if t_A is None:
        return RescaledStatistic(L)
    V = math.exp(log_u[t_A - 1] - log_scale)
    return RescaledStatistic(L, L - V, V)


def lrt_decide(L: float, tau: float, rng: np.random.Generator) -> Hypothesis:
    """H1 above the threshold, H0 below, a fair coin on equality."""
    if L > tau:
        return Hypothesis.H1
    if L < tau:
        return Hypothesis.H0
    return Hypothesis(int(rng.integers(0, 2)))


def maxpower_delta(T: int, target_p_fa: float) -> float:
    """``delta = 2 sqrt(-ln(1 - (1 - P_FA)^(1/T)))``."""
    if not 0 < target_p_fa < 1:
        raise ParameterError(f"target false-alarm probability must lie in (0, 1), got {target_p_fa}")
    per_slot = -math.expm1(math.log1p(-target_p_fa) / T)
    return 2.0 * math.sqrt(max(-math.log(per_slot), 0.0))


def maxpower_threshold(n: int, T: int, sigma_w_sq: float, target_p_fa: float) -> MaxPowerDetector:
    """Threshold ``tau = sigma_w^2 (n + sqrt(n) delta)`` on the largest slot power."""
    delta = maxpower_delta(T, target_p_fa)
    return MaxPowerDetector(sigma_w_sq * (n + math.sqrt(n) * delta), delta, n, T, sigma_w_sq)


def maxpower_decide(frame: Frame, detector: MaxPowerDetector) -> Hypothesis:
    if (frame.n, frame.T) != (detector.n, detector.T):
        raise ParameterError("detector was built for a different frame shape")
    y_max, _ = max_slot_power(frame)
    return Hypothesis.H1 if y_max > detector.tau else Hypothesis.H0
