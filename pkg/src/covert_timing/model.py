"""Scenario parameters, slot-count schedules, power budgets and throughput.

All ``log T`` terms in budgets use the natural logarithm; ``log2`` only
appears in bit counts.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when an argument lies outside its documented range."""


class DomainError(ValueError):
    """Raised when a formula is evaluated outside the region where it exists."""


class Scheme(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BINARY = "binary"


@dataclass(frozen=True)
class ScenarioParams:
    """Channel and coding parameters for one experiment.

    Parameters
    ----------
    n : int
        Symbol periods per slot.
    T : int
        Number of slots in the frame.
    sigma_w_sq, sigma_b_sq : float
        Noise power on Willie's and Bob's channel.
    c_P : float
        Power budget constant in (0, 1).
    gamma : float
        Rate back-off constant in (0, 1).
    scheme : Scheme
        Codebook ensemble (i.i.d. Gaussian or uniform +-a).
    slot_known_to_bob : bool
        Whether Bob is told the slot Alice uses.
    """

    n: int
    T: int
    sigma_w_sq: float = 1.0
    sigma_b_sq: float = 1.0
    c_P: float = 0.5
    gamma: float = 0.5
    scheme: Scheme = Scheme.GAUSSIAN
    slot_known_to_bob: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if int(self.T) != self.T or self.T < 1:
            raise ParameterError(f"T must be a positive integer, got {self.T!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "T", int(self.T))
        if not self.sigma_w_sq > 0:
            raise ParameterError(f"sigma_w_sq must be positive, got {self.sigma_w_sq!r}")
        if not self.sigma_b_sq > 0:
            raise ParameterError(f"sigma_b_sq must be positive, got {self.sigma_b_sq!r}")
        if not 0 < self.c_P < 1:
            raise ParameterError(f"c_P must lie in (0, 1), got {self.c_P!r}")
        if not 0 < self.gamma < 1:
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma!r}")


class ScheduleKind(str, enum.Enum):
    POLYNOMIAL = "poly"
    EXPONENTIAL = "exp"
    FIXED = "fixed"


@dataclass(frozen=True)
class TScheduleSpec:
    """Slot count as a function of slot length.

    ``poly:k`` gives ceil(n**k), ``exp:c`` gives ceil(e**(c*n)) and
    ``fixed:T`` a constant.
    """

    kind: ScheduleKind
    value: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.kind is ScheduleKind.FIXED:
            if int(self.value) != self.value or self.value < 1:
                raise ParameterError(f"fixed schedule needs an integer T >= 1, got {self.value!r}")
        elif not (math.isfinite(self.value) and self.value >= 0):
            raise ParameterError(f"{self.kind.value} schedule needs a finite exponent >= 0")

    @classmethod
    def parse(cls, text: str) -> "TScheduleSpec":
        """Parse ``poly:2``, ``exp:0.1`` or ``fixed:100``."""
        try:
            kind, value = text.split(":", 1)
            kind = ScheduleKind(kind.strip().lower())
            value = float(value)
        except ValueError as exc:
            raise ParameterError(f"bad schedule {text!r}; expected poly:k, exp:c or fixed:T") from exc
        return cls(kind, value)

    def __str__(self):
        v = int(self.value) if float(self.value).is_integer() else self.value
        return f"{self.kind.value}:{v}"


# exp(709.78) is the largest finite double
_MAX_EXP_ARG = 709.0


def schedule_T(spec: TScheduleSpec, n: int) -> int:
    """Evaluate the slot count T(n) for a schedule."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if spec.kind is ScheduleKind.FIXED:
        return int(spec.value)
    if spec.kind is ScheduleKind.POLYNOMIAL:
        k = spec.value
        if float(k).is_integer():
            return max(1, n ** int(k))
        return max(1, math.ceil(n ** k))
    arg = spec.value * n
    if arg > _MAX_EXP_ARG:
        raise OverflowError(f"exp({arg}) slot count is not representable")
    return max(1, math.ceil(math.exp(arg)))


def check_regime(params: ScenarioParams) -> list[str]:
    """Return (and emit as warnings) notes on asymptotic-regime assumptions."""
    notes = []
    if params.T < 2:
        notes.append("T < 2: the slot-timing gain is absent and the power budget is zero")
    if math.log(params.T) >= params.n:
        notes.append("log T >= n: the budget cap min{., 1/2} is active")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return notes


@dataclass(frozen=True)
class PowerBudget:
    """Per-symbol transmit power.

    ``symbol_power`` is P_f for the Gaussian ensemble and a**2 for the
    binary ensemble.
    """

    scheme: Scheme
    symbol_power: float

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.symbol_power)


def power_budget(params: ScenarioParams) -> PowerBudget:
    """Largest symbol power that keeps Willie's optimal detector near chance.

    Gaussian: ``c_P sigma_w^2 min(sqrt(ln T / n), 1/2)``.
    Binary:   ``c_P sigma_w^2 min(sqrt(ln T) / sqrt(2 n), 1/2)``.
    """
    log_T = math.log(params.T)
    if params.scheme is Scheme.GAUSSIAN:
        scale = math.sqrt(log_T / params.n)
    else:
        scale = math.sqrt(log_T) / math.sqrt(2 * params.n)
    return PowerBudget(params.scheme, params.c_P * params.sigma_w_sq * min(scale, 0.5))


def throughput_bits(params: ScenarioParams, budget: PowerBudget) -> float:
    """Number of covert bits M Alice can send reliably at this budget."""
    n, gamma, sb2 = params.n, params.gamma, params.sigma_b_sq
    p = budget.symbol_power
    if p == 0:
        return 0.0
    if budget.scheme is Scheme.GAUSSIAN:
        snr = p / (2 * sb2) if params.slot_known_to_bob else p / (4 * sb2)
        return n * gamma / 2 * math.log1p(snr) / math.log(2)
    known = binary_known_slot_exponent(p, sb2)
    if params.slot_known_to_bob:
        return n * gamma * known
    return n * gamma * min(known, p * math.log2(math.e) / (8 * sb2))


def binary_known_slot_exponent(a_sq: float, sigma_b_sq: float) -> float:
    """``1 - log2(1 + exp(-a^2 / (2 sigma_b^2)))``, computed without cancellation."""
    y = a_sq / (2 * sigma_b_sq)
    # 1 - log2(1 + e^-y) = -log2(1 + (e^-y - 1) / 2)
    return -math.log1p(0.5 * math.expm1(-y)) / math.log(2)


def monte_carlo_bits(M: float, cap: int = 12) -> tuple[int, bool]:
    """Integer message length for simulation: ``max(1, floor(M))`` capped at ``cap``.

    Returns the integer length and whether it differs from ``floor(M)``.
    """
    m_floor = math.floor(M) if math.isfinite(M) else cap
    m_int = min(max(1, m_floor), cap)
    return m_int, m_int != m_floor
