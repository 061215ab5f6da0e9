"""Per-slot detector statistics sampled without building whole frames.

Willie's statistics depend on a frame only through independent per-slot
quantities, so a trial with ``T`` slots can draw those quantities from
their exact distributions instead of materialising ``n*T`` samples:

* Gaussian ensemble and max-power detector: quiet slot power
  ``Y_t = sigma_w^2 chi^2_n``.
* Binary ensemble: quiet-slot ``log U_t`` is a sum of ``n`` i.i.d. terms
  ``log cosh(b g) - b^2/2`` (``g ~ N(0,1)``, ``b = a / sigma_w``). Its law is
  computed once on a fine lattice by FFT convolution of the exact
  per-term distribution and sampled with Walker's alias method.

Alice's slot under H1 is always simulated symbol by symbol.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import erfc

from .detection import binary_log_u, gaussian_log_u, logcosh
from .model import ParameterError, Scheme

_LATTICE_SIZE = 2 ** 21
_WINDOW_SD = 50.0
# FFT round-off leaves ~1e-17 noise everywhere; masses below this fraction
# of the peak are dropped (they are never drawn in practice anyway)
_PMF_REL_FLOOR = 1e-14


def quiet_slot_powers(n: int, count: int, sigma_w_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Powers of ``count`` noise-only slots."""
    return sigma_w_sq * rng.chisquare(n, size=count)


def _arccosh_exp(v):
    # arccosh(e^v) = v + log(1 + sqrt(1 - e^-2v)), stable for small v
    return v + np.log1p(np.sqrt(-np.expm1(-2.0 * v)))


def _logcosh_moments(b: float) -> tuple[float, float]:
    x, w = hermegauss(200)
    w = w / w.sum()
    v = logcosh(b * x)
    mean = float(w @ v)
    return mean, float(math.sqrt(max(w @ (v - mean) ** 2, 0.0)))


class BinarySlotSampler:
    """Exact-law sampler (up to lattice rounding) of a quiet slot's binary ``log U``.

    Parameters
    ----------
    n : int
        Slot length.
    b : float
        Normalised amplitude ``a / sigma_w``; must be positive.
    """

    def __init__(self, n: int, b: float):
        if b <= 0:
            raise ParameterError("the lattice sampler needs a positive amplitude")
        self.n, self.b = n, b
        mean_v, sd_v = _logcosh_moments(b)
        span = n * mean_v + _WINDOW_SD * math.sqrt(n) * sd_v
        self.step = span / (0.9 * _LATTICE_SIZE)
        # per-term mass on lattice points k*step, bins of width step centred on them
        edges = (np.arange(_LATTICE_SIZE) + 0.5) * self.step
        survival = erfc(_arccosh_exp(edges) / (b * math.sqrt(2.0)))
        term = -np.diff(np.concatenate(([1.0], survival)))
        np.clip(term, 0.0, None, out=term)
        term /= term.sum()
        pmf = np.fft.irfft(np.fft.rfft(term) ** n, _LATTICE_SIZE)
        support = np.flatnonzero(pmf >= _PMF_REL_FLOOR * pmf.max())
        lo, hi = support[0], support[-1] + 1
        pmf = np.clip(pmf, 0.0, None)
        pmf = pmf[lo:hi] / pmf[lo:hi].sum()
        self.values = -n * b * b / 2.0 + (np.arange(lo, hi) * self.step)
        self.pmf = pmf
        self._prob, self._alias = _alias_table(pmf)

    def moment_U(self, k: int = 1) -> float:
        """``E[U^k]`` under the lattice law (for checks against closed forms)."""
        return float(self.pmf @ np.exp(k * self.values))

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        m = len(self._prob)
        u = rng.random(size) * m
        idx = u.astype(np.int64)
        np.minimum(idx, m - 1, out=idx)
        keep = (u - idx) < self._prob[idx]
        return self.values[np.where(keep, idx, self._alias[idx])]


def _alias_table(pmf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose's alias method."""
    m = len(pmf)
    scaled = pmf * m
    prob = np.ones(m)
    alias = np.arange(m)
    small = list(np.flatnonzero(scaled < 1.0))
    large = list(np.flatnonzero(scaled >= 1.0))
    scaled = scaled.tolist()
    while small and large:
        s, g = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    return prob, alias


@functools.lru_cache(maxsize=16)
def binary_slot_sampler(n: int, b: float) -> BinarySlotSampler:
    return BinarySlotSampler(n, b)


def quiet_log_u(scheme, n: int, count: int, sigma_w_sq: float, power: float,
                rng: np.random.Generator) -> np.ndarray:
    """``log U_t`` for ``count`` noise-only slots. ``power`` is P_f or a**2."""
    scheme = Scheme(scheme)
    if power == 0:
        return np.zeros(count)
    if scheme is Scheme.GAUSSIAN:
        return gaussian_log_u(quiet_slot_powers(n, count, sigma_w_sq, rng), n, sigma_w_sq, power)
    return binary_slot_sampler(n, math.sqrt(power / sigma_w_sq)).sample(count, rng)


def alice_codeword(scheme, n: int, power: float, rng: np.random.Generator) -> np.ndarray:
    """One codeword drawn from the random-coding ensemble."""
    if Scheme(scheme) is Scheme.GAUSSIAN:
        return rng.normal(0.0, math.sqrt(power), size=n) if power > 0 else np.zeros(n)
    return math.sqrt(power) * (rng.integers(0, 2, size=n) * 2.0 - 1.0)


def alice_log_u(scheme, n: int, sigma_w_sq: float, power: float, rng: np.random.Generator) -> float:
    """``log U`` of Alice's slot when she transmits a fresh ensemble codeword."""
    scheme = Scheme(scheme)
    y = alice_codeword(scheme, n, power, rng) + rng.normal(0.0, math.sqrt(sigma_w_sq), size=n)
    if scheme is Scheme.GAUSSIAN:
        return float(gaussian_log_u(np.square(y).sum(), n, sigma_w_sq, power))
    return float(binary_log_u(y[None, :], sigma_w_sq, math.sqrt(power))[0])
