"""Seeded Monte Carlo experiments.

Every trial draws from its own generator,
``default_rng(SeedSequence(seed, spawn_key=(*stream, hypothesis, index)))``,
so results do not depend on how trials are spread over worker processes.
Trials are split 50/50 between H0 and H1 (equal priors).

Willie's statistic is computed either from whole simulated frames
(``method="frame"``) or from exactly distributed per-slot quantities
(``method="slot"``, see :mod:`covert_timing.slotstats`); ``"auto"`` uses
frames while ``n*T`` is small.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as sps

from . import slotstats
from .bounds import BoundValue, chebyshev_slot_term_bound, converse_md_bound, decoding_bound
from .channel import max_slot_power, transmit_frame
from .coding import augment_origin, binary_codebook, gaussian_codebook, ml_decode_frame, ml_decode_slot
from .detection import (Hypothesis, log_lrt_binary, log_lrt_gaussian, lrt_from_log_u,
                        maxpower_threshold, moments_U, rescale_statistic)
from .model import (DomainError, ParameterError, PowerBudget, ScenarioParams, Scheme,
                    TScheduleSpec, monte_carlo_bits, power_budget, schedule_T, throughput_bits)

FRAME_METHOD_MAX_SAMPLES = 200_000
MAX_FRAME_SAMPLES = 20_000_000
_CHUNK = 250


@dataclass
class TrialSummary:
    trials: int
    fa_count: int = 0
    md_count: int = 0
    decode_fail_count: int = 0
    p_e_willie: float = math.nan
    p_e_bob: float = math.nan
    wilson_ci: tuple[float, float] = (math.nan, math.nan)
    bound_values: dict[str, BoundValue] = field(default_factory=dict)
    seed: int | None = None
    threshold_grid_argmin: float | None = None

    @property
    def p_fa(self) -> float:
        return self.fa_count / (self.trials // 2)

    @property
    def p_md(self) -> float:
        return self.md_count / (self.trials // 2)


@dataclass
class RocCurve:
    """ROC points ``(P_FA, 1 - P_MD)`` sorted by P_FA, with per-hypothesis trial counts."""

    points: np.ndarray
    trials_per_hypothesis: int

    def auc(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2))


def wilson_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ParameterError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    z = float(sps.norm.ppf(0.5 + level / 2))
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def ks_distance(samples, reference="normal") -> float:
    """Kolmogorov-Smirnov distance to the standard normal or to a second sample."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 10:
        raise ParameterError("ks_distance needs at least 10 samples")
    if isinstance(reference, str):
        if reference != "normal":
            raise ParameterError(f"unknown reference {reference!r}")
        return float(sps.kstest(samples, "norm").statistic)
    return float(sps.ks_2samp(samples, np.asarray(reference, dtype=float)).statistic)


def _trial_rng(seed, stream, hyp, idx) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(*stream, int(hyp), idx)))


def _run_chunks(fn, job, keys, workers: int) -> list:
    """Evaluate ``fn(job, key)`` for each key, in key order."""
    chunks = [keys[i:i + _CHUNK] for i in range(0, len(keys), _CHUNK)]
    if workers <= 1:
        out = [fn(job, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(fn, [job] * len(chunks), chunks))
    return [x for part in out for x in part]


# ---------------------------------------------------------------- detection

@dataclass(frozen=True)
class _DetectionJob:
    params: ScenarioParams
    detector: str
    power: float
    offset: int
    method: str
    seed: int
    stream: tuple

    def statistic(self, hyp: int, idx: int) -> float:
        p = self.params
        rng = _trial_rng(self.seed, self.stream, hyp, idx)
        last_slot = p.T - 1 if self.offset else p.T
        t_A = int(rng.integers(1, last_slot + 1))
        if self.method == "frame":
            return self._frame_statistic(hyp, t_A, rng)
        if self.detector == "maxpower":
            return self._slot_maxpower(hyp, rng)
        return self._slot_lrt(hyp, rng)

    def _lrt_value(self, log_u: np.ndarray) -> float:
        stat = lrt_from_log_u(log_u)
        moments = _moments_or_none(self.params, self.power)
        if moments is None:
            return stat.log_lambda
        return rescale_statistic(stat, self.params.T, moments).L

    def _frame_statistic(self, hyp, t_A, rng) -> float:
        p = self.params
        codeword = None
        if hyp == Hypothesis.H1:
            codeword = slotstats.alice_codeword(p.scheme, p.n, self.power, rng)
        frame = transmit_frame(codeword, t_A, self.offset, p, rng)
        if self.detector == "maxpower":
            return max_slot_power(frame)[0]
        if p.scheme is Scheme.GAUSSIAN:
            stat = log_lrt_gaussian(frame, p.sigma_w_sq, self.power)
        else:
            stat = log_lrt_binary(frame, p.sigma_w_sq, math.sqrt(self.power))
        return self._lrt_value(stat.per_slot_log_U)

    def _slot_lrt(self, hyp, rng) -> float:
        p = self.params
        if hyp == Hypothesis.H0:
            return self._lrt_value(slotstats.quiet_log_u(p.scheme, p.n, p.T, p.sigma_w_sq, self.power, rng))
        quiet = slotstats.quiet_log_u(p.scheme, p.n, p.T - 1, p.sigma_w_sq, self.power, rng)
        alice = slotstats.alice_log_u(p.scheme, p.n, p.sigma_w_sq, self.power, rng)
        return self._lrt_value(np.append(quiet, alice))

    def _slot_maxpower(self, hyp, rng) -> float:
        p = self.params
        s2 = p.sigma_w_sq
        if hyp == Hypothesis.H0:
            return float(slotstats.quiet_slot_powers(p.n, p.T, s2, rng).max())
        busy = 2 if self.offset else 1
        quiet = slotstats.quiet_slot_powers(p.n, p.T - busy, s2, rng)
        c = slotstats.alice_codeword(p.scheme, p.n, self.power, rng)
        split = p.n - self.offset
        energies = [np.square(c[:split]).sum(), np.square(c[split:]).sum()][:busy]
        # a slot with signal energy E has power s2 * noncentral chi2(n, E / s2)
        loud = [s2 * (rng.noncentral_chisquare(p.n, e / s2) if e > 0 else rng.chisquare(p.n))
                for e in energies]
        return float(max(quiet.max(initial=-math.inf), *loud))


def _detection_chunk(job: _DetectionJob, keys) -> list[float]:
    return [job.statistic(h, i) for h, i in keys]


def _moments_or_none(params: ScenarioParams, power: float):
    """U moments when the rescaled statistic exists, else None (fall back to log Lambda)."""
    if params.T < 2 or power == 0:
        return None
    try:
        return moments_U(params.scheme, params.n, params.sigma_w_sq, power)
    except DomainError:
        return None


def _resolve_power(params: ScenarioParams, power) -> float:
    if power is None:
        return power_budget(params).symbol_power
    if power < 0:
        raise ParameterError(f"power must be >= 0, got {power}")
    return float(power)


def _resolve_method(params: ScenarioParams, method: str, offset: int, detector: str) -> str:
    if method not in ("auto", "frame", "slot"):
        raise ParameterError(f"method must be auto, frame or slot, got {method!r}")
    if method == "auto":
        method = "frame" if params.n * params.T <= FRAME_METHOD_MAX_SAMPLES else "slot"
    if method == "slot" and offset and detector == "lrt":
        raise ParameterError("offset transmissions with the LRT need method='frame'")
    if method == "frame" and params.n * params.T > MAX_FRAME_SAMPLES:
        raise ParameterError(f"n*T = {params.n * params.T} is too large for whole-frame simulation")
    return method


def _check_trials(trials, minimum):
    if int(trials) != trials or trials < minimum or trials % 2:
        raise ParameterError(f"trials must be an even integer >= {minimum}, got {trials!r}")


def _detection_statistics(params, detector, trials, seed, power, offset, method, workers, stream):
    if detector not in ("lrt", "maxpower"):
        raise ParameterError(f"detector must be 'lrt' or 'maxpower', got {detector!r}")
    if int(offset) != offset or not 0 <= offset < params.n:
        raise ParameterError(f"offset must lie in 0..{params.n - 1}, got {offset!r}")
    if offset and params.T < 2:
        raise ParameterError("an offset transmission needs T >= 2")
    power = _resolve_power(params, power)
    method = _resolve_method(params, method, offset, detector)
    job = _DetectionJob(params, detector, power, int(offset), method, int(seed), tuple(stream))
    half = trials // 2
    keys = [(h, i) for h in (0, 1) for i in range(half)]
    values = np.array(_run_chunks(_detection_chunk, job, keys, workers))
    return values[:half], values[half:], power


def min_error_threshold(stat_h0, stat_h1) -> tuple[float, int, int]:
    """Threshold minimising FA + MD for the rule "H1 iff statistic > tau".

    Candidate thresholds are ``-inf`` and every observed value. Returns
    ``(tau, fa_count, md_count)``; ties go to the smallest threshold.
    """
    s0, s1 = np.sort(stat_h0), np.sort(stat_h1)
    grid = np.concatenate(([-np.inf], np.unique(np.concatenate((s0, s1)))))
    fa = len(s0) - np.searchsorted(s0, grid, side="right")
    md = np.searchsorted(s1, grid, side="right")
    k = int(np.argmin(fa / len(s0) + md / len(s1)))
    return float(grid[k]), int(fa[k]), int(md[k])


def estimate_detection_error(params: ScenarioParams, detector: str = "lrt", trials: int = 10_000,
                             seed: int = 0, power: float | None = None, offset: int = 0,
                             target_p_fa: float = 0.05, method: str = "auto", workers: int = 1,
                             stream: tuple = ()) -> TrialSummary:
    """Willie's empirical error ``(P_FA + P_MD) / 2``.

    Parameters
    ----------
    detector : {"lrt", "maxpower"}
        The LRT uses the best threshold in hindsight over all observed
        statistics (the rescaled ``L`` when it exists, ``log Lambda``
        otherwise). The max-power detector uses its calibrated threshold
        for ``target_p_fa``.
    power : float, optional
        Symbol power (P_f or a**2); defaults to the covert budget.
    offset : int
        Start of the codeword inside slot ``t_A``; non-zero offsets
        straddle two slots.
    """
    _check_trials(trials, 100)
    s0, s1, power = _detection_statistics(params, detector, trials, seed, power, offset,
                                          method, workers, stream)
    bounds: dict[str, BoundValue] = {}
    if detector == "maxpower":
        det = maxpower_threshold(params.n, params.T, params.sigma_w_sq, target_p_fa)
        tau = det.tau
        fa, md = int(np.sum(s0 > tau)), int(np.sum(s1 <= tau))
        bounds["converse_md"] = converse_md_bound(params.n, params.T, params.sigma_w_sq, power,
                                                  det.delta)
    else:
        tau, fa, md = min_error_threshold(s0, s1)
        for hyp in Hypothesis:
            try:
                bounds[f"chebyshev_{hyp.name.lower()}"] = chebyshev_slot_term_bound(
                    params.scheme, hyp, params.n, params.T, params.sigma_w_sq, power, 1.0)
            except (DomainError, ParameterError):
                pass
    half = trials // 2
    return TrialSummary(trials, fa, md, 0, (fa / half + md / half) / 2, math.nan,
                        wilson_ci(fa + md, trials), bounds, seed, tau)


def estimate_roc(params: ScenarioParams, detector: str = "lrt", trials: int = 10_000, seed: int = 0,
                 power: float | None = None, method: str = "auto", workers: int = 1) -> RocCurve:
    """Empirical ROC: one point per threshold over the pooled statistics (plus both extremes)."""
    _check_trials(trials, 1000)
    s0, s1, _ = _detection_statistics(params, detector, trials, seed, power, 0, method, workers, ())
    s0, s1 = np.sort(s0), np.sort(s1)
    grid = np.concatenate(([-np.inf], np.unique(np.concatenate((s0, s1)))))
    p_fa = (len(s0) - np.searchsorted(s0, grid, side="right")) / len(s0)
    p_d = (len(s1) - np.searchsorted(s1, grid, side="right")) / len(s1)
    pts = np.column_stack((np.append(p_fa, 0.0), np.append(p_d, 0.0)))
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return RocCurve(pts[order], trials // 2)


def sample_statistic_distribution(params: ScenarioParams, hypothesis, reps: int, seed: int,
                                  power: float | None = None, return_decomposition: bool = False,
                                  method: str = "auto"):
    """Independent draws of the rescaled statistic ``L`` under one hypothesis.

    With ``return_decomposition`` the arrays ``(L, S, V)`` are returned, where
    ``V`` is the term of Alice's slot (a uniformly drawn slot under H0).
    When ``L`` does not exist (``T < 2``, zero power, or infinite
    ``sigma_U``) the equivalent ``log Lambda`` is returned instead.
    """
    hypothesis = Hypothesis(hypothesis)
    if reps < 100:
        raise ParameterError(f"reps must be >= 100, got {reps}")
    power = _resolve_power(params, power)
    moments = _moments_or_none(params, power)
    if moments is None and return_decomposition:
        raise DomainError("the decomposition needs T >= 2 and a finite, non-zero sigma_U")
    method = _resolve_method(params, method, 0, "lrt")
    out = np.empty((reps, 3))
    p = params
    for i in range(reps):
        rng = _trial_rng(seed, (), hypothesis, i)
        t_A = int(rng.integers(1, p.T + 1))
        if method == "frame":
            cw = slotstats.alice_codeword(p.scheme, p.n, power, rng) if hypothesis else None
            frame = transmit_frame(cw, t_A, 0, p, rng)
            if p.scheme is Scheme.GAUSSIAN:
                log_u = log_lrt_gaussian(frame, p.sigma_w_sq, power).per_slot_log_U
            else:
                log_u = log_lrt_binary(frame, p.sigma_w_sq, math.sqrt(power)).per_slot_log_U
        else:
            log_u = slotstats.quiet_log_u(p.scheme, p.n, p.T, p.sigma_w_sq, power, rng)
            if hypothesis:
                log_u[t_A - 1] = slotstats.alice_log_u(p.scheme, p.n, p.sigma_w_sq, power, rng)
        stat = lrt_from_log_u(log_u)
        if moments is None:
            out[i] = stat.log_lambda, math.nan, math.nan
            continue
        r = rescale_statistic(stat, p.T, moments, t_A)
        out[i] = r.L, r.S_part, r.V_part
    if return_decomposition:
        return out[:, 0], out[:, 1], out[:, 2]
    return out[:, 0]


# ----------------------------------------------------------------- decoding

@dataclass(frozen=True)
class _DecodingJob:
    params: ScenarioParams
    power: float
    M_int: int
    noise_var: float
    seed: int
    stream: tuple

    def failed(self, idx: int) -> bool:
        p = self.params
        rng = _trial_rng(self.seed, self.stream, 0, idx)
        if p.scheme is Scheme.GAUSSIAN:
            book = gaussian_codebook(p.n, self.M_int, self.power, rng)
        else:
            book = binary_codebook(p.n, self.M_int, math.sqrt(self.power), rng)
        m = int(rng.integers(0, book.num_messages))
        t_A = int(rng.integers(1, p.T + 1))
        if p.slot_known_to_bob:
            noise = rng.normal(0.0, math.sqrt(self.noise_var), p.n) if self.noise_var else 0.0
            return ml_decode_slot(book.codewords[m] + noise, book, t_A).message != m
        book = augment_origin(book)
        frame = transmit_frame(book.codewords[m + 1], t_A, 0, p, rng, receiver="bob",
                               noise_var=self.noise_var, message=m + 1)
        return not ml_decode_frame(frame, book).success


def _decoding_chunk(job: _DecodingJob, keys) -> list[bool]:
    return [job.failed(i) for i in keys]


def estimate_decoding_error(params: ScenarioParams, trials: int = 10_000, seed: int = 0,
                            M_int: int | None = None, sigma_b_sq: float | None = None,
                            power: float | None = None, workers: int = 1,
                            stream: tuple = ()) -> TrialSummary:
    """Bob's empirical decoding error with a fresh random codebook per trial.

    Bob decodes slot ``t_A`` alone when the slot is known to him, and every
    slot against the origin-augmented codebook otherwise.

    Parameters
    ----------
    M_int : int, optional
        Message bits; defaults to the throughput at the budget, rounded down
        and clamped to ``1..12``.
    sigma_b_sq : float, optional
        Overrides Bob's noise power (0 gives a noiseless channel).
    """
    if int(trials) != trials or trials < 100:
        raise ParameterError(f"trials must be an integer >= 100, got {trials!r}")
    power = _resolve_power(params, power)
    if M_int is None:
        M_int, _ = monte_carlo_bits(throughput_bits(params, PowerBudget(params.scheme, power)))
    if int(M_int) != M_int or M_int < 1:
        raise ParameterError(f"M_int must be a positive integer, got {M_int!r}")
    noise_var = params.sigma_b_sq if sigma_b_sq is None else float(sigma_b_sq)
    if noise_var < 0:
        raise ParameterError(f"sigma_b_sq must be >= 0, got {noise_var}")
    if not params.slot_known_to_bob and params.n * params.T > MAX_FRAME_SAMPLES:
        raise ParameterError(f"n*T = {params.n * params.T} is too large for whole-frame decoding")
    job = _DecodingJob(params, power, int(M_int), noise_var, int(seed), tuple(stream))
    fails = int(sum(_run_chunks(_decoding_chunk, job, list(range(trials)), workers)))
    bounds = {}
    if noise_var > 0:
        bounds["decoding"] = decoding_bound(params.scheme, params.slot_known_to_bob, M_int,
                                            params.n, params.T, power, noise_var)
    return TrialSummary(trials, 0, 0, fails, math.nan, fails / trials, wilson_ci(fails, trials),
                        bounds, seed, None)


# -------------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("n", "T", "budget", "M", "M_int", "M_clamped", "M_over_sqrt_n_lnT",
                 "p_e_willie", "p_e_willie_lo", "p_e_willie_hi",
                 "p_e_bob", "p_e_bob_lo", "p_e_bob_hi", "decoding_bound", "decoding_bound_vacuous")


def scaling_sweep(schedule: TScheduleSpec, n_list, template: ScenarioParams, trials: int,
                  seed: int, workers: int = 1, simulate: bool = True) -> list[dict]:
    """One row per ``n``: budget, throughput, empirical errors and the decoding bound.

    Bob's error is NaN when whole-frame decoding would be too large.
    With ``simulate=False`` only closed-form columns are filled.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or n_list != sorted(n_list):
        raise ParameterError("n_list must be non-empty and ascending")
    rows = []
    for k, n in enumerate(n_list):
        T = schedule_T(schedule, n)
        params = ScenarioParams(n, T, template.sigma_w_sq, template.sigma_b_sq, template.c_P,
                                template.gamma, template.scheme, template.slot_known_to_bob)
        budget = power_budget(params)
        M = throughput_bits(params, budget)
        M_int, clamped = monte_carlo_bits(M)
        denom = math.sqrt(n * math.log(T)) if T > 1 else 0.0
        bound = decoding_bound(params.scheme, params.slot_known_to_bob, M_int, n, T,
                               budget.symbol_power, params.sigma_b_sq)
        row = dict(n=n, T=T, budget=budget.symbol_power, M=M, M_int=M_int, M_clamped=clamped,
                   M_over_sqrt_n_lnT=M / denom if denom else math.nan,
                   p_e_willie=math.nan, p_e_willie_lo=math.nan, p_e_willie_hi=math.nan,
                   p_e_bob=math.nan, p_e_bob_lo=math.nan, p_e_bob_hi=math.nan,
                   decoding_bound=bound.value, decoding_bound_vacuous=bound.vacuous)
        if simulate:
            det = estimate_detection_error(params, "lrt", trials, seed, workers=workers,
                                           stream=(k, 0))
            row.update(p_e_willie=det.p_e_willie, p_e_willie_lo=det.wilson_ci[0],
                       p_e_willie_hi=det.wilson_ci[1])
            if params.slot_known_to_bob or n * T <= MAX_FRAME_SAMPLES:
                dec = estimate_decoding_error(params, trials, seed, M_int, workers=workers,
                                              stream=(k, 1))
                row.update(p_e_bob=dec.p_e_bob, p_e_bob_lo=dec.wilson_ci[0],
                           p_e_bob_hi=dec.wilson_ci[1])
        rows.append(row)
    return rows


def summary_row(summary: TrialSummary) -> dict:
    """Flatten a TrialSummary into one table row."""
    row = dict(trials=summary.trials, fa_count=summary.fa_count, md_count=summary.md_count,
               decode_fail_count=summary.decode_fail_count, p_e_willie=summary.p_e_willie,
               p_e_bob=summary.p_e_bob, ci_lo=summary.wilson_ci[0], ci_hi=summary.wilson_ci[1],
               threshold=math.nan if summary.threshold_grid_argmin is None
               else summary.threshold_grid_argmin,
               seed=summary.seed)
    for name, b in sorted(summary.bound_values.items()):
        row[f"bound_{name}"] = b.value
        row[f"bound_{name}_vacuous"] = b.vacuous
    return row


# ------------------------------------------------------------------ writers

def format_value(x) -> str:
    """Text form used in tables: 17 significant digits for floats."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def csv_text(rows: list[dict], config: dict | None = None, columns=None) -> str:
    """CSV with ``# key=value`` config lines, a header row and LF line endings."""
    columns = list(columns or (rows[0].keys() if rows else []))
    lines = [f"# {k}={format_value(v)}" for k, v in (config or {}).items()]
    lines.append(",".join(columns))
    lines += [",".join(format_value(r.get(c)) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def write_csv(rows: list[dict], path, config: dict | None = None, columns=None) -> None:
    Path(path).write_text(csv_text(rows, config, columns), newline="\n")


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        # round-trip through 17 significant digits; non-finite values become null
        return float(format(x, ".17g")) if math.isfinite(x) else None
    return x


def json_text(rows: list[dict], config: dict | None = None) -> str:
    """``{"config": {...}, "rows": [{...}, ...]}``; NaN and infinities become null."""
    doc = {"config": {k: _json_value(v) for k, v in (config or {}).items()},
           "rows": [{k: _json_value(v) for k, v in r.items()} for r in rows]}
    return json.dumps(doc, indent=1) + "\n"


def write_json(rows: list[dict], path, config: dict | None = None) -> None:
    Path(path).write_text(json_text(rows, config), newline="\n")
