"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from covert_timing import cli
from covert_timing.bounds import chernoff_chi2_tail, cosh_identity, cosh_identity_brute, decoding_bound
from covert_timing.channel import Frame, sample_awgn, slot_powers, transmit_frame
from covert_timing.detection import (Hypothesis, log_lrt_binary, log_lrt_binary_brute,
                                     log_lrt_gaussian, moments_U)
from covert_timing.harness import (estimate_decoding_error, estimate_detection_error, ks_distance,
                                   sample_statistic_distribution)
from covert_timing.model import ScenarioParams, Scheme, power_budget, throughput_bits

SEED = 20240611


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail, elapsed, limit):
        ok = bool(ok) and elapsed < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail} "
                  f"[{elapsed:.1f}s, limit {limit:.0f}s]")
        assert ok, detail
    return _report


def test_01_binary_lrt_oracle(report):
    t0 = time.perf_counter()
    g = np.random.default_rng(SEED)
    worst = 0.0
    for n in range(1, 13):
        for _ in range(100):
            T = int(g.integers(1, 4))
            frame = Frame(g.normal(0.0, float(g.uniform(0.5, 2.0)), n * T), n, T)
            a, s2 = float(g.uniform(0.05, 2.0)), float(g.uniform(0.5, 2.0))
            x = log_lrt_binary(frame, s2, a).log_lambda
            y = log_lrt_binary_brute(frame, s2, a).log_lambda
            worst = max(worst, abs(x - y) / abs(y))
    report(1, worst < 1e-9, f"max relative gap {worst:.2e} < 1e-9", time.perf_counter() - t0, 10)


def test_02_cosh_identity(report):
    t0 = time.perf_counter()
    worst = 0.0
    for a in (-2.0, -1.0, 0.0, 0.5, 1.0, 3.0):
        for n in range(1, 13):
            ref = cosh_identity_brute(a, n)
            worst = max(worst, abs(cosh_identity(a, n) - ref) / ref)
    report(2, worst < 1e-12, f"max relative gap {worst:.2e} < 1e-12", time.perf_counter() - t0, 1)


def test_03_moment_formulas(report):
    # n = 20, budget at T = 100 and c_P = 0.3; 10^5 quiet slots
    t0 = time.perf_counter()
    n, slots = 20, 10 ** 5
    g = np.random.default_rng(SEED)
    frame = transmit_frame(None, 1, 0, ScenarioParams(n, slots), g)
    ok, parts = True, []
    for scheme in Scheme:
        power = power_budget(ScenarioParams(n, 100, c_P=0.3, scheme=scheme)).symbol_power
        if scheme is Scheme.GAUSSIAN:
            log_u = log_lrt_gaussian(frame, 1.0, power).per_slot_log_U
        else:
            log_u = log_lrt_binary(frame, 1.0, math.sqrt(power)).per_slot_log_U
        U = np.exp(log_u)
        m = moments_U(scheme, n, 1.0, power)
        z = (U.mean() - m.mu_U) / (U.std(ddof=1) / math.sqrt(slots))
        rel = U.var(ddof=1) / m.sigma_U ** 2 - 1
        ok &= abs(z) < 5 and abs(rel) < 0.10
        parts.append(f"{scheme.value}: mean {z:+.2f} SE, variance {rel:+.2%}")
    report(3, ok, "; ".join(parts), time.perf_counter() - t0, 30)


def test_04_rescaled_statistic_normality(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for scheme in Scheme:
        L = sample_statistic_distribution(ScenarioParams(100, 2000, scheme=scheme), Hypothesis.H0,
                                          500, SEED)
        d = ks_distance(L)
        ok &= d < 0.08
        parts.append(f"{scheme.value} KS {d:.4f}")
    report(4, ok, ", ".join(parts) + " < 0.08", time.perf_counter() - t0, 120)


@pytest.mark.slow
def test_05_covertness_at_budget(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for scheme in Scheme:
        results = []
        for n, T in ((100, 10 ** 4), (400, 16 * 10 ** 4)):
            s = estimate_detection_error(ScenarioParams(n, T, c_P=0.3, scheme=scheme), "lrt",
                                         10_000, SEED)
            results.append(s)
            ok &= s.p_e_willie >= 0.40
            parts.append(f"{scheme.value} n={n}: {s.p_e_willie:.4f}")
        # nondecreasing in n up to the lower confidence limit at the smaller n
        ok &= results[1].p_e_willie >= results[0].wilson_ci[0]
    report(5, ok, "P_e >= 0.40 and nondecreasing: " + ", ".join(parts), time.perf_counter() - t0, 600)


@pytest.mark.slow
def test_06_converse_detector(report):
    t0 = time.perf_counter()
    n, T = 1600, 100
    P = 8 * math.sqrt(math.log(T) / n)
    s = estimate_detection_error(ScenarioParams(n, T), "maxpower", 10_000, SEED, power=P,
                                 target_p_fa=0.05)
    bound = s.bound_values["converse_md"]
    ok = s.p_fa <= 0.075 and not bound.vacuous and s.p_md <= bound.value and s.p_e_willie <= 0.15
    report(6, ok, f"P_FA {s.p_fa:.4f} <= 0.075, P_MD {s.p_md:.4f} <= bound {bound.value:.4f}, "
                  f"P_e {s.p_e_willie:.4f} <= 0.15", time.perf_counter() - t0, 300)


def test_07_chernoff_domination(report):
    t0 = time.perf_counter()
    n, draws = 100, 10 ** 5
    g = np.random.default_rng(SEED)
    Y = slot_powers(Frame(sample_awgn(n * draws, 1.0, g), n, draws))
    ok, parts = True, []
    for delta in (1.0, 2.0, 4.0):
        emp = float(np.mean(Y > n + math.sqrt(n) * delta))
        b = chernoff_chi2_tail(n, delta).value
        ok &= emp <= b
        parts.append(f"delta={delta:g}: {emp:.5f} <= {b:.5f}")
    report(7, ok, ", ".join(parts), time.perf_counter() - t0, 10)


@pytest.mark.slow
def test_08_decoding_bounds(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    # known slot: n = 200 at the binary budget for T = 100, c_P = 0.5
    p = ScenarioParams(200, 100, scheme="binary", slot_known_to_bob=True)
    s = estimate_decoding_error(p, 10_000, SEED, M_int=2)
    b = s.bound_values["decoding"]
    ok &= not b.vacuous and s.p_e_bob <= b.value + (s.wilson_ci[1] - s.p_e_bob)
    parts.append(f"known slot {s.p_e_bob:.4f} <= {b.value:.4f}")
    # unknown slot: n = 50, T = 10, M_int = 2
    for a2 in (0.5, 1.0):
        p = ScenarioParams(50, 10, scheme="binary")
        s = estimate_decoding_error(p, 10_000, SEED, M_int=2, power=a2)
        b = s.bound_values["decoding"]
        if b.vacuous:
            parts.append(f"frame a2={a2:g} {s.p_e_bob:.4f} (bound {b.value:.3f} vacuous)")
        else:
            ok &= s.p_e_bob <= b.value + (s.wilson_ci[1] - s.p_e_bob)
            parts.append(f"frame a2={a2:g} {s.p_e_bob:.4f} <= {b.value:.4f}")
    report(8, ok, ", ".join(parts), time.perf_counter() - t0, 300)


def test_09_throughput_scaling(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for scheme in Scheme:
        for known in (False, True):
            ratios = []
            for n in (100, 400, 1600, 6400):
                p = ScenarioParams(n, n * n, scheme=scheme, slot_known_to_bob=known)
                ratios.append(throughput_bits(p, power_budget(p)) / math.sqrt(n * math.log(n * n)))
            spread = max(ratios) / min(ratios) - 1
            ok &= spread < 0.25
            parts.append(f"{scheme.value}/{'known' if known else 'unknown'} {spread:.1%}")
    report(9, ok, "ratio spread " + ", ".join(parts) + " < 25%", time.perf_counter() - t0, 1)


def test_10_sweep_reproducible(report, tmp_path):
    t0 = time.perf_counter()
    base = ["sweep", "--schedule", "poly:2", "--n-list", "100,400", "--seed", str(SEED),
            "--trials", "200", "--scheme", "binary"]
    outputs = []
    for i, workers in enumerate((1, 1, 2)):
        path = tmp_path / f"sweep{i}.csv"
        assert cli.main(base + ["--workers", str(workers), "--out", str(path)]) == 0
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    report(10, ok, "identical bytes for repeated runs and 1 vs 2 workers",
           time.perf_counter() - t0, 300)
