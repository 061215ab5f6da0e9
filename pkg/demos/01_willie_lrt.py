"""
Willie's likelihood ratio test
==============================

Alice picks one of T slots at random and sends a Gaussian codeword there.
Willie knows everything except the slot and the codeword, so his best test
is a likelihood ratio over all T slots. This script builds a single frame,
looks at the statistic, and then estimates Willie's error at the covert
power budget and at ten times that power.
"""

import numpy as np

from covert_timing import (Hypothesis, ScenarioParams, estimate_detection_error, ks_distance,
                           log_lrt_gaussian, moments_U, power_budget, rescale_statistic,
                           sample_statistic_distribution, transmit_frame)

params = ScenarioParams(n=100, T=2000, c_P=0.3)
P_f = power_budget(params).symbol_power
print(f"n={params.n}, T={params.T}: covert symbol power P_f = {P_f:.4f}")

# --- one frame --------------------------------------------------------------
rng = np.random.default_rng(1)
t_A = int(rng.integers(1, params.T + 1))
codeword = rng.normal(0, np.sqrt(P_f), params.n)
frame = transmit_frame(codeword, t_A, 0, params, rng)

stat = log_lrt_gaussian(frame, params.sigma_w_sq, P_f)
mom = moments_U(params.scheme, params.n, params.sigma_w_sq, P_f)
r = rescale_statistic(stat, params.T, mom, t_A)
print(f"log Lambda = {stat.log_lambda:.4f}; rescaled L = {r.L:.3f} "
      f"(Alice's slot contributes V = {r.V_part:.4f})")

# --- the rescaled statistic is close to N(0, 1) under both hypotheses --------
h0 = sample_statistic_distribution(params, Hypothesis.H0, 300, seed=2)
h1 = sample_statistic_distribution(params, Hypothesis.H1, 300, seed=3)
print(f"KS(H0 vs N(0,1)) = {ks_distance(h0):.3f}, KS(H0 vs H1) = {ks_distance(h0, h1):.3f}")

# --- Willie's best threshold in hindsight -------------------------------------
for scale in (1, 10):
    s = estimate_detection_error(params, "lrt", trials=2000, seed=4, power=scale * P_f)
    lo, hi = s.wilson_ci
    print(f"power {scale:>2} x budget: P_e(Willie) = {s.p_e_willie:.3f}  [{lo:.3f}, {hi:.3f}]")
