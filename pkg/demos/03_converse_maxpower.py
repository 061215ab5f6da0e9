"""
When Alice is too loud
======================

If Alice's power grows faster than sqrt(log T / n), a simple detector that
compares the loudest slot with a threshold catches her. The threshold is
set for a target false-alarm rate; Chebyshev's inequality bounds the miss
probability. An offset start splits the codeword over two slots, which the
max-power detector barely notices.
"""

import math

from covert_timing import ScenarioParams, converse_md_bound, estimate_detection_error, maxpower_threshold

n, T = 1600, 100
P_f = 8 * math.sqrt(math.log(T) / n)
det = maxpower_threshold(n, T, 1.0, 0.05)
print(f"P_f = {P_f:.4f}; delta = {det.delta:.3f}; tau = {det.tau:.1f}")
print(f"Chebyshev bound on missed detection: {converse_md_bound(n, T, 1.0, P_f, det.delta).value:.4f}")

for offset in (0, n // 2):
    s = estimate_detection_error(ScenarioParams(n, T), "maxpower", trials=2000, seed=3,
                                 power=P_f, offset=offset)
    print(f"offset {offset:>4}: P_FA = {s.p_fa:.4f}, P_MD = {s.p_md:.4f}, P_e = {s.p_e_willie:.4f}")

# at the covert budget the same detector is blind
covert = ScenarioParams(n, T, c_P=0.3)
s = estimate_detection_error(covert, "maxpower", trials=2000, seed=4)
print(f"at the covert budget: P_e = {s.p_e_willie:.4f}")
