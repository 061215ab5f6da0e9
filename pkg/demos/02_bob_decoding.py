"""
Bob's decoder
=============

Bob shares the codebook with Alice. If he also knows the slot he decodes
that slot alone; otherwise he decodes every slot against the codebook
augmented with the all-zero word ("nothing sent here"), and succeeds only
if Alice's slot gives the right message and every other slot gives zero.
"""

import numpy as np

from covert_timing import (ScenarioParams, augment_origin, binary_codebook, decoding_bound,
                           estimate_decoding_error, ml_decode_frame, transmit_frame)

# --- a single frame, decoded by hand -----------------------------------------
n, T, a = 50, 10, 1.0
rng = np.random.default_rng(7)
book = augment_origin(binary_codebook(n, 2, a, seed=rng))
params = ScenarioParams(n, T, scheme="binary")
frame = transmit_frame(book.codewords[3], 4, 0, params, rng, receiver="bob", message=3)
result = ml_decode_frame(frame, book)
print("decoded messages per slot:", [r.message for r in result.per_slot], "success:", result.success)

# --- Monte Carlo error against the union bounds ------------------------------
cases = [
    ("binary, slot known, n=200", ScenarioParams(200, 100, scheme="binary", slot_known_to_bob=True), None),
    ("binary, slot unknown, n=50, a^2=1", ScenarioParams(50, 10, scheme="binary"), 1.0),
    ("gaussian, slot unknown, n=200, P=0.5", ScenarioParams(200, 10), 0.5),
]
for label, p, power in cases:
    s = estimate_decoding_error(p, trials=2000, seed=11, M_int=2, power=power)
    b = s.bound_values["decoding"]
    lo, hi = s.wilson_ci
    print(f"{label:38s} error {s.p_e_bob:.4f} [{lo:.4f}, {hi:.4f}]  "
          f"bound {b.value:.4f}{' (vacuous)' if b.vacuous else ''}")

# The bound for the first case, evaluated directly
p = cases[0][1]
a2 = 0.5 * np.sqrt(np.log(100)) / np.sqrt(400)
print("known-slot bound at a^2 = %.4f:" % a2, decoding_bound("binary", True, 2, 200, 100, a2, 1.0).value)
