"""
How many covert bits?
=====================

With T = n^2 slots the covert budget grows like sqrt(log T / n) per symbol,
so the number of bits grows like sqrt(n log T) rather than sqrt(n). The
sweep below reports the budget and throughput for growing n, Willie's
error at a small number of trials, and writes the table as CSV.
"""

import sys

from covert_timing import ScenarioParams, TScheduleSpec, scaling_sweep
from covert_timing.harness import SWEEP_COLUMNS, csv_text

schedule = TScheduleSpec.parse("poly:2")
template = ScenarioParams(1, 1, scheme="binary", slot_known_to_bob=True)

rows = scaling_sweep(schedule, [100, 400, 1600, 6400], template, trials=100, seed=5, simulate=False)
print(f"{'n':>6} {'T':>10} {'a^2':>8} {'M':>8} {'M/sqrt(n ln T)':>15}")
for r in rows:
    print(f"{r['n']:>6} {r['T']:>10} {r['budget']:>8.4f} {r['M']:>8.2f} {r['M_over_sqrt_n_lnT']:>15.4f}")

# With simulation (fewer n values to keep this quick)
rows = scaling_sweep(schedule, [100, 400], template, trials=200, seed=5)
sys.stdout.write(csv_text(rows, {"schedule": str(schedule), "seed": 5}, SWEEP_COLUMNS))
