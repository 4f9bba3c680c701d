"""
A two-bank cascade, step by step
================================

Two banks hold 20 of each other's debt, 100 of external assets and 80 of
external debt, so each starts with equity 20. A 10% external shock leaves
both with 10 of book equity and no direct defaults. Revaluing the
interbank claims with the linear DebtRank rule then drives both below zero.
"""

import numpy as np

from nevarisk import (
    FinancialNetwork,
    apply_shock,
    book_equity,
    linear_debtrank,
    run_scenario,
    solve_fixed_point,
)

# Row i holds claims on column j.
net = FinancialNetwork.from_arrays(
    [[0, 20], [20, 0]], [100, 100], [80, 80], ids=["A", "B"]
)
print("book equity before the shock:", book_equity(net))

shocked = apply_shock(net, 0.10)
print("book equity after a 10% shock:", book_equity(shocked))

# Picard iteration starts at the post-shock book equity and descends.
traj = solve_fixed_point(net, shocked, linear_debtrank())
for k, E in enumerate(traj.iterates):
    print(f"  iterate {k}: {E}")
print("converged:", traj.converged, "in", traj.iterations_used, "iterations")

# The same run, summarised as default counts.
res = run_scenario(net, linear_debtrank(), 0.10)
print(f"{res.total_defaults} defaults ({res.direct_defaults} direct, "
      f"{res.indirect_defaults} indirect): {', '.join(res.defaulted_ids)}")

# Each bank's claim on the other equals its whole equity buffer, so under
# the linear rule any loss feeds back until both are wiped out.
for a in (0.02, 0.05, 0.10):
    r = run_scenario(net, linear_debtrank(), a)
    print(f"a = {a:.2f}: final equity {np.round(r.final_equity, 6)}, defaults {r.total_defaults}")

# Halve the cross-holdings (equity stays 20) and small shocks are absorbed.
light = FinancialNetwork.from_arrays([[0, 10], [10, 0]], [100, 100], [80, 80], ids=["A", "B"])
for a in (0.02, 0.05, 0.08):
    r = run_scenario(light, linear_debtrank(), a)
    print(f"a = {a:.2f}: final equity {np.round(r.final_equity, 6)}, defaults {r.total_defaults}")
