"""
Four ways to value an interbank claim
=====================================

Each valuation maps the issuer's current equity (and assets) to a factor in
[0, 1] that multiplies the face value of its debt. Below we walk a single
issuer from full health to wipe-out and print the factor under each family.
The reduced-form and rate-feedback variants never fall below exp(-gamma*tau).
"""

import numpy as np

from nevarisk import (
    FinancialNetwork,
    book_equity,
    internal_values,
    ir_feedback,
    linear_debtrank,
    recovery_debtrank,
    reduced_form,
    system_state,
)

# The issuer has equity 10; the second bank holds 30 of its debt.
net = FinancialNetwork.from_arrays([[0, 0], [30, 0]], [100, 100], [60, 95])
E0 = book_equity(net)
print("initial equity:", E0)

models = {
    "linear-dr": linear_debtrank(),
    "recovery-dr a=0.5": recovery_debtrank(0.5),
    "reduced-form g=5": reduced_form(gamma=5.0, beta=0.5),
    "reduced-form g=1": reduced_form(gamma=1.0, beta=0.5),
    "ir-feedback": ir_feedback(gamma=5.0, beta=0.5, gamma_sys=0.1, beta_sys=0.5),
}

print(f"{'E/E0':>6}" + "".join(f"{name:>20}" for name in models))
for frac in np.linspace(1.0, -0.5, 7):
    E = E0.copy()
    E[0] = frac * E0[0]
    row = []
    for model in models.values():
        state = system_state(net, model, E, E0)
        row.append(internal_values(model, state)[0])
    print(f"{frac:6.2f}" + "".join(f"{v:20.4f}" for v in row))

# RecoveryDR with alpha = 1 is the linear rule, bit for bit.
E = np.array([3.7, 4.0])
s = system_state(net, None, E, E0)
print("alpha = 1 reduces to linear:",
      np.array_equal(internal_values(recovery_debtrank(1.0), s),
                     internal_values(linear_debtrank(), s)))
