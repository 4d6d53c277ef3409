"""Two qubits share a Bell pair and both decay.  How much entanglement survives,
and how much does a measurement-conditioned local correction recover?"""

import numpy as np

from qfb import (
    apply_channel,
    apply_feedback_channel,
    bell_state,
    concurrence,
    optimal_scheme,
    product_kraus,
    subsystem_purity,
)

print(f"{'eta':>5} {'C bare':>8} {'C fb':>8} {'P bare':>8} {'P fb':>8}")
for eta in np.linspace(0.0, 1.0, 11):
    k = product_kraus(eta)
    bare = apply_channel(k, bell_state())
    fb = apply_feedback_channel(k, optimal_scheme(), bell_state())
    print(
        f"{eta:5.1f} {concurrence(bare).value:8.4f} {concurrence(fb).value:8.4f}"
        f" {subsystem_purity(bare):8.4f} {subsystem_purity(fb):8.4f}"
    )
print("\nWithout feedback the concurrence is eta^2; with the optimal correction it is eta,")
print("and the one-qubit purity stays pinned at its maximally-mixed value 1/2.")
