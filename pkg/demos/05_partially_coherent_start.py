"""Start from a state with reduced coherence q.  The correction recovers |q| eta,
while the bare channel loses all entanglement once |q| <= 1 - eta."""

from qfb import apply_channel, apply_feedback_channel, concurrence, optimal_scheme, product_kraus, rho_q

eta = 0.7
for q in (1.0, 0.6j, 0.4, -0.2):
    k = product_kraus(eta)
    bare = concurrence(apply_channel(k, rho_q(q))).value
    fb = concurrence(apply_feedback_channel(k, optimal_scheme(), rho_q(q))).value
    print(f"q = {q!s:>6}: bare {bare:.4f}  feedback {fb:.4f}  (|q| eta = {abs(q) * eta:.4f})")
