"""Apply the damping, and optionally the correction, n times in a row.  The
feedback advantage grows with n: eta^n against eta^(2n)."""

import numpy as np

from qfb import RepeatConfig, bell_state, concurrence, repeat_map

eta = 0.8
print(f"eta = {eta}")
print(f"{'n':>2} {'C bare':>10} {'C fb':>10} {'ratio':>8}")
for n in range(1, 7):
    bare = concurrence(repeat_map(bell_state(), eta, RepeatConfig(n))).value
    fb = concurrence(repeat_map(bell_state(), eta, RepeatConfig(n, True))).value
    print(f"{n:2d} {bare:10.6f} {fb:10.6f} {fb / bare:8.3f}")
print(f"ratio grows as eta^-n: {[round(float(x), 3) for x in eta ** -np.arange(1, 7)]}")
