"""Mixing the Kraus operators corresponds to measuring the environment
differently.  A grid search over the mixing parameters (with the correction
tuned to each) never beats concurrence eta.  A local refinement from the best
grid point does not either."""

import math

from qfb.optimize import SweepConfig, refine, remix_concurrence, sweep_remix, unit_grid

res = sweep_remix(SweepConfig(eta_grid=tuple(unit_grid()), angle_grid_size=31))
print(f"{'eta':>5} {'best C':>10} {'ties':>5}  r_alpha values among maximisers")
for b in res.best:
    print(f"{b.key[0]:5.1f} {b.value:10.6f} {b.tie_count:5d}  {sorted({float(r) for r in b.tied_values(0)})}")

eta = 0.6
start = (0.35, 1.0, 2.0)
bounds = [(0.0, 1.0), (0.0, 2 * math.pi), (0.0, 2 * math.pi)]
x, value, trace = refine(lambda p: remix_concurrence(eta, *p), start, bounds=bounds)
print(f"\nrefined from {start}: C = {value:.12f} after {len(trace)} improvements (eta = {eta})")
