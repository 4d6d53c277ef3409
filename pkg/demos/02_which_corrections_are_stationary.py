"""The purity after feedback depends on three angle combinations.  Scan the two
families where its gradient vanishes and see which ones actually help."""

import math

from qfb.optimize import classify_stationary_sets

for family, members in classify_stationary_sets().items():
    print(f"{family}:")
    for m in members:
        fixed = ", ".join(f"{k}={v / math.pi:+.0f}pi" for k, v in m.fixed.items())
        print(f"  {fixed:28s} residual {m.residual:.0e}  purity range [{m.purities.min():.4f}, {m.purities.max():.4f}]")
