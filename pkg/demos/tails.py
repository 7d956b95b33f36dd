"""
Concentration of the spreading time
===================================

Deviations of T from its mean fall off roughly geometrically. Tabulate the
empirical tail and the fitted decay rate.
"""

from evolving_gossip import harness
from evolving_gossip.graphs import ModelParams, SeedSpec
from evolving_gossip.protocols import ProtocolKind

params = ModelParams(2048, 1.0)
est, tail = harness.estimate_spreading_time(params, ProtocolKind.PUSHPULL, 3000, SeedSpec(11))
print(f"mean T = {est.point:.2f} +/- {est.std_error:.2f}")
print(" r  P[T>=m+r]  P[T<=m-r]  P[|T-m|>=r]")
for r, up, lo, two, hits in tail.rows():
    print(f"{r:2d}  {up:9.4f}  {lo:9.4f}  {two:11.4f}")
print(f"decay rate {tail.fitted_decay_rate:.3f} (R^2 {tail.r_squared:.3f}, {tail.fit_points} points)")
