"""
How far is the mean from the leading-order prediction?
======================================================

The predictor ln n / ln(1+gamma) + ln n / rho drops an additive constant.
Measure the leftover gap over a range of n. It should stay roughly flat.
Scoring Push against the Pull formula instead makes the gap drift upward.
"""

from evolving_gossip import harness
from evolving_gossip.graphs import SeedSpec
from evolving_gossip.protocols import ProtocolKind

grid = (256, 1024, 4096)
for kind in ProtocolKind:
    rep = harness.fit_leading_constant(kind, 1.0, grid, 300, SeedSpec(7))
    gaps = ", ".join(f"{g:5.2f}" for g in rep.gaps)
    print(f"{kind.value:>9}: gaps [{gaps}]  spread {rep.spread:.2f}")
    if kind is ProtocolKind.PUSH:
        push = rep

control = harness.gaps_against(push, ProtocolKind.PULL)
print("push scored with the pull formula:", [round(g, 2) for g in control.gaps], " growth", round(control.growth, 2))
