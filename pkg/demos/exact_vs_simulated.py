"""
Exact answers for tiny networks
===============================

For n <= 5 every graph can be listed, so the expected spreading time is known
exactly. Compare it with a Monte Carlo estimate.
"""

from evolving_gossip import harness, oracle
from evolving_gossip.graphs import ModelParams, SeedSpec
from evolving_gossip.protocols import ProtocolKind

params = ModelParams(5, 1.0)
print(f"{'protocol':>9} {'exact E[T]':>11} {'simulated':>10} {'+/-':>6}")
for kind in ProtocolKind:
    exact = oracle.exact_expected_time(params, kind)
    est, _ = harness.estimate_spreading_time(params, kind, 20_000, SeedSpec(1))
    print(f"{kind.value:>9} {exact:11.4f} {est.point:10.4f} {est.std_error:6.4f}")

# one row of the transition matrix: from 2 informed nodes, where do we land?
row = oracle.exact_transition_row(params, 2, ProtocolKind.PULL)
print("Pull from k=2:", {k: round(v, 4) for k, v in row.items()})

# a Pull pair of nodes is slightly positively correlated
print("Pull pair covariance, k=2:", oracle.exact_pair_covariance(params, 2, ProtocolKind.PULL))
