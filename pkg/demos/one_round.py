"""
A single round, step by step
============================

Sample one sparse random graph, pick neighbors, and see who learns the rumor.
"""

import numpy as np

from evolving_gossip.graphs import ModelParams, SeedSpec, sample_round_graph
from evolving_gossip.protocols import ProtocolKind, SpreadState, replay_round, run_round

params = ModelParams(n=30, a=1.5)
rng = SeedSpec(2024).generator()

g = sample_round_graph(params, rng)
print("edges:", g.num_edges, "  expected:", round(params.p * 30 * 29 / 2, 2))
print("isolated nodes:", np.flatnonzero(g.degrees == 0).tolist())

# five informed nodes to start with
state = SpreadState.initial(30, range(5))
after, out = run_round(state, ProtocolKind.PUSHPULL, g, rng)
print("newly informed:", out.newly_informed.tolist())
print("  by push:", np.flatnonzero(out.pushed).tolist())
print("  by pull:", np.flatnonzero(out.pulled).tolist())

# the same choices replayed under the one-sided protocols
push_only, _ = replay_round(state, ProtocolKind.PUSH, out.choices)
pull_only, _ = replay_round(state, ProtocolKind.PULL, out.choices)
assert np.array_equal(after.informed, push_only.informed | pull_only.informed)
print("push-only count:", push_only.count, " pull-only count:", pull_only.count, " both:", after.count)
