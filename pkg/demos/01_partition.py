"""Split a contact hypergraph into core and fringe nodes.

Every hyperedge must touch the core. One randomized minimal hitting set is
usually small; taking the union over several rounds grows the core towards
the nodes that could plausibly have started a group.
"""
from noah import umhs_partition
from noah.datasets import workspace_like
from noah.partition import minimal_hitting_set

H = workspace_like(0)
print(f"{H.node_count} nodes, {H.num_edges} hyperedges, {H.num_attributes} binary attributes")

single = minimal_hitting_set(H, rng=0)
print(f"one minimal hitting set: {len(single)} nodes")

for rounds in (1, 2, 5, 10, 20):
    P = umhs_partition(H, rounds=rounds, rng=0)
    P.check(H)
    print(f"R = {rounds:>2}: |C| = {len(P.core):>2}, |F| = {len(P.fringe):>2}")
