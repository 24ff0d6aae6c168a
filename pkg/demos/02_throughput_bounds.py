"""Find the exact throughput ceiling of a network and the cut that causes it.

For an allgather over N compute nodes, no schedule can finish faster than
the tightest sparsest-cut ratio 1/x* allows: take any vertex set S that
misses at least one compute node; the computes inside S must ship their
data out through S's exit links, so time-per-unit is at least
|S ∩ computes| / exit-bandwidth(S).  `bottleneck_search` finds the worst
such ratio exactly (as a Fraction) with a binary search over max-flow
feasibility probes; `brute_force_bottleneck` enumerates every cut and is
the independent oracle used throughout the test suite.
"""

from collsched import (
    bottleneck_search,
    brute_force_bottleneck,
    derive_schedule_params,
    synth_topology,
)

# Two boxes of four GPUs: fast links inside a box, one slow uplink each.
t = synth_topology("boxes", boxes=2, gpus_per_box=4, intra=10, inter=1)

res = bottleneck_search(t)
print(f"1/x* = {res.inv_x_star}  (found in {res.search_iterations} probes)")
print(f"schedule shape: k = {res.k} trees per root, y = {res.y} per tree,")
print(f"bandwidth scale U = {res.U}")

oracle, witness = brute_force_bottleneck(t)
print(f"\nexhaustive enumeration agrees: {oracle == res.inv_x_star}")
print(f"witness cut S = {sorted(witness.S)}")
print(
    f"  {witness.compute_count} computes exit over bandwidth "
    f"{witness.exit_bandwidth} -> ratio {witness.ratio}"
)

# The same derivation works for any rational bound and link profile:
U, k, y = derive_schedule_params(oracle, [l.bandwidth for l in t.links])
print(f"\nparams re-derived from the ratio alone: U={U}, k={k}, y={y}")

# On a ring, the bound comes from the long way around.
ring = synth_topology("ring", n=8, bw=1)
res = bottleneck_search(ring)
oracle, witness = brute_force_bottleneck(ring)
print(f"\nring(8): 1/x* = {res.inv_x_star}, witness S = {sorted(witness.S)}")
