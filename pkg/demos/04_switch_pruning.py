"""Elide redundant switch hops on multicast- and aggregation-capable fabrics.

Tree edges are routed over physical links, so several tree paths may carry
the same data unit into the same switch.  If the switch can multicast
(allgather) or aggregate (reduce-scatter), only one copy needs to cross the
shared upstream hop; the rest are pruned.  Pruning never changes what is
delivered or the finishing time — it only frees link budget.
"""

import dataclasses

from collsched import (
    Topology,
    congestion_time,
    generate,
    link_usage,
    synth_topology,
    validate_schedule,
)

base = synth_topology("boxes", boxes=2, gpus_per_box=4, intra=10, inter=1)

# Same wiring, but every switch can replicate and reduce in-flight data.
smart = Topology(
    [
        dataclasses.replace(nd, multicast=True, aggregation=True)
        if nd.kind == "switch"
        else nd
        for nd in base.nodes
    ],
    base.links,
)

plain, meta = generate(smart, prune=False)
pruned, _ = generate(smart, prune=True)

before = link_usage(plain)
after = link_usage(pruned)
saved = sum(before.values()) - sum(after.values())
print(f"hop units before pruning: {sum(before.values())}")
print(f"hop units after pruning:  {sum(after.values())}  ({saved} elided)")

print("\nbusiest links (units before -> after):")
for pair in sorted(before, key=before.get, reverse=True)[:5]:
    a, b = pair
    print(f"  {a:5s} -> {b:5s}  {before[pair]:3d} -> {after.get(pair, 0):3d}")

report = validate_schedule(pruned, smart, meta)
same_time = congestion_time(pruned, smart) == congestion_time(plain, smart)
print(f"\npruned schedule still valid: {report.ok}")
print(f"finishing time unchanged:    {same_time}")

# On switches without the capability, pruning is a no-op by construction.
dumb_pruned, _ = generate(base, prune=True)
dumb_plain, _ = generate(base, prune=False)
print(f"\nno-capability fabric untouched: {dumb_pruned == dumb_plain}")
