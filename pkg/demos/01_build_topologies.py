"""Build, synthesize, validate, and serialize network topologies.

A topology is a directed graph of compute nodes and switches with integer
link bandwidths.  Schedules can only be generated for networks where every
node's total in-bandwidth equals its total out-bandwidth, so validation is
the first thing to run on any hand-built input.
"""

from collsched import (
    Link,
    Node,
    Topology,
    parse_topology,
    serialize_topology,
    synth_topology,
    validate,
)

# --- hand-built: two GPUs behind one PCIe switch -------------------------

hand = Topology(
    nodes=[
        Node("gpu0", "compute"),
        Node("gpu1", "compute"),
        Node("pcie", "switch", multicast=True),
    ],
    links=[
        Link("gpu0", "pcie", 4),
        Link("pcie", "gpu0", 4),
        Link("gpu1", "pcie", 4),
        Link("pcie", "gpu1", 4),
    ],
)
report = validate(hand)
print(f"hand-built topology valid: {report.ok}")
print(f"  computes: {hand.compute_ids}")
print(f"  switches: {hand.switch_ids}")

# --- what an imbalanced network looks like --------------------------------

lopsided = Topology(
    nodes=[Node("a", "compute"), Node("b", "compute")],
    links=[Link("a", "b", 3), Link("b", "a", 2)],
)
report = validate(lopsided)
print(f"\nlopsided two-node network valid: {report.ok}")
for v in report.violations:
    print(f"  {v.kind}: {v.detail}")

# --- synthesized families --------------------------------------------------

boxes = synth_topology("boxes", boxes=2, gpus_per_box=4, intra=10, inter=1)
print(f"\nboxes(2x4): {boxes.num_compute} computes, {len(boxes.links)} links")

ring = synth_topology("ring", n=6, bw=2)
print(f"ring(6):    {ring.num_compute} computes, {len(ring.links)} links")

fat = synth_topology("fat-tree", pods=4, gpus=8, spines=2, leaf_bw=4, spine_bw=8)
print(f"fat-tree:   {fat.num_compute} computes, {len(fat.switch_ids)} switches")

# --- text round-trip --------------------------------------------------------

text = serialize_topology(boxes)
print("\nserialized form (first 6 lines):")
for line in text.splitlines()[:6]:
    print(f"  {line}")
assert parse_topology(text) == boxes
print("parse(serialize(t)) == t holds")
