"""Shared fixtures: reference topologies and the seeded random suite."""

import dataclasses

import pytest

from collsched import SWITCH, Topology, random_eulerian_topology, synth_topology

# Seeds for the randomized cross-checking suite.  200 instances keeps the
# oracle-equivalence sweep meaningful while the whole run stays fast.
SUITE_SEEDS = range(200)


@pytest.fixture(scope="session")
def fig3a():
    """Two boxes of four GPUs each: every GPU has a 10-wide link pair to its
    box switch and a 1-wide pair to the shared global switch."""
    return synth_topology("boxes", boxes=2, gpus_per_box=4, intra=10, inter=1)


@pytest.fixture(scope="session")
def fig3a_multicast(fig3a):
    """Same network with every switch flagged multicast- and
    aggregation-capable."""
    nodes = [
        dataclasses.replace(n, multicast=True, aggregation=True)
        if n.kind == SWITCH
        else n
        for n in fig3a.nodes
    ]
    return Topology(nodes, fig3a.links)


@pytest.fixture(scope="session")
def two_node():
    """Two compute nodes joined by bandwidth-3 links both ways."""
    return synth_topology("ring", n=2, bw=3, bidirectional=False)


@pytest.fixture(scope="session")
def ring4():
    """Four compute nodes in a unidirectional unit-bandwidth cycle."""
    return synth_topology("ring", n=4, bw=1)


@pytest.fixture(scope="session")
def random_suite():
    """The seeded random Eulerian topologies used by the sweeping tests."""
    return [random_eulerian_topology(seed) for seed in SUITE_SEEDS]
