"""Independent oracles: cut enumeration, schedule validation, congestion."""

import dataclasses
from fractions import Fraction

import pytest

from collsched import (
    COMPUTE,
    Link,
    Node,
    PathUse,
    PrunedHop,
    Topology,
    bottleneck_search,
    brute_force_bottleneck,
    congestion_time,
    generate,
    random_eulerian_topology,
    validate,
    validate_schedule,
)
from collsched.errors import CollschedError, TooLarge
from collsched.verify import (
    CAPACITY_EXCEEDED,
    DELIVERY_GAP,
    NOT_A_TREE,
    NOT_SPANNING,
    WRONG_ROOT_COUNT,
)

from conftest import SUITE_SEEDS


class TestBruteForce:
    def test_two_node(self, two_node):
        ratio, witness = brute_force_bottleneck(two_node)
        assert ratio == Fraction(1, 3)
        assert witness.S == {"c1"}  # ties break to fewest, then smallest ids
        assert (witness.compute_count, witness.exit_bandwidth) == (1, 3)

    def test_ring4(self, ring4):
        ratio, witness = brute_force_bottleneck(ring4)
        assert ratio == Fraction(3)
        assert witness.S == {"c1", "c2", "c3"}

    def test_reference_witness_is_one_box(self, fig3a):
        ratio, witness = brute_force_bottleneck(fig3a)
        assert ratio == Fraction(1)
        assert witness.S == {"c1_1", "c1_2", "c1_3", "c1_4", "w1"}

    def test_size_budget_is_enforced(self):
        from collsched import synth_topology

        big = synth_topology("ring", n=23, bw=1)
        with pytest.raises(TooLarge):
            brute_force_bottleneck(big)

    def test_single_node_complement_is_a_lower_bound(self, random_suite):
        for t in random_suite[:40]:
            ratio, witness = brute_force_bottleneck(t)
            assert ratio >= Fraction(t.num_compute - 1, t.min_compute_in_bw())
            # the witness is a real cut achieving the ratio
            exit_bw = sum(
                bw
                for (a, b), bw in t.capacity.items()
                if a in witness.S and b not in witness.S
            )
            computes = sum(1 for v in witness.S if t.is_compute(v))
            assert exit_bw == witness.exit_bandwidth
            assert computes == witness.compute_count
            assert Fraction(computes, exit_bw) == ratio


class TestRandomEulerianTopology:
    def test_deterministic_per_seed(self):
        for seed in (0, 7, 123):
            assert random_eulerian_topology(seed) == random_eulerian_topology(seed)

    def test_always_validates_within_limits(self, random_suite):
        distinct = set()
        for t in random_suite:
            assert validate(t).ok
            assert len(t.nodes) <= 12
            assert t.num_compute >= 2
            assert all(l.bandwidth <= 8 for l in t.links)
            distinct.add(t)
        assert len(distinct) > 150  # seeds genuinely vary


# -- schedule tampering -------------------------------------------------------

def rebuild_batch(s, batch_fn, root_idx=0, batch_idx=0):
    """Replace one batch of a schedule via `batch_fn(batch) -> batch`."""
    rt = s.roots[root_idx]
    batches = list(rt.batches)
    batches[batch_idx] = batch_fn(batches[batch_idx])
    roots = list(s.roots)
    roots[root_idx] = dataclasses.replace(rt, batches=tuple(batches))
    return dataclasses.replace(s, roots=tuple(roots))


def kinds(report):
    return {v.kind for v in report.violations}


@pytest.fixture(scope="module")
def checked(fig3a):
    s, meta = generate(fig3a)
    report = validate_schedule(s, fig3a, meta)
    assert report.ok
    return s, meta


class TestValidateSchedule:
    def test_accepts_every_collective(self, fig3a):
        for collective in ("allgather", "reduce_scatter", "allreduce"):
            s, meta = generate(fig3a, collective=collective)
            report = validate_schedule(s, fig3a, meta)
            assert report.ok, report.violations
            assert report.achieved_T_comm == report.bound_T_comm

    def test_report_serializes(self, fig3a, checked):
        s, meta = checked
        doc = validate_schedule(s, fig3a, meta).to_dict()
        assert doc["ok"] is True
        assert doc["violations"] == []
        assert doc["achieved_T_comm"] == "1/8"
        assert doc["bound_T_comm"] == "1/8"

    def test_missing_edge_is_not_spanning(self, fig3a, checked):
        s, meta = checked
        bad = rebuild_batch(
            s, lambda b: dataclasses.replace(b, edges=b.edges[1:])
        )
        report = validate_schedule(bad, fig3a, meta)
        assert not report.ok
        assert NOT_SPANNING in kinds(report)

    def test_edge_into_root_is_not_a_tree(self, fig3a, checked):
        s, meta = checked
        root = s.roots[0].root

        def warp(b):
            e = b.edges[0]
            return dataclasses.replace(
                b,
                edges=(
                    dataclasses.replace(
                        e,
                        dst=root,
                        paths=tuple(
                            PathUse(p.path[:-1] + (root,), p.multiplicity)
                            for p in e.paths
                        ),
                    ),
                )
                + b.edges[1:],
            )

        report = validate_schedule(rebuild_batch(s, warp), fig3a, meta)
        assert not report.ok
        assert NOT_A_TREE in kinds(report)

    def test_two_parents_is_not_a_tree(self, fig3a, checked):
        s, meta = checked
        dup = rebuild_batch(
            s, lambda b: dataclasses.replace(b, edges=b.edges + (b.edges[0],))
        )
        report = validate_schedule(dup, fig3a, meta)
        assert not report.ok
        assert NOT_A_TREE in kinds(report)

    def test_dropped_batch_is_wrong_root_count(self, fig3a, checked):
        s, meta = checked
        roots = (dataclasses.replace(s.roots[0], batches=()),) + s.roots[1:]
        report = validate_schedule(dataclasses.replace(s, roots=roots), fig3a, meta)
        assert not report.ok
        assert WRONG_ROOT_COUNT in kinds(report)

    def test_inflated_path_multiplicity_is_a_delivery_gap(self, fig3a, checked):
        s, meta = checked

        def inflate(b):
            e = b.edges[0]
            paths = (PathUse(e.paths[0].path, e.paths[0].multiplicity + 1),) + e.paths[1:]
            return dataclasses.replace(
                b, edges=(dataclasses.replace(e, paths=paths),) + b.edges[1:]
            )

        report = validate_schedule(rebuild_batch(s, inflate), fig3a, meta)
        assert not report.ok
        assert DELIVERY_GAP in kinds(report)

    def test_route_over_missing_link_is_capacity_exceeded(self, fig3a, checked):
        s, meta = checked

        def reroute(b):
            e = b.edges[0]
            paths = (PathUse((e.src, e.dst), e.paths[0].multiplicity),) + e.paths[1:]
            return dataclasses.replace(
                b, edges=(dataclasses.replace(e, paths=paths),) + b.edges[1:]
            )

        report = validate_schedule(rebuild_batch(s, reroute), fig3a, meta)
        assert not report.ok
        assert CAPACITY_EXCEEDED in kinds(report)

    def test_weakened_topology_exceeds_capacity(self, fig3a, checked):
        s, meta = checked
        # halve one intra-box link the schedule certainly uses at 10/10
        weak_links = [
            Link(l.src, l.dst, 5 if (l.src, l.dst) == ("w1", "c1_2") else l.bandwidth)
            for l in fig3a.links
        ]
        weak = Topology(fig3a.nodes, weak_links)
        report = validate_schedule(s, weak, meta)
        assert not report.ok
        assert CAPACITY_EXCEEDED in kinds(report)

    def test_unjustified_pruned_hop_is_a_delivery_gap(self, fig3a, checked):
        s, meta = checked
        poked = rebuild_batch(
            s,
            lambda b: dataclasses.replace(
                b, pruned=b.pruned + (PrunedHop("c1_1", "w1", 1),)
            ),
        )
        report = validate_schedule(poked, fig3a, meta)
        assert not report.ok
        assert DELIVERY_GAP in kinds(report)

    def test_wrong_claimed_ratio_fails_exactness(self, fig3a, checked):
        s, meta = checked

        class Claim:
            inv_x_star = Fraction(2)
            U = meta.U
            k = meta.k
            y = meta.y
            exact = True

        report = validate_schedule(s, fig3a, Claim())
        assert not report.ok
        assert report.violations == ()  # purely a time mismatch
        assert report.achieved_T_comm != report.bound_T_comm

    def test_pruned_schedules_still_deliver(self, fig3a_multicast):
        s, meta = generate(fig3a_multicast)
        report = validate_schedule(s, fig3a_multicast, meta)
        assert report.ok, report.violations


class TestCongestionTime:
    def test_reference_values(self, fig3a):
        ag, _ = generate(fig3a)
        assert congestion_time(ag, fig3a) == Fraction(1, 8)
        ar, _ = generate(fig3a, collective="allreduce")
        assert congestion_time(ar, fig3a) == Fraction(1, 4)

    def test_pruning_leaves_the_bottleneck(self, fig3a_multicast):
        bare, _ = generate(fig3a_multicast, prune=False)
        pruned, _ = generate(fig3a_multicast, prune=True)
        assert congestion_time(bare, fig3a_multicast) == congestion_time(
            pruned, fig3a_multicast
        )

    def test_missing_link_is_an_error(self, fig3a, two_node):
        s, _ = generate(fig3a)
        with pytest.raises(CollschedError):
            congestion_time(s, two_node)

    def test_matches_the_validator_across_the_suite(self, random_suite):
        for seed, t in zip(SUITE_SEEDS, random_suite):
            if seed >= 50:
                break
            s, meta = generate(t)
            report = validate_schedule(s, t, meta)
            assert report.ok, (seed, report.violations)
            assert congestion_time(s, t) == report.achieved_T_comm == Fraction(
                meta.inv_x_star, t.num_compute
            )
