"""Physical collective schedules: assembly, reversal, pruning, serialization.

A schedule holds, per compute root, batches of identically-shaped spanning
trees (multiplicity = number of tree copies).  Each logical tree arc maps
to one or more physical node paths through removed switches; path
multiplicities partition the batch's copies in listed order, which is what
pruning and validation rely on to reason about individual copies.

Pruning never rewrites paths: elided hops are recorded separately as
(src, dst, multiplicity) annotations, keeping the original routing
reconstructible and making "usage after pruning <= before" a bookkeeping
identity rather than a recomputation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import CollschedError, MismatchedForest
from .packing import Forest
from .splitting import EMap, expand_path
from .topology import ScaledTopology, Topology

ALLGATHER = "allgather"
REDUCE_SCATTER = "reduce_scatter"
ALLREDUCE = "allreduce"


@dataclass(frozen=True)
class PathUse:
    """One physical route for part of a logical arc's tree copies."""

    path: tuple[str, ...]
    multiplicity: int


@dataclass(frozen=True)
class ScheduleEdge:
    src: str
    dst: str
    paths: tuple[PathUse, ...]


@dataclass(frozen=True)
class PrunedHop:
    """A physical hop elided for `multiplicity` tree copies."""

    src: str
    dst: str
    multiplicity: int


@dataclass(frozen=True)
class ScheduleBatch:
    multiplicity: int
    edges: tuple[ScheduleEdge, ...]
    pruned: tuple[PrunedHop, ...] = ()


@dataclass(frozen=True)
class RootTrees:
    root: str
    batches: tuple[ScheduleBatch, ...]


@dataclass(frozen=True)
class Schedule:
    collective: str
    num_compute: int
    k: int
    U: Fraction
    y: Fraction
    inv_x_star: Fraction
    roots: tuple[RootTrees, ...]
    phases: tuple["Schedule", ...] = ()
    # Whether the congestion bound inv_x_star/N is met with equality
    # (optimal pipeline) or only as an upper bound (fixed tree counts,
    # where capacity floors may leave slack).
    exact: bool = True


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def assemble_allgather(
    forest: Forest, emap: EMap, original: ScaledTopology, meta
) -> Schedule:
    """Expand every packed tree into physical paths and attach metadata.

    meta is an optimality result (unrestricted or fixed-k); its U, k, y and
    inv_x_star ride along in the schedule.  Path expansion draws from one
    shared budget, so per-link usage stays within U*b_e by construction.
    """
    roots = []
    for root in forest.lt.compute_ids:
        batches = []
        for batch in forest.batches:
            if batch.root != root:
                continue
            if len(batch.members) != forest.lt.num_compute:
                raise CollschedError(f"batch rooted at {root} is incomplete")
            edges = tuple(
                ScheduleEdge(
                    src=u,
                    dst=v,
                    paths=tuple(
                        PathUse(path=p, multiplicity=m)
                        for p, m in expand_path(
                            emap, original, (u, v), batch.multiplicity
                        )
                    ),
                )
                for u, v in batch.edges
            )
            batches.append(ScheduleBatch(multiplicity=batch.multiplicity, edges=edges))
        roots.append(RootTrees(root=root, batches=tuple(batches)))
    return Schedule(
        collective=ALLGATHER,
        num_compute=forest.lt.num_compute,
        k=meta.k,
        U=meta.U,
        y=meta.y,
        inv_x_star=meta.inv_x_star,
        roots=tuple(roots),
        exact=meta.exact,
    )


# ---------------------------------------------------------------------------
# Reversal and allreduce combination
# ---------------------------------------------------------------------------

def _reverse_core(s: Schedule, collective: str) -> Schedule:
    roots = tuple(
        RootTrees(
            root=rt.root,
            batches=tuple(
                ScheduleBatch(
                    multiplicity=b.multiplicity,
                    edges=tuple(
                        ScheduleEdge(
                            src=e.dst,
                            dst=e.src,
                            paths=tuple(
                                PathUse(tuple(reversed(p.path)), p.multiplicity)
                                for p in e.paths
                            ),
                        )
                        for e in b.edges
                    ),
                    pruned=tuple(
                        PrunedHop(h.dst, h.src, h.multiplicity) for h in b.pruned
                    ),
                )
                for b in rt.batches
            ),
        )
        for rt in s.roots
    )
    return replace(s, collective=collective, roots=roots)


def reverse_for_reduce_scatter(s: Schedule) -> Schedule:
    """Turn broadcast out-trees into aggregation in-trees: every edge and
    every physical path runs backwards, roots become sinks.  Usage of link
    (a, b) in the result equals the input's usage of (b, a), so on
    link-symmetric topologies the congestion time carries over unchanged.
    """
    if s.collective != ALLGATHER:
        raise CollschedError(f"can only reverse an allgather schedule, got {s.collective}")
    return _reverse_core(s, REDUCE_SCATTER)


def combine_allreduce(rs: Schedule, ag: Schedule) -> Schedule:
    """Chain a reduce-scatter phase with an allgather phase.

    Both phases must come from the same packed forest (the reduce-scatter
    being the reversal of the allgather, pruning annotations aside); the
    combined time under the congestion model is the sum of the phases'.
    """
    if rs.collective != REDUCE_SCATTER:
        raise MismatchedForest(f"first phase must be reduce_scatter, got {rs.collective}")
    if ag.collective != ALLGATHER:
        raise MismatchedForest(f"second phase must be allgather, got {ag.collective}")
    meta_rs = (rs.num_compute, rs.k, rs.U, rs.y, rs.inv_x_star)
    meta_ag = (ag.num_compute, ag.k, ag.U, ag.y, ag.inv_x_star)
    if meta_rs != meta_ag:
        raise MismatchedForest(f"phase metadata disagrees: {meta_rs} vs {meta_ag}")

    def skeleton(sched: Schedule):
        return [
            (rt.root, [(b.multiplicity, b.edges) for b in rt.batches])
            for rt in sched.roots
        ]

    if skeleton(_reverse_core(rs, ALLGATHER)) != skeleton(ag):
        raise MismatchedForest("phases do not reverse the same tree forest")
    return Schedule(
        collective=ALLREDUCE,
        num_compute=ag.num_compute,
        k=ag.k,
        U=ag.U,
        y=ag.y,
        inv_x_star=ag.inv_x_star,
        roots=(),
        phases=(rs, ag),
        exact=rs.exact and ag.exact,
    )


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------

def _bfs_edges(root: str, batch: ScheduleBatch) -> list[ScheduleEdge]:
    """Batch edges in BFS order from the root, children in sorted order."""
    children: dict[str, list[str]] = {}
    by_pair: dict[tuple[str, str], ScheduleEdge] = {}
    for e in batch.edges:
        children.setdefault(e.src, []).append(e.dst)
        by_pair[(e.src, e.dst)] = e
    order: list[ScheduleEdge] = []
    queue = [root]
    while queue:
        node = queue.pop(0)
        for child in sorted(children.get(node, ())):
            order.append(by_pair[(node, child)])
            queue.append(child)
    if len(order) != len(batch.edges):
        raise CollschedError(f"batch edges rooted at {root} do not form a tree")
    return order


def _prune(s: Schedule, t: Topology, capability: str) -> Schedule:
    capable = {
        node.id for node in t.nodes if getattr(node, capability, False)
    }
    if not capable:
        return s
    new_roots = []
    for rt in s.roots:
        new_batches = []
        for batch in rt.batches:
            pruned: list[PrunedHop] = []
            # copies of this batch that a capable switch has already carried
            charged: dict[str, set[int]] = {}
            for edge in _bfs_edges(rt.root, batch):
                base = 0
                for pu in edge.paths:
                    copies = set(range(base, base + pu.multiplicity))
                    base += pu.multiplicity
                    path = pu.path
                    cut = 0  # index to keep the path from
                    for idx in range(len(path) - 2, 0, -1):
                        w = path[idx]
                        if w in capable and copies <= charged.get(w, frozenset()):
                            cut = idx
                            break
                    for hop_i in range(cut):
                        pruned.append(
                            PrunedHop(path[hop_i], path[hop_i + 1], pu.multiplicity)
                        )
                    for idx in range(max(cut, 1), len(path) - 1):
                        w = path[idx]
                        if w in capable:
                            charged.setdefault(w, set()).update(copies)
            new_batches.append(
                ScheduleBatch(
                    multiplicity=batch.multiplicity,
                    edges=batch.edges,
                    pruned=tuple(pruned),
                )
            )
        new_roots.append(RootTrees(root=rt.root, batches=tuple(new_batches)))
    return replace(s, roots=tuple(new_roots))


def prune_multicast(s: Schedule, t: Topology) -> Schedule:
    """Elide sends made redundant by switch multicast.

    Trees are walked in BFS order from the root (children sorted); once a
    tree copy's data has crossed a multicast-capable switch, later paths of
    the same copy entering that switch drop the hops before it — the switch
    fans out instead.  Only whole path entries are elided (a path's copies
    must all be covered); hops after the switch are kept, so delivery and
    the congestion bottleneck are untouched.
    """
    if s.collective != ALLGATHER:
        raise CollschedError(f"multicast pruning applies to allgather, got {s.collective}")
    return _prune(s, t, "multicast")


def prune_aggregation(s: Schedule, t: Topology) -> Schedule:
    """Mirror of `prune_multicast` for reduce-scatter: receives made
    redundant by in-switch aggregation are elided on the reversed
    traversal, using nodes' aggregation capability."""
    if s.collective != REDUCE_SCATTER:
        raise CollschedError(
            f"aggregation pruning applies to reduce_scatter, got {s.collective}"
        )
    reversed_view = _reverse_core(s, ALLGATHER)
    pruned = _prune(reversed_view, t, "aggregation")
    return _reverse_core(pruned, REDUCE_SCATTER)


# ---------------------------------------------------------------------------
# Usage accounting (shared by exports; the verify module recomputes its own)
# ---------------------------------------------------------------------------

def link_usage(s: Schedule) -> dict[tuple[str, str], int]:
    """Tree-copy units carried per physical link, pruning applied."""
    if s.collective == ALLREDUCE:
        raise CollschedError("allreduce phases must be accounted separately")
    usage: dict[tuple[str, str], int] = {}
    for rt in s.roots:
        for batch in rt.batches:
            for edge in batch.edges:
                for pu in edge.paths:
                    for a, b in zip(pu.path, pu.path[1:]):
                        usage[(a, b)] = usage.get((a, b), 0) + pu.multiplicity
            for hop in batch.pruned:
                usage[(hop.src, hop.dst)] = usage[(hop.src, hop.dst)] - hop.multiplicity
    return {pair: units for pair, units in usage.items() if units != 0}


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _frac(f: Fraction) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}"


def _parse_frac(text) -> Fraction:
    if not isinstance(text, str) or "/" not in text:
        raise CollschedError(f"expected a 'p/q' rational string, got {text!r}")
    num, _, den = text.partition("/")
    try:
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError) as exc:
        raise CollschedError(f"bad rational {text!r}: {exc}") from None


def _schedule_dict(s: Schedule) -> dict:
    doc = {
        "collective": s.collective,
        "num_compute_nodes": s.num_compute,
        "trees_per_root": s.k,
        "optimal_inv_x": _frac(s.inv_x_star),
        "tree_bandwidth": _frac(s.y),
        "scale_U": _frac(s.U),
        "exact_bound": s.exact,
    }
    if s.collective == ALLREDUCE:
        doc["phases"] = [_schedule_dict(p) for p in s.phases]
        return doc
    doc["roots"] = [
        {
            "root": rt.root,
            "batches": [
                {
                    "multiplicity": b.multiplicity,
                    "edges": [
                        {
                            "src": e.src,
                            "dst": e.dst,
                            "paths": [
                                {"path": list(p.path), "multiplicity": p.multiplicity}
                                for p in e.paths
                            ],
                        }
                        for e in b.edges
                    ],
                    "pruned": [
                        {"src": h.src, "dst": h.dst, "multiplicity": h.multiplicity}
                        for h in b.pruned
                    ],
                }
                for b in rt.batches
            ],
        }
        for rt in s.roots
    ]
    return doc


def _schedule_from_dict(doc: dict) -> Schedule:
    collective = doc["collective"]
    if collective not in (ALLGATHER, REDUCE_SCATTER, ALLREDUCE):
        raise CollschedError(f"unknown collective {collective!r}")
    common = dict(
        collective=collective,
        num_compute=int(doc["num_compute_nodes"]),
        k=int(doc["trees_per_root"]),
        U=_parse_frac(doc["scale_U"]),
        y=_parse_frac(doc["tree_bandwidth"]),
        inv_x_star=_parse_frac(doc["optimal_inv_x"]),
        exact=bool(doc.get("exact_bound", True)),
    )
    if collective == ALLREDUCE:
        phases = tuple(_schedule_from_dict(p) for p in doc.get("phases", ()))
        if len(phases) != 2:
            raise CollschedError("allreduce schedules carry exactly two phases")
        return Schedule(roots=(), phases=phases, **common)
    roots = tuple(
        RootTrees(
            root=rd["root"],
            batches=tuple(
                ScheduleBatch(
                    multiplicity=int(bd["multiplicity"]),
                    edges=tuple(
                        ScheduleEdge(
                            src=ed["src"],
                            dst=ed["dst"],
                            paths=tuple(
                                PathUse(tuple(pd["path"]), int(pd["multiplicity"]))
                                for pd in ed["paths"]
                            ),
                        )
                        for ed in bd["edges"]
                    ),
                    pruned=tuple(
                        PrunedHop(hd["src"], hd["dst"], int(hd.get("multiplicity", 1)))
                        for hd in bd.get("pruned", ())
                    ),
                )
                for bd in rd["batches"]
            ),
        )
        for rd in doc["roots"]
    )
    return Schedule(roots=roots, **common)


def parse_schedule(text: str) -> Schedule:
    """Inverse of `export(s, "json")`; field-for-field reconstruction."""
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise CollschedError(f"schedule is not valid JSON: {exc}") from None
    try:
        return _schedule_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise CollschedError(f"malformed schedule document: {exc!r}") from None


def _dot(s: Schedule) -> str:
    if s.collective == ALLREDUCE:
        return "".join(_dot(p) for p in s.phases)
    lines: list[str] = []
    for rt in s.roots:
        if not rt.batches:
            continue
        batch = rt.batches[0]
        usage: dict[tuple[str, str], int] = {}
        for edge in batch.edges:
            for pu in edge.paths:
                for a, b in zip(pu.path, pu.path[1:]):
                    usage[(a, b)] = usage.get((a, b), 0) + pu.multiplicity
        for hop in batch.pruned:
            usage[(hop.src, hop.dst)] -= hop.multiplicity
        lines.append(f'digraph "{s.collective}_{rt.root}" {{')
        lines.append(f'  label="root {rt.root}, multiplicity {batch.multiplicity}";')
        for a, b in sorted(pair for pair, units in usage.items() if units > 0):
            lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
    return "\n".join(lines) + "\n"


def export(s: Schedule, format: str) -> str:
    """Serialize a schedule: "json" is canonical and round-trips through
    `parse_schedule`; "dot" renders each root's first batch (one digraph
    per rendered tree, pruning applied) for human inspection."""
    if format == "json":
        return json.dumps(_schedule_dict(s), indent=2) + "\n"
    if format == "dot":
        return _dot(s)
    raise CollschedError(f"unknown export format {format!r}")
