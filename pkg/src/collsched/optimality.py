"""Exact throughput optimality of allgather on a validated topology.

The optimal per-unit communication time ratio is

    inv_x_star  =  max over cuts S ⊂ V, S not ⊇ all compute nodes
                   of  |S ∩ compute| / B+(S)

where B+(S) is the total bandwidth leaving S.  Rather than enumerate cuts,
`bottleneck_search` binary-searches the ratio using a max-flow feasibility
probe, then snaps the final interval to the unique fraction with a small
denominator.  The denominator bound is sound because any cut beating the
single-node-complement cut (N-1)/minB- must have exit bandwidth at most
minB- (exit bandwidth larger than that makes its ratio strictly smaller).

All arithmetic is exact rationals; no floating point enters the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import CollschedError, NoFraction, NotEulerianAfterFloor
from .maxflow import FlowGraph, build_allgather_aux, fresh_name, min_flow_at_least
from .topology import CAPACITY_BUDGET, Topology, require_valid
from .errors import Overflow


@dataclass(frozen=True)
class OptimalityResult:
    """Outcome of the unrestricted optimality search.

    inv_x_star: exact optimal ratio (per-unit time is inv_x_star / N);
    U: capacity scale factor (U*b_e is integral for every link);
    k: number of spanning trees per compute root;
    y: bandwidth carried by each tree (y = 1/U, and k*y = 1/inv_x_star).
    """

    inv_x_star: Fraction
    U: Fraction
    k: int
    y: Fraction
    search_iterations: int

    # The congestion bound inv_x_star/N is met with equality by generated
    # schedules; fixed-k results override this.
    @property
    def exact(self) -> bool:
        return True


@dataclass(frozen=True)
class FixedKResult:
    """Outcome of the tree-count-restricted search.

    U_star is the minimal scale such that k trees per root exist in the
    graph with capacities floor(U_star*b_e); achieved_inv_throughput =
    U_star/k is the corresponding per-unit time ratio (>= the unrestricted
    inv_x_star, within 1/(k*min b_e) of it).
    """

    k: int
    U_star: Fraction
    achieved_inv_throughput: Fraction
    floored_capacities: dict[tuple[str, str], int]
    search_iterations: int

    # Uniform metadata interface shared with OptimalityResult so the
    # schedule assembly and validator can consume either.
    @property
    def inv_x_star(self) -> Fraction:
        return self.achieved_inv_throughput

    @property
    def U(self) -> Fraction:
        return self.U_star

    @property
    def y(self) -> Fraction:
        return 1 / self.U_star

    @property
    def exact(self) -> bool:
        # Capacity floors can leave the realized congestion strictly below
        # U_star/(N*k), so the bound is an upper bound, not an identity.
        return False


# ---------------------------------------------------------------------------
# Fraction recovery
# ---------------------------------------------------------------------------

def _simplest_between(a: int, b: int, c: int, d: int) -> tuple[int, int]:
    """Smallest-denominator fraction p/q with a/b <= p/q <= c/d.

    Continued-fraction descent; all inputs non-negative, b,d >= 1 and
    a/b <= c/d.  Ties on denominator resolve to the smaller numerator.
    """
    ceil_lo = -((-a) // b)
    if ceil_lo * d <= c:  # an integer lies in the interval
        return ceil_lo, 1
    i = a // b  # == floor(c/d) here, both fractional parts nonzero
    # x = i + 1/y with y in the reciprocal (flipped) interval
    p, q = _simplest_between(d, c - i * d, b, a - i * b)
    return i * p + q, p


def _farey_neighbors(f: Fraction, max_den: int) -> tuple[Fraction, Fraction]:
    """The closest fractions below and above f among all fractions with
    denominator <= max_den (f itself must have denominator <= max_den)."""
    p, q = f.numerator, f.denominator
    if q > max_den:
        raise CollschedError("fraction denominator already exceeds the bound")
    if q == 1:
        # integers: nearest neighbors at distance 1/max_den
        return (
            Fraction(p * max_den - 1, max_den),
            Fraction(p * max_den + 1, max_den),
        )
    # left neighbor a/b: p*b - q*a = 1 with the largest b <= max_den
    b0 = pow(p, -1, q)
    b = b0 + q * ((max_den - b0) // q)
    a = (p * b - 1) // q
    # right neighbor c/d: q*c - p*d = 1 with the largest d <= max_den
    d0 = (-b0) % q
    d = d0 + q * ((max_den - d0) // q)
    c = (p * d + 1) // q
    return Fraction(a, b), Fraction(c, d)


def recover_fraction(l: Fraction, r: Fraction, max_den: int) -> Fraction:
    """The unique fraction p/q in [l, r] with q <= max_den.

    Uses the smallest-denominator fraction in the interval, then asserts
    uniqueness by checking that its neighbors among denominator-<=max_den
    fractions fall outside [l, r].  Raises NoFraction when the interval
    holds zero or several candidates (a broken search precondition).
    """
    l = Fraction(l)
    r = Fraction(r)
    if max_den < 1:
        raise NoFraction("denominator bound must be >= 1")
    if l > r:
        raise NoFraction(f"empty interval [{l}, {r}]")
    if l < 0:
        raise NoFraction("negative interval endpoints are not supported")
    p, q = _simplest_between(l.numerator, l.denominator, r.numerator, r.denominator)
    if q > max_den:
        raise NoFraction(
            f"no fraction with denominator <= {max_den} lies in [{l}, {r}]"
        )
    f = Fraction(p, q)
    below, above = _farey_neighbors(f, max_den)
    if below >= l or above <= r:
        raise NoFraction(
            f"interval [{l}, {r}] holds more than one fraction with denominator <= {max_den}"
        )
    return f


# ---------------------------------------------------------------------------
# Unrestricted optimality search
# ---------------------------------------------------------------------------

def _probe_feasible(t: Topology, inv_x: Fraction) -> bool:
    """True iff trees of total per-root bandwidth x = 1/inv_x fit, i.e. the
    max flow from the auxiliary source to every compute node reaches N*x."""
    g, mult, source = build_allgather_aux(t, inv_x)
    x = 1 / Fraction(inv_x)
    target = t.num_compute * x.numerator  # == N * x * mult, already integral
    return min_flow_at_least(g, source, t.compute_ids, target)


def bottleneck_search(t: Topology) -> OptimalityResult:
    """Compute the exact optimal ratio inv_x_star plus (U, k, y).

    Binary search over candidate ratios: a probe 1/x is feasible iff
    1/x >= inv_x_star, so the invariant "r feasible, l below the optimum"
    holds throughout.  The loop stops once r - l < 1/minB-^2, at which
    point the interval contains exactly one fraction with denominator
    <= minB-, and that fraction is inv_x_star.
    """
    require_valid(t)
    n = t.num_compute
    min_b_in = t.min_compute_in_bw()
    l = Fraction(n - 1, min_b_in)
    r = Fraction(n - 1)
    tol = Fraction(1, min_b_in * min_b_in)
    iterations = 0
    while r - l >= tol:
        mid = (l + r) / 2
        if _probe_feasible(t, mid):
            r = mid
        else:
            l = mid
        iterations += 1
    inv = recover_fraction(l, r, min_b_in)
    if not _probe_feasible(t, inv):
        # The recovered optimum must itself be feasible; anything else means
        # an exactness bug (e.g. a capacity overflow upstream).
        raise CollschedError(f"recovered ratio {inv} fails the feasibility re-check")
    bandwidths = [link.bandwidth for link in t.links]
    U, k, y = derive_schedule_params(inv, bandwidths)
    return OptimalityResult(inv_x_star=inv, U=U, k=k, y=y, search_iterations=iterations)


def iteration_ceiling(t: Topology) -> int:
    """Worst-case iteration count of `bottleneck_search` on t."""
    min_b_in = t.min_compute_in_bw()
    return math.ceil(math.log2(t.num_compute * min_b_in * min_b_in))


def derive_schedule_params(
    inv_x_star: Fraction, bandwidths
) -> tuple[Fraction, int, Fraction]:
    """Smallest (U, k, y) realizing the ratio: with inv_x_star = p/q in
    lowest terms and g = gcd(q, all bandwidths), U = p/g, k = q/g, y = g/p.

    U*b_e is then integral for every link, k = U/inv_x_star is the minimum
    integer tree count admitting such a scale, and each tree carries y.
    """
    inv = Fraction(inv_x_star)
    p, q = inv.numerator, inv.denominator
    g = q
    for b in bandwidths:
        g = math.gcd(g, b)
        if g == 1:
            break
    U = Fraction(p, g)
    k = q // g
    y = Fraction(g, p)
    return U, k, y


# ---------------------------------------------------------------------------
# Fixed tree-count search
# ---------------------------------------------------------------------------

def _floored_caps(t: Topology, U: Fraction) -> dict[tuple[str, str], int]:
    num, den = U.numerator, U.denominator
    return {
        (l.src, l.dst): (num * l.bandwidth) // den for l in t.links
    }


def _fixed_k_feasible(t: Topology, U: Fraction, k: int) -> bool:
    """k trees per root fit in capacities floor(U*b_e) iff the max flow from
    a source with k-capacity arcs to every compute node reaches N*k."""
    caps = _floored_caps(t, U)
    g = FlowGraph()
    for node in t.nodes:
        g.add_vertex(node.id)
    source = fresh_name("s", t.node_by_id)
    g.add_vertex(source)
    for (a, b), c in caps.items():
        if c > 0:
            g.add_arc(a, b, c)
    for c in t.compute_ids:
        g.add_arc(source, c, k)
    target = t.num_compute * k
    return min_flow_at_least(g, source, t.compute_ids, target)


def fixed_k_search(t: Topology, k: int) -> FixedKResult:
    """Minimal scale U_star such that k trees per root exist with capacities
    floor(U_star*b_e); the achieved ratio U_star/k is within 1/(k*min b_e)
    of the unrestricted optimum and non-increasing when k doubles.

    Raises NotEulerianAfterFloor — with the finished result attached as
    ``exc.result`` — when the floored capacities are not balanced at every
    node, in which case no schedule can be realized for this k even though
    U_star itself is well-defined.
    """
    require_valid(t)
    if k < 1:
        raise CollschedError(f"tree count must be >= 1, got {k}")
    n = t.num_compute
    min_b_in = t.min_compute_in_bw()
    max_b = max(l.bandwidth for l in t.links)
    l = Fraction((n - 1) * k, min_b_in)
    r = Fraction((n - 1) * k)
    tol = Fraction(1, max_b * max_b)
    iterations = 0
    while r - l >= tol:
        mid = (l + r) / 2
        if (mid.numerator * max_b) > CAPACITY_BUDGET:
            raise Overflow("probe scale exceeds the capacity budget")
        if _fixed_k_feasible(t, mid, k):
            r = mid
        else:
            l = mid
        iterations += 1
    U_star = recover_fraction(l, r, max_b)
    if not _fixed_k_feasible(t, U_star, k):
        raise CollschedError(f"recovered scale {U_star} fails the feasibility re-check")
    floored = _floored_caps(t, U_star)
    result = FixedKResult(
        k=k,
        U_star=U_star,
        achieved_inv_throughput=U_star / k,
        floored_capacities=floored,
        search_iterations=iterations,
    )
    balance: dict[str, int] = {node.id: 0 for node in t.nodes}
    for (a, b), c in floored.items():
        balance[a] -= c
        balance[b] += c
    unbalanced = sorted(node for node, d in balance.items() if d != 0)
    if unbalanced:
        raise NotEulerianAfterFloor(
            f"floored capacities for k={k} are unbalanced at {', '.join(unbalanced)}",
            result=result,
        )
    return result
