"""Structural audit of a network against properties P1-P5.

P1  connected.
P2  short cycles (length <= ln n / (10 ln ln n)) are pairwise at distance
    >= ln n / ln ln n.
P3  at least one cycle each of lengths 3, 5 and 7.
P4  for every excluded set L and every S in V \\ L with |S| <= n/2, the
    conductance across the cut (S, V \\ (L u S)) in G[V \\ L] is at least
    C_1 / (6 C_2) times the strength of S in G[V \\ L].
P5  every degree lies strictly inside (delta C ln n, 4 C ln n), with C taken
    as alpha from p = alpha ln n / n.

P4 quantifies over all subsets, so it is audited rather than decided: all
subsets up to a size cap are enumerated, then random subsets and BFS balls of
larger sizes are tried. A clean audit that did not cover every size is
reported as ``sampled-holds``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from numba import njit

from .conductance import Network
from .graph import Graph, bfs_distances, components, cycles_up_to, find_cycle
from .rng import generator

__all__ = [
    "HOLDS",
    "FAILS",
    "SAMPLED_HOLDS",
    "INAPPLICABLE",
    "PropernessReport",
    "short_cycle_cap",
    "cycle_separation",
    "check_p1_p3",
    "check_p2",
    "check_p4",
    "check_p5",
    "p4_ratio",
    "audit",
]

HOLDS = "holds"
FAILS = "fails"
SAMPLED_HOLDS = "sampled-holds"
INAPPLICABLE = "inapplicable"


@dataclass
class PropernessReport:
    verdicts: dict[str, str] = field(default_factory=dict)
    witnesses: dict[str, object] = field(default_factory=dict)
    parameters: dict[str, object] = field(default_factory=dict)

    def merge(self, other: PropernessReport) -> PropernessReport:
        return PropernessReport(
            {**self.verdicts, **other.verdicts},
            {**self.witnesses, **other.witnesses},
            {**self.parameters, **other.parameters},
        )

    def to_dict(self) -> dict:
        return {
            "verdicts": dict(sorted(self.verdicts.items())),
            "witnesses": _jsonable(dict(sorted(self.witnesses.items()))),
            "parameters": _jsonable(self.parameters),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def short_cycle_cap(n: int) -> int:
    """Longest cycle length counted as short: floor(ln n / (10 ln ln n))."""
    return math.floor(math.log(n) / (10 * math.log(math.log(n))))


def cycle_separation(n: int) -> int:
    """Required distance between short cycles: ceil(ln n / ln ln n)."""
    return math.ceil(math.log(n) / math.log(math.log(n)))


def check_p2(g: Graph, max_len: int | None = None, min_sep: int | None = None) -> PropernessReport:
    """Short cycles must be pairwise far apart (vertex-to-vertex hop distance)."""
    cap = short_cycle_cap(g.n) if max_len is None else max_len
    sep = cycle_separation(g.n) if min_sep is None else min_sep
    params = {"p2_short_cycle_cap": cap, "p2_min_separation": sep}
    if cap < 3:
        return PropernessReport({"P2": HOLDS}, {"P2": "no cycle is short at this n"}, params)
    cyc = cycles_up_to(g, cap)
    for a in range(len(cyc)):
        dist = bfs_distances(g, cyc[a])
        for b in range(a + 1, len(cyc)):
            d = dist[cyc[b]]
            d = d[d >= 0]
            if len(d) and d.min() < sep:
                w = {"cycles": [cyc[a], cyc[b]], "distance": int(d.min())}
                return PropernessReport({"P2": FAILS}, {"P2": w}, params)
    return PropernessReport({"P2": HOLDS}, {}, params)


def check_p1_p3(g: Graph) -> PropernessReport:
    if g.n < 3:
        raise ValueError("properness needs n >= 3")
    rep = PropernessReport()
    comp = components(g)
    if comp.is_connected:
        rep.verdicts["P1"] = HOLDS
    else:
        rep.verdicts["P1"] = FAILS
        other = int(np.flatnonzero(comp.component_id != comp.component_id[0])[0])
        rep.witnesses["P1"] = {"disconnected_pair": [0, other], "components": comp.count}
    rep = rep.merge(check_p2(g))
    found = {}
    for length in (3, 5, 7):
        cyc = find_cycle(g, length)
        if cyc is None:
            rep.verdicts["P3"] = FAILS
            rep.witnesses["P3"] = {"missing_cycle_length": length}
            break
        found[length] = cyc
    else:
        rep.verdicts["P3"] = HOLDS
        rep.witnesses["P3"] = {"cycles": found}
    return rep


def p4_ratio(net: Network, subset: Iterable[int], excluded: Iterable[int] = ()) -> float:
    """Cut conductance over subset strength, both inside G[V \\ excluded].

    Computed edge by edge from the definition; NaN when the subset has no
    strength left after removing ``excluded``.
    """
    S = set(int(v) for v in subset)
    L = set(int(v) for v in excluded)
    if S & L:
        raise ValueError("subset intersects the excluded set")
    cut = 0.0
    vol = 0.0
    for (i, j), c in zip(net.graph.edges.tolist(), net.conductance.tolist()):
        if i in L or j in L:
            continue
        vol += c * ((i in S) + (j in S))
        if (i in S) != (j in S):
            cut += c
    return cut / vol if vol > 0 else float("nan")


class _CutEvaluator:
    """Vectorised ratio for many subsets of one subnetwork."""

    def __init__(self, net: Network, excluded: list[int]):
        keep = np.ones(net.n, dtype=bool)
        keep[excluded] = False
        e = net.graph.edges
        inside = keep[e[:, 0]] & keep[e[:, 1]]
        self.u = e[inside, 0]
        self.v = e[inside, 1]
        self.c = net.conductance[inside]
        self.strength = np.zeros(net.n)
        np.add.at(self.strength, self.u, self.c)
        np.add.at(self.strength, self.v, self.c)
        self.pool = np.flatnonzero(keep)
        self.n = net.n

    def ratio(self, mask: np.ndarray) -> float:
        vol = self.strength[mask].sum()
        internal = self.c[mask[self.u] & mask[self.v]].sum()
        return (vol - 2.0 * internal) / vol if vol > 0 else float("nan")

    def small_violation(self, k: int, threshold: float) -> list[int] | None:
        """First violating subset of size k (k <= 2 in closed form)."""
        pool = self.pool
        s = self.strength
        if k == 1:
            # a single vertex has ratio 1, or 0/0 if isolated inside the subnetwork
            bad = pool[s[pool] == 0]
            return [int(bad[0])] if len(bad) else None
        if k == 2:
            # non-adjacent pairs have ratio 1 unless both are isolated
            iso = pool[s[pool] == 0]
            if len(iso) >= 2:
                return [int(iso[0]), int(iso[1])]
            vol = s[self.u] + s[self.v]
            r = (vol - 2.0 * self.c) / vol
            bad = np.flatnonzero(~(r >= threshold))
            return [int(self.u[bad[0]]), int(self.v[bad[0]])] if len(bad) else None
        mask = np.zeros(self.n, dtype=bool)
        for S in itertools.combinations(pool.tolist(), k):
            mask[list(S)] = True
            if not self.ratio(mask) >= threshold:
                return list(S)
            mask[list(S)] = False
        return None


@njit(cache=True)
def _ball_scan(indptr, indices, weights, strength, allowed, root, kmin, kmax, threshold):
    # Grow a BFS ball from root one vertex at a time; return the first size
    # in [kmin, kmax] whose cut ratio falls below threshold, else -1.
    n = strength.shape[0]
    in_s = np.zeros(n, dtype=np.bool_)
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 1
    queue[0] = root
    seen[root] = True
    vol = 0.0
    internal = 0.0
    k = 0
    while head < tail and k < kmax:
        v = queue[head]
        head += 1
        in_s[v] = True
        k += 1
        vol += strength[v]
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if not allowed[w]:
                continue
            if in_s[w] and w != v:
                internal += weights[e]
            if not seen[w]:
                seen[w] = True
                queue[tail] = w
                tail += 1
        if k >= kmin:
            r = (vol - 2.0 * internal) / vol if vol > 0 else np.nan
            if not r >= threshold:
                return k, r, queue[:k].copy()
    return -1, 0.0, queue[:0].copy()


def check_p4(
    net: Network,
    excluded: Iterable[int] | Iterable[Iterable[int]] = (),
    exhaustive_cap: int = 2,
    samples: int = 10_000,
    seed: int = 0,
    bounds: tuple[float, float] | None = None,
    ball_roots: int = 64,
) -> PropernessReport:
    """Audit the conductance-weighted expansion property.

    Args:
        net: network to audit.
        excluded: one excluded set ``L`` or a list of them.
        exhaustive_cap: every subset up to this size is checked.
        samples: number of uniformly random larger subsets (size uniform on
            ``exhaustive_cap+1 .. floor(n/2)``, then a uniform subset).
        seed: sampling seed.
        bounds: declared ``(C_1, C_2)``; defaults to the observed range.
        ball_roots: BFS balls of every size up to ``n/2`` are grown from this
            many random roots. Sparse cuts on lattice-like graphs are
            invisible to uniform sampling but show up as balls.

    Returns:
        Report with verdict ``holds`` (exhaustive coverage of every size),
        ``sampled-holds`` or ``fails`` with the violating subset.
    """
    excl = list(excluded)
    sets = excl if excl and isinstance(excl[0], (list, tuple, set, frozenset, np.ndarray)) else [excl]
    c1, c2 = net.bounds if bounds is None else bounds
    threshold = c1 / (6.0 * c2)
    half = net.n // 2
    params = {
        "C1": c1, "C2": c2, "p4_threshold": threshold, "exhaustive_cap": exhaustive_cap,
        "samples": samples, "seed": seed, "ball_roots": ball_roots,
        "excluded_sets": [sorted(int(v) for v in L) for L in sets],
        "method": "exhaustive+sampled+bfs-balls",
    }
    rng = generator(seed)
    complete = True
    g = net.graph

    def violation(L, S, r):
        w = {"subset": sorted(int(v) for v in S), "excluded": sorted(int(v) for v in L),
             "ratio": float(r), "threshold": threshold}
        return PropernessReport({"P4": FAILS}, {"P4": w}, params)

    for L in sets:
        L = [int(v) for v in L]
        ev = _CutEvaluator(net, L)
        pool = ev.pool
        top = min(exhaustive_cap, half, len(pool))
        for k in range(1, top + 1):
            S = ev.small_violation(k, threshold)
            if S is not None:
                return violation(L, S, p4_ratio(net, S, L))
        upper = min(half, len(pool))
        if upper <= top:
            continue
        complete = False
        mask = np.zeros(net.n, dtype=bool)
        for _ in range(samples):
            k = int(rng.integers(top + 1, upper + 1))
            mask[:] = False
            mask[rng.choice(pool, size=k, replace=False)] = True
            r = ev.ratio(mask)
            if not r >= threshold:
                return violation(L, np.flatnonzero(mask), r)
        allowed = np.zeros(net.n, dtype=bool)
        allowed[pool] = True
        roots = pool if len(pool) <= ball_roots else np.sort(rng.choice(pool, size=ball_roots, replace=False))
        for root in roots:
            k, r, S = _ball_scan(g.indptr, g.indices, net.weights, ev.strength, allowed,
                                 int(root), top + 1, upper, threshold)
            if k >= 0:
                return violation(L, S, r)
    return PropernessReport({"P4": HOLDS if complete else SAMPLED_HOLDS}, {}, params)


def check_p5(g: Graph, alpha: float, delta: float = 0.1) -> PropernessReport:
    """Degree band ``delta * alpha * ln n < d(i) < 4 * alpha * ln n``."""
    if g.n < 3:
        raise ValueError("properness needs n >= 3")
    lo = delta * alpha * math.log(g.n)
    hi = 4 * alpha * math.log(g.n)
    d = g.degrees()
    params = {"alpha": alpha, "delta": delta, "p5_lower": lo, "p5_upper": hi}
    bad = np.flatnonzero((d <= lo) | (d >= hi))
    if len(bad):
        v = int(bad[0])
        return PropernessReport({"P5": FAILS}, {"P5": {"vertex": v, "degree": int(d[v])}}, params)
    return PropernessReport({"P5": HOLDS}, {}, params)


def audit(
    net: Network,
    alpha: float,
    delta: float = 0.1,
    excluded: Iterable[int] = (),
    exhaustive_cap: int = 2,
    samples: int = 10_000,
    seed: int = 0,
    ball_roots: int = 64,
) -> PropernessReport:
    """All five properties in one report."""
    rep = check_p1_p3(net.graph)
    rep = rep.merge(check_p4(net, excluded, exhaustive_cap, samples, seed, ball_roots=ball_roots))
    return rep.merge(check_p5(net.graph, alpha, delta))
