"""Weighted random walks on electrical networks.

A walk at ``i`` moves to neighbor ``j`` with probability ``c_ij / c_i``.
Three estimators live here:

* first-hit probabilities of the boundary set, whose weighted sum is a Monte
  Carlo estimate of the harmonic potential;
* mixing diagnostics on the network with the boundary removed (total
  variation to the stationary law after a logarithmic number of steps, and
  the chance that a walk on the full network avoids the boundary meanwhile);
* long-run occupancy of a single walk.

Every walk draws from its own SplitMix64 substream keyed by ``(seed, a, b)``
(``a`` a start vertex or a tag, ``b`` the walk index), so a batch can be split
across workers and merged by summation without changing any result.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from numba import njit

from .conductance import Network
from .errors import BudgetError, DefinednessError, WalkError
from .graph import components, is_bipartite
from .rng import next_uniform, stream_state
from .solver import BoundaryCondition, defined_mask

__all__ = [
    "TransitionModel",
    "HittingEstimate",
    "MixingReport",
    "step",
    "hitting_probabilities",
    "mixing_diagnostics",
    "occupancy",
    "stationary_distribution",
    "exact_step_distribution",
    "exact_escape_probability",
    "tv_distance",
    "WALK_BUDGET",
]

WALK_BUDGET = 10**9

_TAG_MIX = 1
_TAG_ESCAPE = 2


class TransitionModel:
    """Per-vertex cumulative conductance tables for neighbor sampling."""

    __slots__ = ("indptr", "indices", "weights", "cumulative", "strengths", "n")

    def __init__(self, net: Network):
        g = net.graph
        self.n = net.n
        self.indptr = g.indptr
        self.indices = g.indices
        self.strengths = net.strengths
        self.weights = net.weights
        self.cumulative = _cumulative(g.indptr, net.weights)

    def probabilities(self) -> sp.csr_matrix:
        """Transition matrix as CSR; rows of isolated vertices are empty."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        data = self.weights / self.strengths[rows]
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def sample(self, v: int, u: float) -> int:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")
        if self.indptr[v] == self.indptr[v + 1]:
            raise WalkError(f"vertex {v} is isolated")
        return int(_pick(self.indptr, self.indices, self.cumulative, self.strengths, v, u))


@njit(cache=True)
def _cumulative(indptr, weights):
    out = np.empty_like(weights)
    for i in range(indptr.shape[0] - 1):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += weights[k]
            out[k] = s
    return out


@njit(cache=True, nogil=True)
def _pick(indptr, indices, cumulative, strengths, v, u):
    target = u * strengths[v]
    lo = indptr[v]
    hi = indptr[v + 1] - 1
    # first slot whose cumulative weight exceeds target
    while lo < hi:
        mid = (lo + hi) // 2
        if cumulative[mid] > target:
            hi = mid
        else:
            lo = mid + 1
    return indices[lo]


def step(model: TransitionModel, v: int, rng: np.random.Generator) -> int:
    """One transition from ``v`` using one uniform draw from ``rng``."""
    return model.sample(v, float(rng.random()))


@njit(cache=True, nogil=True)
def _hit_kernel(indptr, indices, cumulative, strengths, bidx, starts, walks, seed, K, budget):
    counts = np.zeros((starts.shape[0], K), dtype=np.int64)
    total = 0
    for a in range(starts.shape[0]):
        s = starts[a]
        for w in range(walks):
            state = stream_state(seed, s, w)
            v = s
            while bidx[v] < 0:
                state, u = next_uniform(state)
                v = _pick(indptr, indices, cumulative, strengths, v, u)
                total += 1
                if total > budget:
                    return counts, total, False
            counts[a, bidx[v]] += 1
    return counts, total, True


@dataclass
class HittingEstimate:
    """Monte Carlo first-hit probabilities for every start vertex.

    ``probabilities[i, k]`` is the fraction of walks from ``i`` whose first
    boundary vertex is ``bc.vertices[k]``; rows for vertices that were not
    simulated are NaN and ``walks[i]`` is 0.
    """

    probabilities: np.ndarray
    walks: np.ndarray
    stderr: np.ndarray
    potential: np.ndarray
    potential_se: np.ndarray
    total_steps: int

    @property
    def estimated(self) -> np.ndarray:
        return self.walks > 0


def hitting_probabilities(
    net: Network,
    bc: BoundaryCondition,
    walks_per_vertex: int,
    seed: int,
    starts: Iterable[int] | None = None,
    budget: int = WALK_BUDGET,
) -> HittingEstimate:
    """Estimate first-hit probabilities by running walks to the boundary.

    Args:
        net: the network.
        bc: boundary set; potentials weight the potential estimate.
        walks_per_vertex: independent walks from each start.
        seed: master seed for the per-walk substreams.
        starts: start vertices; default every vertex whose component touches
            the boundary.
        budget: cap on total steps across the whole batch.

    Raises:
        DefinednessError: a requested start cannot reach the boundary.
        BudgetError: the batch used more than ``budget`` steps.
    """
    if walks_per_vertex < 1:
        raise ValueError("walks_per_vertex must be >= 1")
    bc.validate(net)
    defined = defined_mask(net, bc)
    if starts is None:
        start_arr = np.flatnonzero(defined)
    else:
        start_arr = np.asarray(sorted({int(s) for s in starts}), dtype=np.int64)
        if len(start_arr) and (start_arr.min() < 0 or start_arr.max() >= net.n):
            raise IndexError("start vertex out of range")
        bad = start_arr[~defined[start_arr]]
        if len(bad):
            raise DefinednessError(f"vertex {int(bad[0])} lies in a component without boundary vertices")
    bidx = np.full(net.n, -1, dtype=np.int64)
    bidx[list(bc.vertices)] = np.arange(bc.K)
    model = TransitionModel(net)
    counts, total, ok = _hit_kernel(
        model.indptr, model.indices, model.cumulative, model.strengths, bidx,
        start_arr, int(walks_per_vertex), np.uint64(seed), bc.K, int(budget),
    )
    if not ok:
        raise BudgetError(f"walk budget of {budget} steps exhausted")

    K = bc.K
    probs = np.full((net.n, K), np.nan)
    walks = np.zeros(net.n, dtype=np.int64)
    probs[start_arr] = counts / walks_per_vertex
    walks[start_arr] = walks_per_vertex
    stderr = np.sqrt(probs * (1.0 - probs) / np.maximum(walks, 1)[:, None])
    p = np.array(bc.potentials)
    potential = probs @ p
    second = probs @ (p * p)
    var = np.maximum(second - potential**2, 0.0)
    potential_se = np.sqrt(var / np.maximum(walks, 1))
    return HittingEstimate(probs, walks, stderr, potential, potential_se, int(total))


@njit(cache=True, nogil=True)
def _endpoint_kernel(indptr, indices, cumulative, strengths, start, steps, samples, seed, tag):
    counts = np.zeros(indptr.shape[0] - 1, dtype=np.int64)
    for w in range(samples):
        state = stream_state(seed, tag, w)
        v = start
        for _ in range(steps):
            state, u = next_uniform(state)
            v = _pick(indptr, indices, cumulative, strengths, v, u)
        counts[v] += 1
    return counts


@njit(cache=True, nogil=True)
def _escape_kernel(indptr, indices, cumulative, strengths, blocked, start, steps, samples, seed, tag):
    kept = 0
    for w in range(samples):
        state = stream_state(seed, tag, w)
        v = start
        ok = not blocked[v]
        t = 0
        while ok and t < steps:
            state, u = next_uniform(state)
            v = _pick(indptr, indices, cumulative, strengths, v, u)
            ok = not blocked[v]
            t += 1
        if ok:
            kept += 1
    return kept


@njit(cache=True, nogil=True)
def _occupancy_kernel(indptr, indices, cumulative, strengths, start, steps, seed):
    counts = np.zeros(indptr.shape[0] - 1, dtype=np.int64)
    state = stream_state(seed, start, 0)
    v = start
    for _ in range(steps):
        state, u = next_uniform(state)
        v = _pick(indptr, indices, cumulative, strengths, v, u)
        counts[v] += 1
    return counts


def stationary_distribution(net: Network) -> np.ndarray:
    """``c_j / sum_i c_i``, the reversible stationary law of the walk."""
    return net.strengths / net.strengths.sum()


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def occupancy(net: Network, start: int, steps: int, seed: int) -> np.ndarray:
    """Fraction of the ``steps`` visits of one walk spent at each vertex."""
    model = TransitionModel(net)
    if net.graph.degree(start) == 0:
        raise WalkError(f"vertex {start} is isolated")
    counts = _occupancy_kernel(model.indptr, model.indices, model.cumulative, model.strengths,
                               int(start), int(steps), np.uint64(seed))
    return counts / steps


def exact_step_distribution(net: Network, start: int, steps: int) -> np.ndarray:
    """Law of the walk after ``steps`` transitions, by repeated products."""
    P = TransitionModel(net).probabilities().T.tocsr()
    x = np.zeros(net.n)
    x[start] = 1.0
    for _ in range(steps):
        x = P @ x
    return x


def exact_escape_probability(net: Network, excluded: Iterable[int], start: int, steps: int) -> float:
    """Probability that a walk from ``start`` avoids ``excluded`` at times 0..steps."""
    P = TransitionModel(net).probabilities().T.tocsr()
    blocked = np.zeros(net.n, dtype=bool)
    blocked[list(excluded)] = True
    x = np.zeros(net.n)
    x[start] = 1.0
    x[blocked] = 0.0
    for _ in range(steps):
        x = P @ x
        x[blocked] = 0.0
    return float(x.sum())


@dataclass
class MixingReport:
    """Mixing diagnostics for one start vertex.

    ``t0`` is ``ceil(k0 * ln n)`` and both estimators use walks of ``2 * t0``
    steps. ``tv_distance`` compares the empirical endpoint law of walks on the
    boundary-removed network with its stationary law; ``escape_prob`` is the
    fraction of walks on the full network that avoid the boundary throughout.
    """

    applicable: bool
    reason: str
    start: int
    k0: float
    t0: int
    steps: int
    samples: int
    tv_distance: float
    escape_prob: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def _excluded_vertices(excluded) -> list[int]:
    if excluded is None:
        return []
    if isinstance(excluded, BoundaryCondition):
        return list(excluded.vertices)
    return [int(v) for v in excluded]


def mixing_diagnostics(
    net: Network,
    excluded: BoundaryCondition | Iterable[int] | None,
    k0: float = 10.0,
    samples: int = 100_000,
    seed: int = 0,
    start: int | None = None,
) -> MixingReport:
    """Mixing time and boundary-avoidance diagnostics.

    Args:
        net: the full network.
        excluded: the boundary set removed to form the subnetwork.
        k0: horizon constant; ``t0 = ceil(k0 * ln n)``.
        samples: walks per estimator.
        seed: substream seed.
        start: start vertex (0-based, outside ``excluded``); default the
            smallest such vertex.

    Returns:
        A :class:`MixingReport`. When the subnetwork is disconnected or
        bipartite its stationary law is not a limit, and the report comes back
        with ``applicable=False`` and NaN diagnostics.
    """
    if k0 <= 0 or samples < 1:
        raise ValueError("k0 must be positive and samples >= 1")
    ex = _excluded_vertices(excluded)
    blocked = np.zeros(net.n, dtype=bool)
    blocked[ex] = True
    if start is None:
        start = int(np.flatnonzero(~blocked)[0])
    if blocked[start]:
        raise ValueError(f"start vertex {start} is excluded")
    t0 = math.ceil(k0 * math.log(net.n))
    steps = 2 * t0

    def report(applicable, reason, tv=float("nan"), esc=float("nan")):
        return MixingReport(applicable, reason, int(start), float(k0), t0, steps, int(samples), tv, esc, int(seed))

    keep = np.flatnonzero(~blocked)
    sub, labels = net.induced(keep) if ex else (net, np.arange(net.n))
    if not components(sub.graph).is_connected:
        return report(False, "subnetwork without the boundary is disconnected")
    if is_bipartite(sub.graph):
        return report(False, "subnetwork without the boundary is bipartite")

    m_sub = TransitionModel(sub)
    local = int(np.searchsorted(labels, start))
    counts = _endpoint_kernel(m_sub.indptr, m_sub.indices, m_sub.cumulative, m_sub.strengths,
                              local, steps, int(samples), np.uint64(seed), _TAG_MIX)
    tv = tv_distance(counts / samples, stationary_distribution(sub))

    m_full = TransitionModel(net)
    kept = _escape_kernel(m_full.indptr, m_full.indices, m_full.cumulative, m_full.strengths,
                          blocked, int(start), steps, int(samples), np.uint64(seed), _TAG_ESCAPE)
    return report(True, "", tv, kept / samples)
