"""Concentration of interior potentials and the leader-follower consensus model.

The predicted constant is the strength-weighted mean of the boundary
potentials, ``sum_k p_k c_k / sum_k c_k``. On well-connected networks every
interior potential sits close to it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .conductance import Network
from .errors import ConvergenceError, EmptyInteriorError, ModelingError
from .solver import BoundaryCondition, PotentialField, defined_mask, harmonic_defects

__all__ = [
    "ConcentrationStats",
    "ConsensusState",
    "predicted_constant",
    "concentration_stats",
    "consensus_run",
]


def predicted_constant(net: Network, bc: BoundaryCondition) -> float:
    s = net.strengths[list(bc.vertices)]
    if np.any(s == 0):
        v = bc.vertices[int(np.flatnonzero(s == 0)[0])]
        raise ModelingError(f"boundary vertex {v} is isolated")
    return float(np.dot(bc.potentials, s) / s.sum())


@dataclass
class ConcentrationStats:
    v_bar_c: float
    max_dev: float
    mean_dev: float
    std_dev: float
    interior_mean: float
    interior_median: float
    interior_count: int
    histogram: list[int]
    bin_edges: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def concentration_stats(
    field: PotentialField, net: Network, bc: BoundaryCondition, bins: int = 50
) -> ConcentrationStats:
    """Deviation of the defined interior potentials from the predicted constant.

    ``std_dev`` is the standard deviation of the signed deviations
    ``V_i - v_bar_c``; the histogram has ``bins`` equal-width bins on [0, 1].
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    vbar = predicted_constant(net, bc)
    vals = field.values[field.interior_mask(bc)]
    if len(vals) == 0:
        raise EmptyInteriorError("no defined interior vertices")
    dev = vals - vbar
    counts, edges = np.histogram(np.clip(vals, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
    return ConcentrationStats(
        v_bar_c=vbar,
        max_dev=float(np.abs(dev).max()),
        mean_dev=float(np.abs(dev).mean()),
        std_dev=float(dev.std()),
        interior_mean=float(vals.mean()),
        interior_median=float(np.median(vals)),
        interior_count=int(len(vals)),
        histogram=counts.tolist(),
        bin_edges=edges.tolist(),
    )


@dataclass
class ConsensusState:
    scores: np.ndarray
    leaders: BoundaryCondition
    t: int
    delta: float
    hull_ok: bool = True


def consensus_run(
    net: Network,
    bc: BoundaryCondition,
    tol: float = 1e-10,
    max_steps: int = 10_000_000,
    initial: np.ndarray | None = None,
    window: int = 16,
) -> tuple[ConsensusState, PotentialField]:
    """Synchronous leader-follower averaging ``s(t+1) = P s(t)``.

    Leaders keep their scores; every follower takes the conductance-weighted
    mean of its neighbours' scores from the previous step. Iteration stops once
    the largest change ``delta`` is at most ``tol`` and the geometric tail
    ``delta * r / (1 - r)`` of the remaining motion (``r`` the observed decay
    rate over ``window`` steps) is also within ``tol``.

    Args:
        net: the network; unit conductances give the plain averaging model.
        bc: leaders and their fixed scores.
        tol: stopping tolerance.
        max_steps: step budget.
        initial: starting scores (default all zero); leader entries are
            overwritten by their pinned values.

    Returns:
        The final state and the scores packaged as a :class:`PotentialField`.

    Raises:
        ConvergenceError: ``max_steps`` reached, carrying the last delta.
    """
    bc.validate(net)
    defined = defined_mask(net, bc)
    leaders = np.array(bc.vertices)
    follower = defined.copy()
    follower[leaders] = False
    fidx = np.flatnonzero(follower)
    g = net.graph
    W = sp.csr_matrix((net.weights, g.indices, g.indptr), shape=(net.n, net.n))
    P = (sp.diags(1.0 / net.strengths[fidx]) @ W[fidx]).tocsr()

    s = np.zeros(net.n) if initial is None else np.array(initial, dtype=float)
    s[leaders] = bc.potentials
    s[~defined] = 0.0
    # averaging keeps followers inside the hull of the initial and leader scores
    lo = min(bc.hull[0], s[fidx].min()) if len(fidx) else 0.0
    hi = max(bc.hull[1], s[fidx].max()) if len(fidx) else 0.0
    slack = 1e-12
    hull_ok = True
    hist = np.zeros(window + 1)
    delta = math.inf
    for t in range(1, max_steps + 1):
        new = P @ s
        delta = float(np.abs(new - s[fidx]).max()) if len(fidx) else 0.0
        s[fidx] = new
        if len(fidx):
            hull_ok &= bool(new.min() >= lo - slack and new.max() <= hi + slack)
        old = hist[t % (window + 1)]
        hist[t % (window + 1)] = delta
        if delta == 0.0:
            break
        if delta <= tol and t > window and old > 0:
            r = (delta / old) ** (1.0 / (window + 1))
            if r < 1.0 and delta * r / (1.0 - r) <= tol:
                break
    else:
        raise ConvergenceError(f"consensus did not settle in {max_steps} steps (delta {delta:.3g})", delta, max_steps)

    values = np.where(defined, s, np.nan)
    state = ConsensusState(values.copy(), bc, t, delta, hull_ok)
    res = float(harmonic_defects(net, values, follower).max()) if len(fidx) else 0.0
    return state, PotentialField(values, defined, res, t, 1.0, "consensus")
