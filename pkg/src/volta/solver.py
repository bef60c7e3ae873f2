"""Dirichlet problem for conductance-weighted harmonic functions.

Given boundary vertices with pinned potentials, find the potential that equals
the conductance-weighted average of its neighbors at every other vertex. This
is Kirchhoff's current law with Ohm's law at each interior vertex.

:func:`solve` runs in-place Gauss-Seidel sweeps in ascending vertex order with
successive over-relaxation. The relaxation factor defaults to Young's optimum
computed from the Jacobi spectral radius; ``omega=1`` gives plain
Gauss-Seidel. :func:`solve_dense` is the direct-elimination reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit

from .conductance import Network
from .errors import ConvergenceError, ModelingError
from .graph import components

__all__ = [
    "BoundaryCondition",
    "PotentialField",
    "solve",
    "solve_dense",
    "current_balance",
    "harmonic_defects",
    "hull_violations",
    "defined_mask",
    "young_omega",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary vertices (0-based) and their pinned potentials in [0, 1]."""

    vertices: tuple[int, ...]
    potentials: tuple[float, ...]

    def __init__(self, vertices: Sequence[int], potentials: Sequence[float]):
        vs = tuple(int(v) for v in vertices)
        ps = tuple(float(p) for p in potentials)
        if len(vs) != len(ps):
            raise ValueError("boundary vertices and potentials differ in length")
        if not vs:
            raise ValueError("boundary set must contain at least one vertex")
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate boundary vertex in {vs}")
        if any(v < 0 for v in vs):
            raise ValueError("boundary vertices must be non-negative")
        if any(not 0.0 <= p <= 1.0 for p in ps):
            raise ValueError(f"boundary potentials must lie in [0, 1], got {ps}")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "potentials", ps)

    @classmethod
    def from_mapping(cls, pins: dict[int, float]) -> BoundaryCondition:
        return cls(list(pins), list(pins.values()))

    @classmethod
    def parse(cls, text: str) -> BoundaryCondition:
        """Parse ``"1:1.0,251:0.3"`` with 1-based vertex labels."""
        vs, ps = [], []
        for item in text.replace(" ", "").split(","):
            if not item:
                continue
            label, _, value = item.partition(":")
            if not value:
                raise ValueError(f"boundary entry {item!r} is not label:potential")
            if int(label) < 1:
                raise ValueError(f"vertex labels are 1-based, got {label}")
            vs.append(int(label) - 1)
            ps.append(float(value))
        return cls(vs, ps)

    def format(self) -> str:
        return ",".join(f"{v + 1}:{p!r}" for v, p in zip(self.vertices, self.potentials))

    @property
    def K(self) -> int:
        return len(self.vertices)

    @property
    def hull(self) -> tuple[float, float]:
        return min(self.potentials), max(self.potentials)

    def validate(self, net: Network) -> None:
        for v in self.vertices:
            if v >= net.n:
                raise IndexError(f"boundary vertex {v} out of range for n={net.n}")
            if net.graph.degree(v) == 0:
                raise ModelingError(f"boundary vertex {v} is isolated")


@dataclass
class PotentialField:
    """Solved potentials; ``values`` is NaN wherever ``defined`` is False."""

    values: np.ndarray
    defined: np.ndarray
    residual_norm: float
    iterations: int
    omega: float = 1.0
    method: str = "sor"
    balance: float = field(default=0.0, repr=False)

    @property
    def n(self) -> int:
        return len(self.values)

    def interior_mask(self, bc: BoundaryCondition) -> np.ndarray:
        mask = self.defined.copy()
        mask[list(bc.vertices)] = False
        return mask


def defined_mask(net: Network, bc: BoundaryCondition) -> np.ndarray:
    """Vertices whose component contains at least one boundary vertex."""
    lab = components(net.graph).component_id
    return np.isin(lab, lab[list(bc.vertices)])


def _initial_values(net: Network, bc: BoundaryCondition, defined: np.ndarray) -> np.ndarray:
    s = net.strengths[list(bc.vertices)]
    start = float(np.dot(bc.potentials, s) / s.sum())
    V = np.full(net.n, np.nan)
    V[defined] = start
    V[list(bc.vertices)] = bc.potentials
    return V


def young_omega(net: Network, interior: np.ndarray) -> float:
    """Young's over-relaxation factor ``2 / (1 + sqrt(1 - rho**2))``.

    ``rho`` is the spectral radius of the interior Jacobi operator
    ``D^-1 W``, found from its symmetric similarity transform
    ``D^-1/2 W D^-1/2``. Falls back to 1 (plain Gauss-Seidel) when the
    eigenvalue iteration does not converge.
    """
    idx = np.flatnonzero(interior)
    if len(idx) < 2:
        return 1.0
    g = net.graph
    W = sp.csr_matrix((net.weights, g.indices, g.indptr), shape=(net.n, net.n))[idx][:, idx]
    d = 1.0 / np.sqrt(net.strengths[idx])
    M = sp.diags(d) @ W @ sp.diags(d)
    try:
        if len(idx) <= 64:
            rho = float(np.max(np.abs(np.linalg.eigvalsh(M.toarray()))))
        else:
            # fixed start vector: ARPACK otherwise seeds itself randomly and
            # omega, hence the last digits of the field, would vary per run
            v0 = np.sqrt(net.strengths[idx])
            lam = spla.eigsh(M.tocsr(), k=1, which="LM", tol=1e-6, maxiter=20 * len(idx), v0=v0, return_eigenvectors=False)
            rho = float(abs(lam[0]))
    except (spla.ArpackNoConvergence, np.linalg.LinAlgError):
        return 1.0
    rho = min(rho, 1.0 - 1e-12)
    return 2.0 / (1.0 + math.sqrt(1.0 - rho * rho))


@njit(cache=True, nogil=True)
def _sor(indptr, indices, weights, strengths, active, V, tol, max_iter, omega, window):
    # Error estimate: dmax * rho / (1 - rho), with rho taken from the decay of
    # dmax over `window` sweeps and floored at omega - 1, the asymptotic SOR rate.
    hist = np.zeros(window + 1)
    floor = 64.0 * 2.220446049250313e-16
    dmax = np.inf
    for it in range(1, max_iter + 1):
        dmax = 0.0
        for a in range(active.shape[0]):
            i = active[a]
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s += weights[k] * V[indices[k]]
            delta = s / strengths[i] - V[i]
            if abs(delta) > dmax:
                dmax = abs(delta)
            V[i] += omega * delta
        old = hist[it % (window + 1)]
        hist[it % (window + 1)] = dmax
        if dmax == 0.0:
            return it, dmax
        if dmax <= tol and it > window:
            rho = omega - 1.0
            if old > 0.0:
                r = (dmax / old) ** (1.0 / (window + 1))
                if r > rho:
                    rho = r
            if dmax <= floor or (rho < 1.0 and dmax * rho / (1.0 - rho) <= tol):
                return it, dmax
    return max_iter, dmax


def harmonic_defects(net: Network, values: np.ndarray, interior: np.ndarray) -> np.ndarray:
    """``|V_i - sum_j c_ij V_j / c_i|`` for every vertex in ``interior``.

    Uses a sparse matrix product, independent of the sweep kernel.
    """
    g = net.graph
    W = sp.csr_matrix((net.weights, g.indices, g.indptr), shape=(net.n, net.n))
    idx = np.flatnonzero(interior)
    avg = (W[idx] @ np.nan_to_num(values)) / net.strengths[idx]
    return np.abs(values[idx] - avg)


def current_balance(net: Network, field: PotentialField, bc: BoundaryCondition) -> float:
    """Net current leaving the boundary set; zero for an exact solution."""
    g = net.graph
    V = field.values
    total = 0.0
    for x in bc.vertices:
        lo, hi = g.indptr[x], g.indptr[x + 1]
        total += float(np.sum((V[x] - V[g.indices[lo:hi]]) * net.weights[lo:hi]))
    return total


def hull_violations(field: PotentialField, bc: BoundaryCondition, slack: float = 0.0) -> np.ndarray:
    """Defined vertices whose potential leaves ``[min p, max p]`` by more than ``slack``."""
    lo, hi = bc.hull
    v = field.values
    bad = field.defined & ((v < lo - slack) | (v > hi + slack))
    return np.flatnonzero(bad)


def solve(
    net: Network,
    bc: BoundaryCondition,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    omega: float | None = None,
) -> PotentialField:
    """Iteratively solve the Dirichlet problem.

    Args:
        net: the electrical network.
        bc: boundary vertices and potentials.
        tol: bound on the maximum interior harmonic defect of the result.
        max_iter: sweep budget.
        omega: relaxation factor in (0, 2); None picks Young's optimum.

    Returns:
        A :class:`PotentialField`. Vertices in components without a boundary
        vertex are flagged undefined.

    Raises:
        ConvergenceError: the sweep budget ran out before the residual and
            current-balance checks passed.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    bc.validate(net)
    if omega is not None and not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    defined = defined_mask(net, bc)
    interior = defined.copy()
    interior[list(bc.vertices)] = False
    V = _initial_values(net, bc, defined)
    if omega is None:
        omega = young_omega(net, interior)
    active = np.flatnonzero(interior).astype(np.int64)
    g = net.graph
    bstrength = float(net.strengths[list(bc.vertices)].sum())

    used = 0
    inner_tol = tol
    best = math.inf
    while True:
        if len(active):
            its, _ = _sor(g.indptr, g.indices, net.weights, net.strengths, active, V, inner_tol, max_iter - used, omega, 16)
            used += its
        res = float(harmonic_defects(net, V, interior).max()) if len(active) else 0.0
        best = min(best, res)
        out = PotentialField(V, defined, res, used, omega)
        bal = current_balance(net, out, bc)
        out.balance = bal
        if res <= tol and abs(bal) <= tol * bstrength:
            return out
        if used >= max_iter or inner_tol < 1e-300:
            raise ConvergenceError(
                f"no convergence after {used} sweeps (residual {res:.3g}, balance {bal:.3g})", best, used
            )
        inner_tol /= 10.0


def solve_dense(net: Network, bc: BoundaryCondition) -> PotentialField:
    """Exact solution of ``(I - Q) V_int = R p`` by LU with partial pivoting.

    ``Q`` is the interior-to-interior block of the transition matrix and ``R``
    the interior-to-boundary block.
    """
    bc.validate(net)
    defined = defined_mask(net, bc)
    interior = defined.copy()
    interior[list(bc.vertices)] = False
    idx = np.flatnonzero(interior)
    if len(idx) > DENSE_LIMIT:
        raise ValueError(f"dense solve limited to {DENSE_LIMIT} interior vertices, got {len(idx)}")
    V = np.full(net.n, np.nan)
    V[list(bc.vertices)] = bc.potentials
    if len(idx):
        g = net.graph
        P = sp.csr_matrix((net.weights, g.indices, g.indptr), shape=(net.n, net.n))
        P = sp.diags(1.0 / np.where(net.strengths > 0, net.strengths, 1.0)) @ P
        bidx = np.array(bc.vertices)
        A = np.eye(len(idx)) - P[idx][:, idx].toarray()
        b = P[idx][:, bidx].toarray() @ np.array(bc.potentials)
        try:
            V[idx] = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("interior system is singular") from exc
    res = float(harmonic_defects(net, V, interior).max()) if len(idx) else 0.0
    out = PotentialField(V, defined, res, 0, 1.0, "dense")
    out.balance = current_balance(net, out, bc)
    return out
