"""Seeded graph constructions: G(n, p), circle, and circle plus G(n, p)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .rng import derive_seed, generator

__all__ = ["GenSpec", "KINDS", "generate", "gnp_pairs", "p_from_alpha", "edge_probability_audit"]

KINDS = ("gnp", "circle", "small_world")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if int(self.n) < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if not 0.0 <= float(self.p) <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def p_from_alpha(alpha: float, n: int) -> float:
    """Edge probability ``alpha * ln(n) / n``."""
    return alpha * math.log(n) / n


def _pair_from_index(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Row i holds pairs (i, i+1..n-1) and starts at offset i*(2n-i-1)/2.
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2).astype(np.int64)
    off = i * (2 * n - i - 1) // 2
    while np.any(over := off > k):
        i[over] -= 1
        off = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    while np.any(under := nxt <= k):
        i[under] += 1
        off = i * (2 * n - i - 1) // 2
        nxt = (i + 1) * (2 * n - i - 2) // 2
    j = k - off + i + 1
    return i, j


def gnp_pairs(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sample the G(n, p) edge set as an ``(m, 2)`` array with ``i < j``.

    Walks the n(n-1)/2 pair indices with geometric skips, so the cost scales
    with the number of edges rather than the number of pairs.
    """
    total = n * (n - 1) // 2
    if p <= 0.0:
        return np.zeros((0, 2), dtype=np.int64)
    if p >= 1.0:
        i, j = np.triu_indices(n, k=1)
        return np.stack([i, j], axis=1).astype(np.int64)
    chosen = []
    pos = -1
    batch = int(total * p + 10 * math.sqrt(total * p) + 16)
    while True:
        steps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(steps)
        chosen.append(idx[idx < total])
        if idx[-1] >= total:
            break
        pos = int(idx[-1])
    k = np.concatenate(chosen)
    i, j = _pair_from_index(k, n)
    return np.stack([i, j], axis=1)


def _circle_pairs(n: int) -> np.ndarray:
    i = np.arange(n)
    return np.stack([i, (i + 1) % n], axis=1)


def generate(spec: GenSpec) -> Graph:
    rng = generator(spec.seed)
    if spec.kind == "circle":
        return Graph(spec.n, _circle_pairs(spec.n))
    if spec.kind == "gnp":
        return Graph(spec.n, gnp_pairs(spec.n, spec.p, rng))
    ring = _circle_pairs(spec.n)
    ring = np.sort(ring, axis=1)
    both = np.concatenate([ring, gnp_pairs(spec.n, spec.p, rng)])
    return Graph(spec.n, np.unique(both, axis=0))


def edge_probability_audit(
    spec: GenSpec, trials: int, pairs: np.ndarray | None = None, sample_size: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical inclusion frequency of a fixed set of vertex pairs.

    Each trial regenerates the graph with a seed derived from ``spec.seed`` and
    the trial index. Unless ``pairs`` is given, ``sample_size`` distinct pairs
    are drawn once from a stream derived from ``spec.seed``.

    Returns:
        ``(pairs, frequencies)``.
    """
    if spec.kind != "gnp":
        raise ValueError("edge_probability_audit only applies to gnp specs")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = spec.n
    if pairs is None:
        total = n * (n - 1) // 2
        pick = generator(derive_seed(spec.seed, 0xA0D17)).choice(total, size=min(sample_size, total), replace=False)
        i, j = _pair_from_index(np.sort(pick), n)
        pairs = np.stack([i, j], axis=1)
    pairs = np.asarray(pairs, dtype=np.int64)
    keys = pairs[:, 0] * n + pairs[:, 1]
    hits = np.zeros(len(pairs), dtype=np.int64)
    for t in range(trials):
        rng = generator(derive_seed(spec.seed, t))
        e = gnp_pairs(n, spec.p, rng)
        hits += np.isin(keys, e[:, 0] * n + e[:, 1])
    return pairs, hits / trials
