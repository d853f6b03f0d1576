"""Weight derivation and the two classical optimal completions.

Both optimisation problems are solved in log space: the restricted
logarithmic least squares problem reduces to a graph-Laplacian linear
system, and the dominant-eigenvalue minimisation runs cyclic coordinate
descent with a golden-section line search, refined by a stationarity
fixed point once the sweeps stall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .core import (
    ComparisonGraph,
    Gauge,
    IncompletePcm,
    associated_graph,
    is_connected,
    spectral_radius,
)
from .errors import DisconnectedGraph, NoConvergence, TooManyTrees

LN9 = math.log(9.0)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class WeightVector:
    """Positive priorities under a fixed normalisation gauge."""

    weights: tuple
    gauge: Gauge

    @property
    def log_view(self) -> tuple:
        return tuple(math.log(w) for w in self.weights)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def regauge(self, gauge: Gauge) -> "WeightVector":
        return WeightVector(tuple(gauge.apply(self.as_array())), gauge)

    def ranking(self) -> tuple:
        """Indices sorted by descending weight (gauge-invariant)."""
        w = self.as_array()
        return tuple(int(i) for i in np.argsort(-w, kind="stable"))

    def to_dict(self) -> dict:
        return {
            "gauge": self.gauge.value,
            "weights": [float(f"{w:.12g}") for w in self.weights],
        }


def make_weights(raw: Iterable[float], gauge: Gauge = Gauge.SUM_ONE) -> WeightVector:
    return WeightVector(tuple(gauge.apply(np.asarray(list(raw), dtype=float))), gauge)


class CompletionMethod(str, Enum):
    LLSM = "llsm"
    EIGENVALUE_OPTIMAL = "em"
    LEXICOGRAPHIC = "lex"


@dataclass(frozen=True)
class CompletionResult:
    """A full matrix plus provenance of the filled entries."""

    matrix: IncompletePcm
    filled: dict                  # (i, j) -> value for originally missing pairs
    method: CompletionMethod
    diagnostics: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        from .core import pcm_document
        return {
            "matrix": pcm_document(self.matrix),
            "filled": [
                {"i": i + 1, "j": j + 1, "value": float(f"{v:.12g}")}
                for (i, j), v in sorted(self.filled.items())
            ],
            "method": self.method.value,
            "diagnostics": self.diagnostics,
        }


def _require_connected(pcm: IncompletePcm) -> ComparisonGraph:
    g = associated_graph(pcm)
    if not is_connected(g):
        raise DisconnectedGraph(
            f"comparison graph with {len(g.edges)} edges on {g.n} vertices is disconnected"
        )
    return g


# -- logarithmic least squares ----------------------------------------------

def llsm_log_y(pcm: IncompletePcm) -> np.ndarray:
    """Solve the Laplacian normal equations; gauge pinned at y[n-1] = 0."""
    _require_connected(pcm)
    n = pcm.n
    L = np.zeros((n, n))
    r = np.zeros(n)
    for (i, j), v in pcm.entries.items():
        L[i, i] += 1.0
        L[j, j] += 1.0
        L[i, j] -= 1.0
        L[j, i] -= 1.0
        lv = math.log(v)
        r[i] += lv
        r[j] -= lv
    y = np.zeros(n)
    y[: n - 1] = np.linalg.solve(L[: n - 1, : n - 1], r[: n - 1])
    return y


def llsm_objective(pcm: IncompletePcm, y: np.ndarray) -> float:
    """Sum of squared log errors over all ordered known pairs."""
    acc = 0.0
    for (i, j), v in pcm.entries.items():
        acc += 2.0 * (math.log(v) - (y[i] - y[j])) ** 2
    return acc


def llsm_weights(pcm: IncompletePcm, gauge: Gauge = Gauge.SUM_ONE) -> WeightVector:
    y = llsm_log_y(pcm)
    return make_weights(np.exp(y - y.max()), gauge)


def llsm_completion(pcm: IncompletePcm) -> CompletionResult:
    if pcm.is_complete():
        return CompletionResult(pcm, {}, CompletionMethod.LLSM,
                                {"objective": llsm_objective(pcm, llsm_log_y(pcm))})
    y = llsm_log_y(pcm)
    fills = {(i, j): math.exp(y[i] - y[j]) for (i, j) in pcm.missing_pairs()}
    return CompletionResult(
        pcm.with_fills(fills), fills, CompletionMethod.LLSM,
        {"objective": llsm_objective(pcm, y)},
    )


# -- eigenvalue-optimal completion -------------------------------------------

def _golden_section(f, a: float, b: float, tol: float) -> float:
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def _expand_bracket(f, a: float, b: float, max_steps: int = 60) -> tuple[float, float]:
    fa, fb = f(a), f(b)
    for _ in range(max_steps):
        c = 0.5 * (a + b)
        fc = f(c)
        if fc <= fa and fc <= fb:
            return a, b
        if fa < fc:
            a -= 3.0 * (c - a)
            fa = f(a)
        else:
            b += 3.0 * (b - c)
            fb = f(b)
    raise NoConvergence("no unimodality bracket found for the coordinate search")


def _perron_pair(A: np.ndarray, tol: float = 1e-14,
                 max_iter: int = 50000) -> tuple[np.ndarray, np.ndarray]:
    def one_side(M):
        v = np.ones(M.shape[0])
        for _ in range(max_iter):
            w = M @ v
            lam = w.max()
            if np.max(np.abs(w - lam * v)) <= tol * lam:
                return w / lam
            v = w / lam
        return v
    return one_side(A.T), one_side(A)


def em_completion(pcm: IncompletePcm, bounds: Optional[tuple[float, float]] = None,
                  sweep_tol: float = 1e-12, max_sweeps: int = 200,
                  golden_tol: float = 1e-8, polish: bool = True) -> CompletionResult:
    """Fill missing entries to minimise the dominant eigenvalue.

    Cyclic coordinate descent in row-major order over the missing pairs,
    starting from the (clamped) logarithmic least squares completion. When
    `bounds` is given each coordinate is confined to [lo, hi]; otherwise the
    line search runs on an expanding bracket. A damped fixed point on the
    eigen-gradient stationarity condition sharpens the optimum afterwards.
    """
    _require_connected(pcm)
    missing = pcm.missing_pairs()
    if not missing:
        lam = spectral_radius(pcm.to_array())
        return CompletionResult(pcm, {}, CompletionMethod.EIGENVALUE_OPTIMAL,
                                {"lambda_max": lam, "sweeps": 0})
    y = llsm_log_y(pcm)
    fills = {(i, j): math.exp(y[i] - y[j]) for (i, j) in missing}
    if bounds is not None:
        lo, hi = bounds
        t_lo, t_hi = math.log(lo), math.log(hi)
        fills = {k: min(max(v, lo), hi) for k, v in fills.items()}
    A = pcm.to_array(fills)
    lam = spectral_radius(A)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for (i, j) in missing:
            def f(t, i=i, j=j):
                A[i, j] = math.exp(t)
                A[j, i] = math.exp(-t)
                return spectral_radius(A)
            if bounds is not None:
                a, b = t_lo, t_hi
            else:
                t0 = math.log(A[i, j])
                a, b = _expand_bracket(f, t0 - 1.2, t0 + 1.2)
            t = _golden_section(f, a, b, golden_tol)
            A[i, j] = math.exp(t)
            A[j, i] = math.exp(-t)
        new_lam = spectral_radius(A)
        if lam - new_lam < sweep_tol:
            lam = min(lam, new_lam)
            break
        lam = new_lam
    polish_sweeps = 0
    if polish:
        # the eigenvalue is flat to machine precision near the optimum, so the
        # fixed point is driven by the stationarity shift; the best-so-far
        # matrix is kept only to revert a genuinely diverging step
        revert = A.copy()
        floor_lam = spectral_radius(A)
        for polish_sweeps in range(1, 201):
            u, v = _perron_pair(A)
            shift = 0.0
            for (i, j) in missing:
                t_new = 0.5 * math.log((u[j] * v[i]) / (u[i] * v[j]))
                if bounds is not None:
                    t_new = min(max(t_new, t_lo), t_hi)
                shift = max(shift, abs(t_new - math.log(A[i, j])))
                A[i, j] = math.exp(t_new)
                A[j, i] = math.exp(-t_new)
            cur = spectral_radius(A)
            if not math.isfinite(cur) or cur > floor_lam + 1e-9 * max(1.0, floor_lam):
                A = revert
                break
            if cur <= floor_lam:
                revert = A.copy()
                floor_lam = cur
            if shift < 5e-15:
                break
        lam = min(floor_lam, spectral_radius(A))
    final = {(i, j): float(A[i, j]) for (i, j) in missing}
    return CompletionResult(
        pcm.with_fills(final), final, CompletionMethod.EIGENVALUE_OPTIMAL,
        {"lambda_max": lam, "sweeps": sweeps, "polish_sweeps": polish_sweeps},
    )


def em_weights(pcm: IncompletePcm, gauge: Gauge = Gauge.SUM_ONE,
               bounds: Optional[tuple[float, float]] = None) -> WeightVector:
    from .core import dominant_eigenvalue
    completed = em_completion(pcm, bounds=bounds)
    _, v = dominant_eigenvalue(completed.matrix.to_array())
    return make_weights(v, gauge)


# -- Harker's variant --------------------------------------------------------

@dataclass(frozen=True)
class HarkerMatrix:
    h: np.ndarray


def harker_matrix(pcm: IncompletePcm) -> HarkerMatrix:
    n = pcm.n
    H = np.zeros((n, n))
    missing_in_row = [0] * n
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            v = pcm.value(i, j)
            if v is None:
                missing_in_row[i] += 1
            else:
                H[i, j] = v
    for i in range(n):
        H[i, i] = 1.0 + missing_in_row[i]
    return HarkerMatrix(H)


def harker_weights(pcm: IncompletePcm, gauge: Gauge = Gauge.SUM_ONE) -> WeightVector:
    from .core import dominant_eigenvalue
    _require_connected(pcm)
    _, v = dominant_eigenvalue(harker_matrix(pcm).h)
    return make_weights(v, gauge)


# -- spanning-tree geometric mean --------------------------------------------

def spanning_tree_count(g: ComparisonGraph) -> int:
    """Kirchhoff matrix-tree count via the reduced Laplacian determinant."""
    n = g.n
    if n == 1:
        return 1
    L = np.zeros((n, n))
    for (i, j) in g.edges:
        L[i, i] += 1.0
        L[j, j] += 1.0
        L[i, j] -= 1.0
        L[j, i] -= 1.0
    det = np.linalg.det(L[1:, 1:])
    return int(round(det))


def spanning_trees(g: ComparisonGraph, cap: int):
    """Yield spanning trees as edge tuples.

    Include/exclude recursion over the edge list: an edge is contracted into
    the partial tree when it joins two components, and deleted only when the
    remaining edges can still span the graph.
    """
    n = g.n
    edges = sorted(g.edges)
    yielded = 0

    def spans(chosen, idx):
        adj = [set() for _ in range(n)]
        for (i, j) in chosen:
            adj[i].add(j)
            adj[j].add(i)
        for (i, j) in edges[idx:]:
            adj[i].add(j)
            adj[j].add(i)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == n

    def rec(idx, chosen, comp):
        nonlocal yielded
        if len(chosen) == n - 1:
            yielded += 1
            if yielded > cap:
                raise TooManyTrees(yielded, cap)
            yield tuple(chosen)
            return
        if idx == len(edges):
            return
        i, j = edges[idx]
        ri, rj = comp[i], comp[j]
        if ri != rj:
            merged = [ri if c == rj else c for c in comp]
            chosen.append((i, j))
            yield from rec(idx + 1, chosen, merged)
            chosen.pop()
        if spans(chosen, idx + 1):
            yield from rec(idx + 1, chosen, comp)

    yield from rec(0, [], list(range(n)))


def tree_log_weights(pcm: IncompletePcm, tree: tuple) -> np.ndarray:
    """Log-weights induced by one spanning tree, y[0] = 0."""
    n = pcm.n
    adj: dict = {i: [] for i in range(n)}
    for (i, j) in tree:
        lv = math.log(pcm.entries[(i, j)])
        adj[i].append((j, -lv))     # y_j = y_i - log a_ij
        adj[j].append((i, lv))
    y = np.zeros(n)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for (u, dlog) in adj[v]:
            if u not in seen:
                seen.add(u)
                y[u] = y[v] + dlog
                stack.append(u)
    return y


def spanning_tree_gm_weights(pcm: IncompletePcm, tree_cap: int = 1_000_000,
                             gauge: Gauge = Gauge.SUM_ONE) -> WeightVector:
    g = _require_connected(pcm)
    count = spanning_tree_count(g)
    if count > tree_cap:
        raise TooManyTrees(count, tree_cap)
    total = np.zeros(pcm.n)
    trees = 0
    for tree in spanning_trees(g, tree_cap):
        y = tree_log_weights(pcm, tree)
        total += y - y.mean()
        trees += 1
    mean_y = total / trees
    return make_weights(np.exp(mean_y - mean_y.max()), gauge)
