"""Structured matrix builders and ordinal-violation analysis.

Covers matrices generated by connected directed acyclic graphs, best-worst
style questionnaires, and head-to-head win counts, plus the two sufficient
conditions under which best-worst matrices are certified free of ordinal
violations under logarithmic least squares weighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import Gauge, IncompletePcm, Scale
from .errors import (
    CycleFound,
    DimensionMismatch,
    NegativeCount,
    NonzeroDiagonal,
    NotBwmShape,
    NotWeaklyConnected,
    ScaleUnsupported,
    ValueBelowOne,
    WrongArity,
)
from .weighting import WeightVector, make_weights


# -- CDAG-based matrices ------------------------------------------------------

@dataclass(frozen=True)
class CdagSpec:
    """Connected directed acyclic graph plus a dominance parameter."""

    n: int
    arcs: tuple
    alpha: float

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueBelowOne("alpha", self.alpha)
        seen = set()
        for (i, j) in self.arcs:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise CycleFound(f"arc ({i + 1},{j + 1}) is not a valid ordered pair")
            if (i, j) in seen or (j, i) in seen:
                raise CycleFound(f"arcs between {i + 1} and {j + 1} repeat or oppose")
            seen.add((i, j))
        if not self._acyclic():
            raise CycleFound("arc set contains a directed cycle")
        if not self._weakly_connected():
            raise NotWeaklyConnected("underlying undirected graph is not connected")

    def _acyclic(self) -> bool:
        indeg = [0] * self.n
        out = [[] for _ in range(self.n)]
        for (i, j) in self.arcs:
            out[i].append(j)
            indeg[j] += 1
        queue = [v for v in range(self.n) if indeg[v] == 0]
        seen = 0
        while queue:
            v = queue.pop()
            seen += 1
            for u in out[v]:
                indeg[u] -= 1
                if indeg[u] == 0:
                    queue.append(u)
        return seen == self.n

    def _weakly_connected(self) -> bool:
        adj = [set() for _ in range(self.n)]
        for (i, j) in self.arcs:
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
        return len(seen) == self.n


def cdag_matrix(spec: CdagSpec) -> IncompletePcm:
    alpha = Fraction(int(spec.alpha)) if float(spec.alpha).is_integer() else spec.alpha
    entries = {}
    for (i, j) in spec.arcs:
        entries[(i, j)] = alpha             # normalised by create() for j < i
    return IncompletePcm.create(spec.n, entries, Scale.FREE)


# -- best-worst method matrices -----------------------------------------------

def bwm_matrix(n: int, best_row, others_to_worst, scale: Scale | str = Scale.FREE) -> IncompletePcm:
    """Matrix known exactly on the best row and the worst column.

    `best_row` holds a_1j for j = 2..n (the shared a_1n last); `others_to_worst`
    holds a_jn for j = 2..n-1. All values must be at least 1.
    """
    best_row = list(best_row)
    others_to_worst = list(others_to_worst)
    if len(best_row) != n - 1:
        raise WrongArity(f"best_row needs {n - 1} values, got {len(best_row)}")
    if len(others_to_worst) != n - 2:
        raise WrongArity(f"others_to_worst needs {n - 2} values, got {len(others_to_worst)}")
    entries = {}
    for j, v in enumerate(best_row, start=1):
        if float(v) < 1.0:
            raise ValueBelowOne(f"a[1][{j + 1}]", v)
        entries[(0, j)] = v
    for j, v in enumerate(others_to_worst, start=1):
        if float(v) < 1.0:
            raise ValueBelowOne(f"a[{j + 1}][{n}]", v)
        entries[(j, n - 1)] = v
    return IncompletePcm.create(n, entries, scale)


def is_bwm_shape(pcm: IncompletePcm) -> bool:
    expected = {(0, j) for j in range(1, pcm.n)} | {(j, pcm.n - 1) for j in range(1, pcm.n - 1)}
    return set(pcm.entries) == expected


@dataclass(frozen=True)
class BwmBoundsReport:
    """Evaluation of the two sufficient no-violation conditions."""

    p: float                     # uniform lower bound over best-row / worst-column entries
    max_pref: float
    a_1n: float
    theorem1_holds: bool
    theorem2_holds: bool
    violated_conditions: tuple

    def certified(self) -> bool:
        return self.theorem1_holds or self.theorem2_holds


def bwm_guarantee(pcm: IncompletePcm) -> BwmBoundsReport:
    if not is_bwm_shape(pcm):
        raise NotBwmShape("matrix is not known exactly on the best row and worst column")
    n = pcm.n
    best = {j: pcm.entries[(0, j)] for j in range(1, n)}
    worst = {j: pcm.entries[(j, n - 1)] for j in range(1, n - 1)}
    pool = [best[j] for j in range(1, n - 1)] + list(worst.values())
    p = min(pool) if pool else best[n - 1]
    max_pref = max(pcm.entries.values())
    a_1n = best[n - 1]
    failures = []
    if max_pref > p ** 3:
        failures.append(f"max preference {max_pref:g} exceeds p^3 = {p ** 3:g}")
    theorem1 = not failures
    t2_failures = []
    if any(a_1n < best[j] for j in range(1, n - 1)) or any(a_1n < w for w in worst.values()):
        t2_failures.append("best-to-worst entry is not the strongest preference")
    exponent = math.inf if n <= 3 else 4.0 / (n - 3) + 3.0
    bound = math.inf if math.isinf(exponent) else p ** exponent
    if a_1n > bound:
        t2_failures.append(f"best-to-worst entry {a_1n:g} exceeds p^(4/(n-3)+3) = {bound:g}")
    theorem2 = not t2_failures
    return BwmBoundsReport(
        p=p, max_pref=max_pref, a_1n=a_1n,
        theorem1_holds=theorem1, theorem2_holds=theorem2,
        violated_conditions=tuple(failures + t2_failures),
    )


def bwm_llsm_log_weights(best_vals: np.ndarray, worst_vals: np.ndarray,
                         a_1n: np.ndarray, n: int):
    """Closed-form restricted least squares solution for the best-worst graph.

    Arrays may carry a leading batch dimension. Returns (y_1, y_mid) with the
    worst alternative pinned at 0; y_mid has one column per middle alternative.
    """
    s_b = np.log(best_vals).sum(axis=-1)
    s_c = np.log(worst_vals).sum(axis=-1)
    y1 = (s_b + s_c + 2.0 * np.log(a_1n)) / n
    y_mid = (y1[..., None] - np.log(best_vals) + np.log(worst_vals)) / 2.0
    return y1, y_mid


# -- ordinal violations -------------------------------------------------------

@dataclass(frozen=True)
class OrdinalViolationReport:
    violations: tuple            # (i, j, a_ij, w_i, w_j) with a_ij > 1 and w_i < w_j
    method: str

    def is_empty(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "violations": [
                {"i": i + 1, "j": j + 1, "value": a, "w_i": wi, "w_j": wj}
                for (i, j, a, wi, wj) in self.violations
            ],
        }


def ordinal_violations(pcm: IncompletePcm, w: WeightVector,
                       method: str = "") -> OrdinalViolationReport:
    weights = w.as_array()
    if weights.size != pcm.n:
        raise DimensionMismatch(f"weight vector has {weights.size} entries for n={pcm.n}")
    found = []
    for (i, j), v in sorted(pcm.entries.items()):
        if v > 1.0 and weights[i] < weights[j]:
            found.append((i, j, v, float(weights[i]), float(weights[j])))
        elif v < 1.0 and weights[j] < weights[i]:
            found.append((j, i, 1.0 / v, float(weights[j]), float(weights[i])))
    return OrdinalViolationReport(tuple(found), method or w.gauge.value)


# -- exhaustive / sampled best-worst enumeration --------------------------------

class EnumerationMode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


def bwm_enumerate_violations(n: int = 6, scale: Scale | str = Scale.SAATY,
                             mode: EnumerationMode = EnumerationMode.EXHAUSTIVE,
                             sample_count: int = 1_000_000, seed: int = 0):
    """Count ordinal violations over best-worst matrices with entries in 2..9.

    The first alternative is best and the last worst, leaving 2n-3 free
    entries. Exhaustive mode sweeps the full 8^(2n-3) grid with the
    closed-form least squares solution in exact integer arithmetic;
    sampled mode estimates the same proportions.
    Returns (total, theorem1_count, violation_count).
    """
    if Scale(scale) is not Scale.SAATY:
        raise ScaleUnsupported("enumeration is defined on the integer 2..9 scale")
    if n != 6:
        raise ScaleUnsupported(f"enumeration is calibrated for n=6, got n={n}")
    if mode is EnumerationMode.EXHAUSTIVE:
        return _bwm_enumerate_exhaustive()
    return _bwm_enumerate_sampled(sample_count, seed)


def _violation_mask_int(b: np.ndarray, c: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Ordinal violation test for one middle alternative, exact in int64.

    A middle weight overtakes the best (or drops under the worst) exactly
    when max(b, c)^n > min(b, c)^n * Q with Q the product of all entries
    squared-in-d; n = 6 here.
    """
    hi = np.maximum(b, c).astype(np.int64) ** 6
    lo = np.minimum(b, c).astype(np.int64) ** 6
    return hi > lo * Q


def _bwm_enumerate_exhaustive():
    vals = np.arange(2, 10, dtype=np.int64)
    # 64 options for one middle alternative's (best-row, worst-column) pair
    bb, cc = np.meshgrid(vals, vals, indexing="ij")
    b_opt = bb.ravel()
    c_opt = cc.ravel()
    q_opt = b_opt * c_opt
    hi6 = np.maximum(b_opt, c_opt) ** 6
    lo6 = np.minimum(b_opt, c_opt) ** 6

    no_violation = 0
    q45 = q_opt[:, None] * q_opt[None, :]
    for d in vals:
        for t2 in range(64):
            q2 = int(d) * int(d) * int(q_opt[t2])
            for t3 in range(64):
                Q = (q2 * int(q_opt[t3])) * q45
                ok = hi6[t2] <= lo6[t2] * Q
                ok &= hi6[t3] <= lo6[t3] * Q
                ok &= hi6[:, None] <= lo6[:, None] * Q
                ok &= hi6[None, :] <= lo6[None, :] * Q
                no_violation += int(ok.sum())
    total = 8 * 64 ** 4
    both_le8 = int(((b_opt <= 8) & (c_opt <= 8)).sum())       # 49 of 64
    theorem1 = both_le8 ** 4 * int((vals <= 8).sum())
    return total, theorem1, total - no_violation


def _bwm_enumerate_sampled(sample_count: int, seed: int):
    rng = np.random.Generator(np.random.Philox(
        key=np.array([seed % 2 ** 64, 0], dtype=np.uint64)))
    total = int(sample_count)
    theorem1 = 0
    violations = 0
    chunk = 1_000_000
    done = 0
    while done < total:
        size = min(chunk, total - done)
        draws = rng.integers(2, 10, size=(size, 9)).astype(np.int64)
        b = draws[:, 0:4]
        c = draws[:, 4:8]
        d = draws[:, 8]
        theorem1 += int((draws <= 8).all(axis=1).sum())
        Q = d * d * b.prod(axis=1) * c.prod(axis=1)
        viol = np.zeros(size, dtype=bool)
        for k in range(4):
            viol |= _violation_mask_int(b[:, k], c[:, k], Q)
        violations += int(viol.sum())
        done += size
    return total, theorem1, violations


# -- head-to-head ingestion -----------------------------------------------------

class Adjustment(str, Enum):
    CEILING = "1"        # zero wins mapped through ceil(opponent wins / divisor)
    ADDITIVE = "2"       # zero wins mapped through opponent wins + addend


def head_to_head_ingest(wins, adjustment: Adjustment = Adjustment.ADDITIVE,
                        exponent_cap: Optional[int] = None,
                        divisor: int = 5, addend: int = 2) -> IncompletePcm:
    """Turn a matrix of win counts into an incomplete comparison matrix.

    a_ij = x_ij / x_ji when both played and won at least once; pairs that
    never met stay missing; one-sided records go through the chosen zero
    adjustment. With `exponent_cap` T the value is raised to the power
    (x_ij + x_ji) / T so rarely-met pairs stay near 1.
    """
    X = np.asarray(wins)
    n = X.shape[0]
    if X.shape != (n, n):
        raise DimensionMismatch(f"wins matrix must be square, got {X.shape}")
    if (X < 0).any():
        i, j = map(int, np.argwhere(X < 0)[0])
        raise NegativeCount(f"wins[{i + 1}][{j + 1}] = {X[i, j]} is negative")
    if np.diag(X).any():
        i = int(np.argwhere(np.diag(X))[0][0])
        raise NonzeroDiagonal(f"wins[{i + 1}][{i + 1}] must be zero")
    adjustment = Adjustment(adjustment)
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            x, y = int(X[i, j]), int(X[j, i])
            if x + y == 0:
                continue
            if x > 0 and y > 0:
                base = Fraction(x, y)
            elif y == 0:
                base = Fraction(math.ceil(x / divisor)) if adjustment is Adjustment.CEILING \
                    else Fraction(x + addend)
            else:
                base = 1 / Fraction(math.ceil(y / divisor)) if adjustment is Adjustment.CEILING \
                    else Fraction(1, y + addend)
            if exponent_cap is not None:
                value = float(base) ** ((x + y) / exponent_cap)
                entries[(i, j)] = value
            else:
                entries[(i, j)] = base
    return IncompletePcm.create(n, entries, Scale.FREE)


def cdag_llsm_ranking(spec: CdagSpec) -> tuple:
    """Ranking of alternatives under restricted least squares weights."""
    from .weighting import llsm_weights
    return llsm_weights(cdag_matrix(spec)).ranking()


def bwm_llsm_weights(pcm: IncompletePcm, gauge: Gauge = Gauge.SUM_ONE) -> WeightVector:
    """Closed-form least squares weights for a best-worst shaped matrix."""
    if not is_bwm_shape(pcm):
        raise NotBwmShape("matrix is not best-worst shaped")
    n = pcm.n
    best = np.array([pcm.entries[(0, j)] for j in range(1, n - 1)])
    worst = np.array([pcm.entries[(j, n - 1)] for j in range(1, n - 1)])
    a_1n = np.array(pcm.entries[(0, n - 1)])
    y1, y_mid = bwm_llsm_log_weights(best, worst, a_1n, n)
    y = np.concatenate([[y1], y_mid, [0.0]])
    return make_weights(np.exp(y - y.max()), gauge)
