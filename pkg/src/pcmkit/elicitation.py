"""Stateful comparison-collection sessions with live inconsistency monitoring,
plus the filling-pattern experiment over the lattice of connected subgraphs.

Sessions are immutable: submitting an answer returns a new session value, so
replaying an export reproduces the consistency-ratio history bit for bit.
"""

from __future__ import annotations

import itertools
import math
import secrets
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .core import (
    Gauge,
    IncompletePcm,
    SAATY_VALUES,
    Scale,
    associated_graph,
    is_connected,
)
from .errors import (
    BadLabels,
    BadMetric,
    BadValue,
    NotInTable,
    PolicyArityMismatch,
    SessionClosed,
    TooLarge,
    UnknownBaseRi,
    WrongPair,
)
from .inconsistency import BUILTIN_RI, RiQueryPolicy, cr_incomplete
from .weighting import llsm_weights

#: Balanced questioning order used in the six-alternative monitoring example
#: (ordered pairs exactly as asked, 1-based).
ROSS_ORDER_N6 = (
    (1, 2), (6, 4), (5, 1), (3, 2), (5, 6),
    (1, 3), (2, 4), (6, 1), (4, 3), (5, 2),
    (1, 4), (3, 5), (2, 6), (4, 5), (3, 6),
)


class PolicyKind(str, Enum):
    FIXED_ORDER = "fixed-order"
    ROSS_FIXTURE = "ross-fixture"
    BALANCED = "balanced"


@dataclass(frozen=True)
class QuestionPolicy:
    kind: PolicyKind
    order: tuple = ()            # ordered pairs, 0-based, for FIXED_ORDER

    @staticmethod
    def fixed(pairs) -> "QuestionPolicy":
        return QuestionPolicy(PolicyKind.FIXED_ORDER, tuple((int(i), int(j)) for i, j in pairs))

    @staticmethod
    def ross_fixture() -> "QuestionPolicy":
        return QuestionPolicy(PolicyKind.ROSS_FIXTURE)

    @staticmethod
    def balanced() -> "QuestionPolicy":
        return QuestionPolicy(PolicyKind.BALANCED)

    def build_order(self, n: int) -> tuple:
        if self.kind is PolicyKind.ROSS_FIXTURE:
            if n != 6:
                raise PolicyArityMismatch("the fixture order is defined for n=6 only")
            return tuple((i - 1, j - 1) for (i, j) in ROSS_ORDER_N6)
        if self.kind is PolicyKind.FIXED_ORDER:
            seen = set()
            for (i, j) in self.order:
                if not (0 <= i < n and 0 <= j < n) or i == j:
                    raise PolicyArityMismatch(f"pair ({i + 1},{j + 1}) invalid for n={n}")
                key = frozenset((i, j))
                if key in seen:
                    raise PolicyArityMismatch(f"pair ({i + 1},{j + 1}) repeats in the order")
                seen.add(key)
            return self.order
        return _balanced_order(n)


def _balanced_order(n: int) -> tuple:
    """Round-robin circle schedule; appearance counts never differ by more
    than one at any prefix."""
    players = list(range(n)) + ([None] if n % 2 else [])
    rounds = len(players) - 1
    half = len(players) // 2
    order = []
    circle = players[1:]
    for _ in range(rounds):
        layout = [players[0]] + circle
        for k in range(half):
            a, b = layout[k], layout[-1 - k]
            if a is None or b is None:
                continue
            order.append((a, b) if a < b else (b, a))
        circle = circle[-1:] + circle[:-1]
    return tuple(order)


class SessionStatus(str, Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    ABANDONED = "abandoned"


@dataclass(frozen=True)
class CrRecord:
    answered_count: int
    connected: bool
    ci: Optional[float] = None
    ri_nm: Optional[float] = None
    cr_generalized: Optional[float] = None
    cr_naive: Optional[float] = None

    def to_dict(self) -> dict:
        def safe(x):
            return None if x is None or not math.isfinite(x) else x

        def show(x):
            if x is None:
                return None
            return "inf" if not math.isfinite(x) else f"{x:.4f}"

        return {
            "answered_count": self.answered_count,
            "connected": self.connected,
            "ci": safe(self.ci),
            "ri_nm": safe(self.ri_nm),
            "cr_generalized": safe(self.cr_generalized),
            "cr_naive": safe(self.cr_naive),
            "display": {
                "cr_generalized": show(self.cr_generalized),
                "cr_naive": show(self.cr_naive),
            },
        }


@dataclass(frozen=True)
class Session:
    id: str
    n: int
    labels: tuple
    order: tuple                     # ordered pairs, 0-based
    answers: tuple = ()              # ((pair, value, timestamp), ...)
    cr_history: tuple = ()
    status: SessionStatus = SessionStatus.ACTIVE
    scale: Scale = Scale.FREE
    bounded: bool = False

    def next_pair(self) -> Optional[tuple]:
        if len(self.answers) >= len(self.order):
            return None
        return self.order[len(self.answers)]

    def matrix(self) -> IncompletePcm:
        entries = {}
        for (pair, value, _ts) in self.answers:
            i, j = pair
            key = (i, j) if i < j else (j, i)
            entries[key] = value if i < j else 1.0 / value
        return IncompletePcm.create(self.n, entries, Scale.FREE)


def create_session(n: int, labels, policy: QuestionPolicy,
                   scale: Scale | str = Scale.FREE, bounded: bool = False,
                   session_id: Optional[str] = None) -> Session:
    if n < 3:
        raise BadLabels(f"n={n}: sessions need at least 3 alternatives")
    labels = tuple(str(x) for x in labels)
    if len(labels) != n or len(set(labels)) != n or any(not x for x in labels):
        raise BadLabels("labels must be n distinct non-empty strings")
    order = policy.build_order(n)
    return Session(
        id=session_id or secrets.token_urlsafe(12),
        n=n, labels=labels, order=order,
        scale=Scale(scale), bounded=bounded,
    )


def submit_answer(session: Session, pair, value: float,
                  timestamp: Optional[float] = None,
                  ri_policy: RiQueryPolicy = RiQueryPolicy()) -> Session:
    if session.status is not SessionStatus.ACTIVE:
        raise SessionClosed(f"session is {session.status.value}")
    expected = session.next_pair()
    got = (int(pair[0]), int(pair[1]))
    if expected is None or got != expected:
        want = None if expected is None else (expected[0] + 1, expected[1] + 1)
        raise WrongPair(f"expected pair {want}, got ({got[0] + 1},{got[1] + 1})")
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise BadValue(f"value {value} must be a positive real")
    if session.scale is Scale.SAATY and not any(abs(value - s) <= 1e-9 for s in SAATY_VALUES):
        raise BadValue(f"value {value} is not on the 1..9 scale or its reciprocals")
    ts = time.time() if timestamp is None else float(timestamp)
    answers = session.answers + ((got, value, ts),)
    probe = replace(session, answers=answers)
    pcm = probe.matrix()
    connected = is_connected(associated_graph(pcm))
    if connected:
        try:
            rep = cr_incomplete(pcm, ri_policy, bounded=session.bounded)
            ri_naive = BUILTIN_RI.complete_row.get(session.n)
            record = CrRecord(
                answered_count=len(answers), connected=True,
                ci=rep.ci, ri_nm=rep.ri_used,
                cr_generalized=rep.cr,
                cr_naive=None if ri_naive is None else rep.ci / ri_naive,
            )
        except (NotInTable, UnknownBaseRi):
            # no published random index for this size: record the raw index only
            from .core import consistency_index, spectral_radius
            from .weighting import em_completion
            if pcm.is_complete():
                lam = spectral_radius(pcm.to_array())
            else:
                bounds = (1.0 / 9.0, 9.0) if session.bounded else None
                lam = em_completion(pcm, bounds=bounds).diagnostics["lambda_max"]
            record = CrRecord(answered_count=len(answers), connected=True,
                              ci=consistency_index(lam, session.n))
    else:
        record = CrRecord(answered_count=len(answers), connected=False)
    status = SessionStatus.COMPLETED if len(answers) == len(session.order) else SessionStatus.ACTIVE
    return replace(session, answers=answers, cr_history=session.cr_history + (record,),
                   status=status)


def session_report(session: Session) -> dict:
    """Full consistency-ratio series, current weights, and 0.1-threshold flags."""
    records = [r for r in session.cr_history
               if r.connected and r.cr_generalized is not None
               and math.isfinite(r.cr_generalized)]
    series_gen = [(r.answered_count, r.cr_generalized) for r in records]
    series_naive = [(r.answered_count, r.cr_naive) for r in records]
    crossings = []
    prev = None
    for r in records:
        if prev is not None:
            if prev <= 0.1 < r.cr_generalized:
                crossings.append({"answered_count": r.answered_count, "direction": "above"})
            elif prev > 0.1 >= r.cr_generalized:
                crossings.append({"answered_count": r.answered_count, "direction": "below"})
        elif r.cr_generalized > 0.1:
            crossings.append({"answered_count": r.answered_count, "direction": "above"})
        prev = r.cr_generalized
    pcm = session.matrix()
    weights = None
    if session.answers and is_connected(associated_graph(pcm)):
        weights = llsm_weights(pcm, Gauge.SUM_ONE).to_dict()
    final_cr = records[-1].cr_generalized if records else None
    return {
        "id": session.id,
        "labels": list(session.labels),
        "status": session.status.value,
        "order": [[i + 1, j + 1] for (i, j) in session.order],
        "answers": [
            {"i": p[0] + 1, "j": p[1] + 1, "value": v, "timestamp": ts}
            for (p, v, ts) in session.answers
        ],
        "cr_history": [r.to_dict() for r in session.cr_history],
        "series": {
            "generalized": series_gen,
            "naive": series_naive,
        },
        "threshold": 0.1,
        "threshold_crossings": crossings,
        "accepted": (final_cr is not None and final_cr < 0.1),
        "weights": weights,
        "display": {
            "final_cr": None if final_cr is None else f"{final_cr:.4f}",
        },
    }


def export_session(session: Session) -> dict:
    doc = session_report(session)
    doc["scale"] = session.scale.value
    doc["bounded"] = session.bounded
    return doc


def replay_session(doc: dict) -> Session:
    """Rebuild a session from an export; the history is recomputed, which
    makes replay a consistency check of the stored record."""
    labels = doc["labels"]
    order = [(i - 1, j - 1) for (i, j) in doc["order"]]
    session = create_session(
        len(labels), labels, QuestionPolicy.fixed(order),
        scale=doc.get("scale", "free"), bounded=doc.get("bounded", False),
        session_id=doc.get("id"),
    )
    for ans in doc.get("answers", []):
        session = submit_answer(session, (ans["i"] - 1, ans["j"] - 1), ans["value"],
                                timestamp=ans.get("timestamp"))
    return session


# -- filling-pattern experiment --------------------------------------------------

_METRICS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "euclidean": lambda a, b: np.linalg.norm(a - b, axis=-1),
    "chebyshev": lambda a, b: np.abs(a - b).max(axis=-1),
    "cosine": lambda a, b: 1.0 - (a * b).sum(axis=-1)
    / (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)),
}


def _canonical_mask(mask: int, perm_weights: np.ndarray, n_pairs: int) -> int:
    bits = (mask >> np.arange(n_pairs)) & 1
    return int((perm_weights @ bits).min())


def _edge_permutations(n: int, pairs: list) -> np.ndarray:
    """Per vertex permutation, the bit weight each edge slot maps to.

    Row p holds 2^(image of edge e under permutation p), so a permuted
    bitmask is one matrix-vector product away.
    """
    index = {p: e for e, p in enumerate(pairs)}
    weights = []
    for perm in itertools.permutations(range(n)):
        row = np.empty(len(pairs), dtype=np.int64)
        for e, (i, j) in enumerate(pairs):
            a, b = perm[i], perm[j]
            row[e] = 1 << index[(a, b) if a < b else (b, a)]
        weights.append(row)
    return np.array(weights)


def connected_subgraph_classes(n: int) -> dict:
    """Connected spanning-edge-set isomorphism classes keyed by edge count.

    Returns {k: [(canonical_mask, representative_edge_list), ...]}.
    """
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    n_pairs = len(pairs)
    perm_weights = _edge_permutations(n, pairs)
    from .core import connected_edges
    classes: dict = {}
    for k in range(n - 1, n_pairs + 1):
        reps = {}
        for combo in itertools.combinations(range(n_pairs), k):
            edges = [pairs[e] for e in combo]
            if not connected_edges(n, edges):
                continue
            mask = 0
            for e in combo:
                mask |= 1 << e
            canon = _canonical_mask(mask, perm_weights, n_pairs)
            if canon not in reps:
                reps[canon] = edges
        classes[k] = sorted(reps.items())
    return classes


def pattern_experiment(n: int, samples: int, seed: int = 0,
                       distance: str = "euclidean", noise_sigma: float = 0.3,
                       round_to_scale: bool = False) -> dict:
    """Rank connected comparison subgraphs by how closely their restricted
    least squares weights track the full-information weights.

    For each edge count k the connected subgraphs (up to isomorphism) are
    scored by the mean distance over shared random matrices; a greedy nested
    sequence then threads as many per-k optima as it can.
    """
    if n > 6:
        raise TooLarge(f"pattern enumeration is bounded at n=6, got n={n}")
    if n < 3:
        raise TooLarge("need at least 3 alternatives")
    if distance not in _METRICS:
        raise BadMetric(f"unknown metric {distance!r}; pick one of {sorted(_METRICS)}")
    if samples < 1:
        raise BadMetric(f"samples={samples} must be positive")
    metric = _METRICS[distance]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    n_pairs = len(pairs)

    # shared random matrices: consistent log-uniform base + multiplicative noise
    half = math.log(9.0) / 2.0
    logs = np.empty((samples, n_pairs))
    for s in range(samples):
        rng = np.random.Generator(np.random.Philox(
            key=np.array([seed % 2 ** 64, s], dtype=np.uint64)))
        y = rng.uniform(-half, half, size=n)
        eps = rng.normal(0.0, noise_sigma, size=n_pairs)
        row = np.array([y[i] - y[j] for (i, j) in pairs]) + eps
        logs[s] = row
    if round_to_scale:
        saaty_logs = np.log(np.array(SAATY_VALUES))
        idx = np.abs(logs[..., None] - saaty_logs).argmin(axis=-1)
        logs = saaty_logs[idx]

    # full-information reference weights (row geometric mean)
    y_full = np.zeros((samples, n))
    for e, (i, j) in enumerate(pairs):
        y_full[:, i] += logs[:, e]
        y_full[:, j] -= logs[:, e]
    y_full /= n
    w_full = np.exp(y_full - y_full.max(axis=1, keepdims=True))
    w_full /= w_full.sum(axis=1, keepdims=True)

    classes = connected_subgraph_classes(n)
    per_k = {}
    for k, reps in classes.items():
        scored = []
        for canon, edges in reps:
            L = np.zeros((n, n))
            for (i, j) in edges:
                L[i, i] += 1.0
                L[j, j] += 1.0
                L[i, j] -= 1.0
                L[j, i] -= 1.0
            inv = np.linalg.inv(L[: n - 1, : n - 1])
            r = np.zeros((samples, n))
            for (i, j) in edges:
                e = pairs.index((i, j))
                r[:, i] += logs[:, e]
                r[:, j] -= logs[:, e]
            y_sub = np.zeros((samples, n))
            y_sub[:, : n - 1] = r[:, : n - 1] @ inv.T
            w_sub = np.exp(y_sub - y_sub.max(axis=1, keepdims=True))
            w_sub /= w_sub.sum(axis=1, keepdims=True)
            scored.append((canon, edges, float(metric(w_sub, w_full).mean())))
        scored.sort(key=lambda t: (t[2], t[0]))
        per_k[k] = [
            {"canonical": canon, "edges": [[i + 1, j + 1] for (i, j) in edges],
             "mean_distance": dist, "rank": rank + 1}
            for rank, (canon, edges, dist) in enumerate(scored)
        ]

    sequence = _greedy_nested_sequence(n, pairs, classes, per_k)
    return {
        "n": n,
        "samples": samples,
        "seed": seed,
        "metric": distance,
        "noise_sigma": noise_sigma,
        "per_k": per_k,
        "sequence": sequence,
    }


def _greedy_nested_sequence(n, pairs, classes, per_k) -> dict:
    """Grow one edge at a time, preferring to land on each k's best class."""
    n_pairs = len(pairs)
    perm_weights = _edge_permutations(n, pairs)
    canon_rank = {k: {row["canonical"]: row["rank"] for row in rows} for k, rows in per_k.items()}
    k0 = n - 1
    best0 = per_k[k0][0]
    current = [tuple(e) for e in ((i - 1, j - 1) for (i, j) in best0["edges"])]
    mask = 0
    for e in current:
        mask |= 1 << pairs.index(e)
    levels = [{"k": k0, "added": None, "canonical": best0["canonical"],
               "hits_optimum": True, "mean_distance": best0["mean_distance"]}]
    hits = 1
    for k in range(k0 + 1, n_pairs + 1):
        target_rows = per_k[k]
        best_choice = None
        for e in range(n_pairs):
            if mask >> e & 1:
                continue
            new_mask = mask | (1 << e)
            canon = _canonical_mask(new_mask, perm_weights, n_pairs)
            rank = canon_rank[k][canon]
            key = (rank, canon, e)
            if best_choice is None or key < best_choice[0]:
                row = next(r for r in target_rows if r["canonical"] == canon)
                best_choice = (key, e, canon, row)
        _, e, canon, row = best_choice
        mask |= 1 << e
        hit = row["rank"] == 1
        hits += int(hit)
        levels.append({
            "k": k,
            "added": [pairs[e][0] + 1, pairs[e][1] + 1],
            "canonical": canon,
            "hits_optimum": hit,
            "mean_distance": row["mean_distance"],
        })
    return {"levels": levels, "optima_threaded": hits, "of": len(levels)}
