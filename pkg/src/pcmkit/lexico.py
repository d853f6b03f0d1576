"""Lexicographically optimal completion via successive min-max linear programs.

Each stage minimises the largest log triad inconsistency among the still
active triads, then freezes every triad whose inconsistency cannot drop
below the stage level anywhere on the optimal face. Frozen triads keep
two-sided inequality constraints at their level, so later stages only
tighten the remaining ones. With vertex-disjoint missing pairs the whole
construction degenerates to one midrange computation per entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import IncompletePcm, triad_profile
from .errors import LpNumericalFailure, NotIndependent
from .simplex import solve_lp
from .weighting import CompletionMethod, CompletionResult, _require_connected

SETTLE_TOL = 1e-7
LEVEL_SLACK = 1e-9


@dataclass(frozen=True)
class TriadConstraint:
    """Affine form d = coeffs . vars + const of one triad's log inconsistency."""

    triad: tuple            # (i, j, k), 0-based
    coeffs: dict            # var index -> +/-1
    const: float

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(c * x[v] for v, c in self.coeffs.items())


@dataclass
class LexLp:
    """Stage problem state: variables, active and frozen triad constraints."""

    var_pairs: list                    # missing pairs, row-major; index = variable id
    active: list                       # list[TriadConstraint]
    frozen: list = field(default_factory=list)   # list[(TriadConstraint, level)]


@dataclass(frozen=True)
class LexStageRecord:
    stage: int
    level: float                       # TI terms (exponentiated)
    frozen_triads: tuple               # 1-based (i, j, k) triples
    degenerate_face: bool = False

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "level": float(f"{self.level:.10g}"),
            "frozen": [list(t) for t in self.frozen_triads],
            "degenerate_face": self.degenerate_face,
        }


def build_lex_lp(pcm: IncompletePcm) -> LexLp:
    var_pairs = pcm.missing_pairs()
    var_index = {p: v for v, p in enumerate(var_pairs)}
    active = []
    for i in range(pcm.n):
        for j in range(i + 1, pcm.n):
            for k in range(j + 1, pcm.n):
                coeffs: dict = {}
                const = 0.0
                for (pair, sign) in (((i, j), 1.0), ((j, k), 1.0), ((i, k), -1.0)):
                    if pair in var_index:
                        v = var_index[pair]
                        coeffs[v] = coeffs.get(v, 0.0) + sign
                    else:
                        const += sign * math.log(pcm.entries[pair])
                active.append(TriadConstraint((i, j, k), coeffs, const))
    return LexLp(var_pairs=var_pairs, active=active)


def _stage_rows(lp: LexLp, with_t: bool):
    """Inequality rows for the current stage; t is the trailing variable."""
    nv = len(lp.var_pairs)
    ncols = nv + (1 if with_t else 0)
    rows, rhs = [], []
    if with_t:
        for con in lp.active:
            row = np.zeros(ncols)
            for v, cf in con.coeffs.items():
                row[v] = cf
            row[-1] = -1.0
            rows.append(row.copy())
            rhs.append(-con.const)
            row[:nv] *= -1.0
            row[-1] = -1.0
            rows.append(row)
            rhs.append(con.const)
    for (con, level) in lp.frozen:
        row = np.zeros(ncols)
        for v, cf in con.coeffs.items():
            row[v] = cf
        rows.append(row.copy())
        rhs.append(level + LEVEL_SLACK - con.const)
        row[:nv] *= -1.0
        rows.append(row)
        rhs.append(level + LEVEL_SLACK + con.const)
    return np.array(rows) if rows else np.zeros((0, ncols)), np.array(rhs), ncols


def solve_minmax_lp(lp: LexLp):
    """Minimise the stage level t; returns (level, assignment, force report).

    The force report marks the triads whose log inconsistency cannot fall
    below the optimum anywhere on the optimal face. Dual values only rank
    candidates; the authoritative check re-solves a small LP per triad.
    """
    nv = len(lp.var_pairs)
    if not lp.active:
        x = _feasible_point(lp)
        return 0.0, x, []
    A, b, ncols = _stage_rows(lp, with_t=True)
    c = np.zeros(ncols)
    c[-1] = 1.0
    res = solve_lp(c, A, b)
    level = res.objective
    x = res.x[:nv]

    candidates = set()
    for idx, con in enumerate(lp.active):
        d_lo = res.duals[2 * idx]
        d_hi = res.duals[2 * idx + 1]
        if abs(d_lo) > 1e-9 or abs(d_hi) > 1e-9:
            candidates.add(idx)
        if abs(abs(con.value(x)) - level) <= 1e-9 * (1.0 + abs(level)):
            candidates.add(idx)
    forced = [idx for idx in sorted(candidates) if _is_settled(lp, idx, level)]
    return level, x, forced


def _is_settled(lp: LexLp, target: int, level: float) -> bool:
    """Can triad `target` go below `level` while all others stay within it?"""
    nv = len(lp.var_pairs)
    ncols = nv + 1                       # trailing variable: s = |d_target| bound
    rows, rhs = [], []
    for idx, con in enumerate(lp.active):
        row = np.zeros(ncols)
        for v, cf in con.coeffs.items():
            row[v] = cf
        if idx == target:
            row[-1] = -1.0
            rows.append(row.copy())
            rhs.append(-con.const)
            row[:nv] *= -1.0
            row[-1] = -1.0
            rows.append(row)
            rhs.append(con.const)
        else:
            rows.append(row.copy())
            rhs.append(level + LEVEL_SLACK - con.const)
            row2 = row.copy()
            row2[:nv] *= -1.0
            rows.append(row2)
            rhs.append(level + LEVEL_SLACK + con.const)
    for (con, lvl) in lp.frozen:
        row = np.zeros(ncols)
        for v, cf in con.coeffs.items():
            row[v] = cf
        rows.append(row.copy())
        rhs.append(lvl + LEVEL_SLACK - con.const)
        row[:nv] *= -1.0
        rows.append(row)
        rhs.append(lvl + LEVEL_SLACK + con.const)
    c = np.zeros(ncols)
    c[-1] = 1.0
    res = solve_lp(c, np.array(rows), np.array(rhs))
    return res.objective >= level - SETTLE_TOL


def _feasible_point(lp: LexLp) -> np.ndarray:
    """Any point satisfying the frozen constraints (active set empty)."""
    nv = len(lp.var_pairs)
    if nv == 0:
        return np.zeros(0)
    if not lp.frozen:
        return np.zeros(nv)
    A, b, ncols = _stage_rows(lp, with_t=False)
    res = solve_lp(np.zeros(ncols), A, b)
    return res.x[:nv]


def _face_is_degenerate(lp: LexLp, level: float, x: np.ndarray) -> bool:
    """Detect optimal faces of positive dimension by re-solving with a
    perturbed objective and comparing vertex assignments."""
    nv = len(lp.var_pairs)
    if nv == 0:
        return False
    A, b, ncols = _stage_rows(lp, with_t=True)
    t_row = np.zeros(ncols)
    t_row[-1] = 1.0
    A2 = np.vstack([A, t_row])
    b2 = np.concatenate([b, [level + LEVEL_SLACK]])
    eps = np.zeros(ncols)
    eps[:nv] = [((v * 2654435761) % 97 + 1) / 97.0 for v in range(nv)]
    lo = solve_lp(eps, A2, b2)
    hi = solve_lp(-eps, A2, b2)
    return bool(np.max(np.abs(lo.x[:nv] - hi.x[:nv])) > 1e-7)


def lex_completion(pcm: IncompletePcm) -> tuple[CompletionResult, list[LexStageRecord]]:
    """Nucleolus-style minimisation of the sorted triad inconsistency vector."""
    _require_connected(pcm)
    if pcm.is_complete():
        profile = triad_profile(pcm)
        return (
            CompletionResult(pcm, {}, CompletionMethod.LEXICOGRAPHIC,
                             {"theta": list(profile.theta), "stages": 0}),
            [],
        )
    lp = build_lex_lp(pcm)
    max_stages = len(lp.active)
    records: list[LexStageRecord] = []
    assignment = np.zeros(len(lp.var_pairs))
    stage = 0
    while lp.active:
        stage += 1
        if stage > max_stages:
            raise LpNumericalFailure("stage loop exceeded the triad count")
        try:
            level, assignment, forced = solve_minmax_lp(lp)
        except Exception as exc:          # simplex failures surface as domain errors
            raise LpNumericalFailure(f"stage {stage}: {exc}") from exc
        if not forced:
            raise LpNumericalFailure(f"stage {stage}: no settled triad at level {level}")
        degenerate = _face_is_degenerate(lp, level, assignment)
        frozen_ids = []
        for idx in sorted(forced, reverse=True):
            con = lp.active.pop(idx)
            lp.frozen.append((con, level))
            frozen_ids.append(tuple(c + 1 for c in con.triad))
        records.append(LexStageRecord(
            stage=stage,
            level=math.exp(level),
            frozen_triads=tuple(sorted(frozen_ids)),
            degenerate_face=degenerate,
        ))
    fills = {pair: math.exp(assignment[v]) for v, pair in enumerate(lp.var_pairs)}
    completed = pcm.with_fills(fills)
    profile = triad_profile(completed)
    result = CompletionResult(
        completed, fills, CompletionMethod.LEXICOGRAPHIC,
        {
            "theta": list(profile.theta),
            "stages": len(records),
            "stage_records": [r.to_dict() for r in records],
        },
    )
    return result, records


def independent_missing(pcm: IncompletePcm) -> bool:
    """True when no two missing pairs share an alternative."""
    seen: set = set()
    for (i, j) in pcm.missing_pairs():
        if i in seen or j in seen:
            return False
        seen.update((i, j))
    return True


def lex_completion_independent(pcm: IncompletePcm) -> CompletionResult:
    """LP-free path: each missing entry is the midrange of its triad targets."""
    _require_connected(pcm)
    if not independent_missing(pcm):
        raise NotIndependent("missing entries share a row or column")
    fills = {}
    for (i, j) in pcm.missing_pairs():
        targets = []
        for k in range(pcm.n):
            if k in (i, j):
                continue
            a_ik = pcm.value(i, k)
            a_kj = pcm.value(k, j)
            targets.append(math.log(a_ik) + math.log(a_kj))
        fills[(i, j)] = math.exp(0.5 * (min(targets) + max(targets)))
    completed = pcm.with_fills(fills)
    profile = triad_profile(completed)
    return CompletionResult(
        completed, fills, CompletionMethod.LEXICOGRAPHIC,
        {"theta": list(profile.theta), "stages": 0, "independent_fast_path": True},
    )
