"""Matrix and graph foundations for incomplete pairwise comparison matrices.

The data model is an upper-triangle map of known comparisons; reciprocity
and the unit diagonal are implied. Indices are 0-based in code and 1-based
in every external document format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .errors import (
    AsymmetricMissing,
    BadDimension,
    MatrixIncomplete,
    NoConvergence,
    NonPositiveEntry,
    ReciprocityViolation,
    ScaleViolation,
)

#: The 1..9 scale and its reciprocals, ascending.
SAATY_FRACTIONS = tuple(
    [Fraction(1, d) for d in range(9, 1, -1)] + [Fraction(v) for v in range(1, 10)]
)
SAATY_VALUES = tuple(float(f) for f in SAATY_FRACTIONS)

RECIPROCITY_TOL = 1e-9


class Scale(str, Enum):
    SAATY = "saaty"
    FREE = "free"


class Gauge(str, Enum):
    """Normalisation applied to a positive weight vector."""

    SUM_ONE = "sum-one"
    SUM_HUNDRED = "sum-hundred"
    LAST_ONE = "last-one"
    GEOM_MEAN_ONE = "geom-mean-one"

    def apply(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self is Gauge.SUM_ONE:
            return w / w.sum()
        if self is Gauge.SUM_HUNDRED:
            return 100.0 * w / w.sum()
        if self is Gauge.LAST_ONE:
            return w / w[-1]
        return w / math.exp(np.log(w).mean())


def _saaty_tag(value: float) -> Optional[Fraction]:
    for frac, fv in zip(SAATY_FRACTIONS, SAATY_VALUES):
        if abs(value - fv) <= 1e-12 * max(1.0, fv):
            return frac
    return None


@dataclass(frozen=True)
class IncompletePcm:
    """Reciprocal positive matrix with missing entries.

    `entries` holds the known upper-triangle values keyed by (i, j), i < j.
    `exact` carries optional exact rational tags for bit-exact serialization
    (always populated for Saaty-scale entries).
    """

    n: int
    entries: dict
    scale: Scale = Scale.FREE
    exact: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise BadDimension(f"n={self.n} must be at least 2")
        for (i, j), v in self.entries.items():
            if not (0 <= i < j < self.n):
                raise BadDimension(f"entry key ({i},{j}) out of range for n={self.n}")
            if not (isinstance(v, float) and math.isfinite(v) and v > 0):
                raise NonPositiveEntry(i + 1, j + 1, v)
        if self.scale is Scale.SAATY:
            for (i, j), v in self.entries.items():
                tag = self.exact.get((i, j)) or _saaty_tag(v)
                if tag is None or tag not in SAATY_FRACTIONS:
                    raise ScaleViolation(i + 1, j + 1, v)
                self.exact[(i, j)] = tag

    @staticmethod
    def create(n: int, entries: dict, scale: Scale | str = Scale.FREE,
               exact: Optional[dict] = None) -> "IncompletePcm":
        """Normalise keys/values and validate. Accepts float or Fraction values."""
        scale = Scale(scale)
        norm: dict = {}
        tags: dict = dict(exact or {})
        for (i, j), v in entries.items():
            if i == j:
                continue
            key = (i, j) if i < j else (j, i)
            if isinstance(v, Fraction):
                val = 1 / v if j < i else v
                norm[key] = float(val)
                tags[key] = val
            else:
                norm[key] = float(v) if i < j else 1.0 / float(v)
        for key in list(tags):
            if key not in norm:
                del tags[key]
        return IncompletePcm(n=n, entries=norm, scale=scale, exact=tags)

    # -- basic queries ----------------------------------------------------

    def known_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    def missing_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)
                if (i, j) not in self.entries]

    @property
    def missing_count(self) -> int:
        return self.n * (self.n - 1) // 2 - len(self.entries)

    def is_complete(self) -> bool:
        return self.missing_count == 0

    def value(self, i: int, j: int) -> Optional[float]:
        """a_ij, or None when missing."""
        if i == j:
            return 1.0
        v = self.entries.get((i, j) if i < j else (j, i))
        if v is None:
            return None
        return v if i < j else 1.0 / v

    def to_array(self, fills: Optional[dict] = None) -> np.ndarray:
        """Dense matrix; missing pairs must be covered by `fills`."""
        A = np.ones((self.n, self.n))
        for (i, j), v in self.entries.items():
            A[i, j] = v
            A[j, i] = 1.0 / v
        covered = set()
        for (i, j), v in (fills or {}).items():
            A[i, j] = v
            A[j, i] = 1.0 / v
            covered.add((i, j) if i < j else (j, i))
        uncovered = [p for p in self.missing_pairs() if p not in covered]
        if uncovered:
            raise MatrixIncomplete(f"{len(uncovered)} entries are missing, e.g. "
                                   f"({uncovered[0][0] + 1},{uncovered[0][1] + 1})")
        return A

    def with_fills(self, fills: dict) -> "IncompletePcm":
        merged = dict(self.entries)
        for (i, j), v in fills.items():
            key = (i, j) if i < j else (j, i)
            merged[key] = float(v) if i < j else 1.0 / float(v)
        return IncompletePcm.create(self.n, merged, Scale.FREE, dict(self.exact))


# -- document formats ------------------------------------------------------

def parse_value_token(token: str) -> tuple[float, Optional[Fraction]]:
    token = token.strip()
    if "/" in token:
        num, den = token.split("/", 1)
        frac = Fraction(int(num.strip()), int(den.strip()))
        return float(frac), frac
    try:
        as_int = int(token)
    except ValueError:
        return float(token), None
    return float(as_int), Fraction(as_int)


def format_value(value: float, exact: Optional[Fraction]) -> str:
    if exact is not None:
        return str(exact.numerator) if exact.denominator == 1 else f"{exact.numerator}/{exact.denominator}"
    return repr(value)


def parse_pcm(text: str) -> IncompletePcm:
    """Parse either document format: CSV grid or structured JSON."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_structured(json.loads(text))
    return _parse_csv(text)


def _parse_structured(doc: dict) -> IncompletePcm:
    try:
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError):
        raise BadDimension("structured document needs an integer 'n'")
    scale = Scale(doc.get("scale", "free"))
    entries: dict = {}
    exact: dict = {}
    for item in doc.get("entries", []):
        i, j = int(item["i"]) - 1, int(item["j"]) - 1
        if not (0 <= i < j < n):
            raise BadDimension(f"entry ({i + 1},{j + 1}) out of range: need 1 <= i < j <= {n}")
        if (i, j) in entries:
            raise BadDimension(f"duplicate entry ({i + 1},{j + 1})")
        value, frac = parse_value_token(str(item["value"]))
        if not (math.isfinite(value) and value > 0):
            raise NonPositiveEntry(i + 1, j + 1, value)
        entries[(i, j)] = value
        if frac is not None:
            exact[(i, j)] = frac
    return IncompletePcm(n=n, entries=entries, scale=scale, exact=exact)


def _parse_csv(text: str) -> IncompletePcm:
    rows = [line for line in (ln.strip() for ln in text.splitlines()) if line]
    n = len(rows)
    if n < 2:
        raise BadDimension(f"CSV grid needs at least 2 rows, got {n}")
    cells = [[c.strip() for c in row.split(",")] for row in rows]
    for idx, row in enumerate(cells):
        if len(row) != n:
            raise BadDimension(f"row {idx + 1} has {len(row)} cells, expected {n}")
    entries: dict = {}
    exact: dict = {}
    for i in range(n):
        if cells[i][i] != "1":
            raise BadDimension(f"diagonal cell ({i + 1},{i + 1}) must be '1', got {cells[i][i]!r}")
    for i in range(n):
        for j in range(i + 1, n):
            up, lo = cells[i][j], cells[j][i]
            if up == "*" or lo == "*":
                if up != lo:
                    raise AsymmetricMissing(i + 1, j + 1)
                continue
            v_up, f_up = parse_value_token(up)
            v_lo, f_lo = parse_value_token(lo)
            for (vv, ii, jj) in ((v_up, i, j), (v_lo, j, i)):
                if not (math.isfinite(vv) and vv > 0):
                    raise NonPositiveEntry(ii + 1, jj + 1, vv)
            if f_up is not None and f_lo is not None:
                if f_up * f_lo != 1:
                    raise ReciprocityViolation(i + 1, j + 1, up, lo)
            elif abs(v_up * v_lo - 1.0) > RECIPROCITY_TOL:
                raise ReciprocityViolation(i + 1, j + 1, up, lo)
            entries[(i, j)] = v_up
            if f_up is not None:
                exact[(i, j)] = f_up
    return IncompletePcm(n=n, entries=entries, scale=Scale.FREE, exact=exact)


def serialize_pcm(pcm: IncompletePcm, fmt: str = "structured") -> str:
    if fmt == "structured":
        return json.dumps(pcm_document(pcm), indent=2) + "\n"
    if fmt == "csv":
        lines = []
        for i in range(pcm.n):
            row = []
            for j in range(pcm.n):
                if i == j:
                    row.append("1")
                    continue
                key = (i, j) if i < j else (j, i)
                if key not in pcm.entries:
                    row.append("*")
                elif i < j:
                    row.append(format_value(pcm.entries[key], pcm.exact.get(key)))
                else:
                    frac = pcm.exact.get(key)
                    row.append(format_value(1.0 / pcm.entries[key], 1 / frac if frac else None))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def pcm_document(pcm: IncompletePcm) -> dict:
    return {
        "n": pcm.n,
        "scale": pcm.scale.value,
        "entries": [
            {"i": i + 1, "j": j + 1, "value": format_value(v, pcm.exact.get((i, j)))}
            for (i, j), v in sorted(pcm.entries.items())
        ],
    }


# -- graph view ------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonGraph:
    n: int
    edges: frozenset

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def adjacency(self) -> list[set]:
        adj = [set() for _ in range(self.n)]
        for (i, j) in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


def associated_graph(pcm: IncompletePcm) -> ComparisonGraph:
    return ComparisonGraph(pcm.n, frozenset(pcm.entries))


def is_connected(g: ComparisonGraph) -> bool:
    if g.n == 0:
        return True
    adj = g.adjacency()
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == g.n


def connected_edges(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    return is_connected(ComparisonGraph(n, frozenset(edges)))


# -- triads ----------------------------------------------------------------

def triad_ti(a_ij: float, a_jk: float, a_ik: float) -> float:
    """Inconsistency of one triad: max of the cycle ratio and its inverse."""
    prod = a_ij * a_jk
    return max(a_ik / prod, prod / a_ik)


@dataclass(frozen=True)
class TriadProfile:
    """All triad inconsistencies plus the non-increasing value vector."""

    triads: tuple           # ((i, j, k, ti), ...) in lexicographic (i, j, k) order
    theta: tuple            # ti values sorted descending
    order: tuple            # triad ids aligned with theta; ties broken lexicographically

    @property
    def max_ti(self) -> float:
        return self.theta[0] if self.theta else 1.0


def triad_profile(pcm: IncompletePcm) -> TriadProfile:
    if not pcm.is_complete():
        raise MatrixIncomplete(f"{pcm.missing_count} entries are missing")
    A = pcm.to_array()
    triads = []
    for i in range(pcm.n):
        for j in range(i + 1, pcm.n):
            for k in range(j + 1, pcm.n):
                triads.append((i, j, k, triad_ti(A[i, j], A[j, k], A[i, k])))
    ranked = sorted(triads, key=lambda t: (-t[3], t[:3]))
    return TriadProfile(
        triads=tuple(triads),
        theta=tuple(t[3] for t in ranked),
        order=tuple(t[:3] for t in ranked),
    )


# -- dominant eigenvalue ---------------------------------------------------

def spectral_radius(A: np.ndarray) -> float:
    """Perron root via the full spectrum; robust inner objective for solvers."""
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def dominant_eigenvalue(A, tol: float = 1e-13, max_iter: int = 100000,
                        residual_tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Power iteration for the Perron root and vector of a nonnegative matrix.

    Starts from the all-ones vector; stops when successive eigenvalue
    estimates differ by less than `tol`. The returned vector is positive and
    max-normalised; apply a Gauge for presentation.
    """
    if isinstance(A, IncompletePcm):
        A = A.to_array()
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    v = np.ones(n)
    lam_prev = 0.0
    for _ in range(max_iter):
        w = A @ v
        lam = float(w.max())
        residual = float(np.max(np.abs(w - lam * v)))
        w = w / lam
        if abs(lam - lam_prev) < tol and residual <= residual_tol * float(np.max(np.abs(v))):
            v = w
            break
        lam_prev, v = lam, w
    else:
        raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")
    return lam, v


def consistency_index(lam: float, n: int) -> float:
    return (lam - n) / (n - 1)


@dataclass(frozen=True)
class InconsistencyReport:
    """Saaty-style inconsistency summary, generalised to incomplete input."""

    lambda_max: float
    ci: float
    ri_used: float
    ri_source: str          # "table" | "approx" | "simulated"
    cr: float
    m: int                  # number of missing upper-triangle entries

    def to_dict(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "ci": self.ci,
            "ri": self.ri_used,
            "ri_source": self.ri_source,
            "cr": self.cr,
            "missing": self.m,
        }
