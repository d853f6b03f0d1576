"""Shared fixtures: the worked examples used across the suite."""

import numpy as np
import pytest

from pcmkit.core import IncompletePcm, Scale, connected_edges

# n=5 matrix with one missing comparison where the two classical completions
# genuinely disagree (least squares fill 0.1705 vs eigenvalue fill 0.1798)
DIVERGENT_5 = """1,1/2,5,1/6,*
2,1,4,1/2,1/6
1/5,1/4,1,1/6,1/7
6,2,6,1,1/2
*,6,7,2,1"""

# n=4 matrix with two dependent missing entries; lexicographic optimum fills
# x13=4, x14=8 with sorted triad inconsistencies [8, 2, 2, 2]
LEX_4 = """1,2,*,*
1/2,1,1,8
*,1,1,1
*,1/8,1,1"""

# 7-vertex acyclic digraph whose least squares weights flip the first arc
CDAG_7_ARCS = ((1, 2), (1, 6), (1, 7), (2, 3), (2, 4), (3, 4),
               (3, 5), (4, 5), (4, 6), (5, 6), (5, 7))

# 8-vertex acyclic digraph where the eigenvalue ranking depends on the dominance parameter
CDAG_8_ARCS = ((1, 2), (1, 7), (1, 8), (2, 3), (2, 4), (3, 5), (3, 6),
               (4, 5), (4, 6), (5, 7), (5, 8), (6, 7), (6, 8))

# best-worst questionnaire with six alternatives; published least squares
# weights [26.45, 27.78, 13.10, 13.10, 13.10, 6.48] on the sum-100 gauge
BWM_6 = dict(n=6, best_row=[2, 2, 2, 2, 2], others_to_worst=[9, 2, 2, 2])

# six summer houses, full questionnaire (monitoring example)
MONITOR_6 = np.array([
    [1, 2, 7, 7, 7, 5],
    [1 / 2, 1, 5, 7, 5, 2],
    [1 / 7, 1 / 5, 1, 1, 1 / 5, 1 / 5],
    [1 / 7, 1 / 7, 1, 1, 1 / 3, 1 / 3],
    [1 / 7, 1 / 5, 5, 3, 1, 3],
    [1 / 5, 1 / 2, 5, 3, 1 / 3, 1],
])

MONITOR_ORDER = ((1, 2), (6, 4), (5, 1), (3, 2), (5, 6), (1, 3), (2, 4),
                 (6, 1), (4, 3), (5, 2), (1, 4), (3, 5), (2, 6), (4, 5), (3, 6))

# generalised-CR curve y-values at 6..15 known entries (missing-adjusted index)
MONITOR_CR_GENERALIZED = (0.0441941, 0.1811276, 0.1542925, 0.1566479, 0.1303657,
                          0.1103064, 0.114674, 0.1109822, 0.1011795, 0.093606)
# same curve against the complete-matrix index
MONITOR_CR_NAIVE = (0.00569675820656525, 0.0392998983186549, 0.048054261008807,
                    0.0639635228182546, 0.0661744251401121, 0.0669433706965572,
                    0.0810705892714171, 0.0894788678943154, 0.0913774395516413,
                    0.093606)


@pytest.fixture
def divergent5():
    from pcmkit.core import parse_pcm
    return parse_pcm(DIVERGENT_5)


@pytest.fixture
def lex4():
    from pcmkit.core import parse_pcm
    return parse_pcm(LEX_4)


def max_missing(n: int) -> int:
    return (n - 1) * (n - 2) // 2


def random_incomplete(rng: np.random.Generator, n: int, missing: int,
                      scale: Scale = Scale.SAATY) -> IncompletePcm:
    """Random connected instance with entries on the 1..9 scale."""
    from pcmkit.core import SAATY_FRACTIONS
    if missing > max_missing(n):
        raise ValueError(f"missing={missing} cannot leave n={n} connected")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    while True:
        drop = set(map(int, rng.choice(len(pairs), size=missing, replace=False))) \
            if missing else set()
        keep = [p for k, p in enumerate(pairs) if k not in drop]
        if connected_edges(n, keep):
            break
    entries = {p: SAATY_FRACTIONS[int(rng.integers(0, 17))] for p in keep}
    return IncompletePcm.create(n, entries, scale)


def random_missing_count(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(0, max_missing(n) + 1))


def monitor_pcm_prefix(k: int) -> IncompletePcm:
    """The monitoring example after k answers."""
    entries = {}
    for (i, j) in MONITOR_ORDER[:k]:
        a, b = i - 1, j - 1
        key = (a, b) if a < b else (b, a)
        entries[key] = MONITOR_6[key[0], key[1]]
    return IncompletePcm.create(6, entries, Scale.FREE)
