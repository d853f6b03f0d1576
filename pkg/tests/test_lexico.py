import math

import numpy as np
import pytest

from conftest import random_incomplete, random_missing_count
from pcmkit.core import IncompletePcm, parse_pcm, triad_profile
from pcmkit.errors import DisconnectedGraph, NotIndependent
from pcmkit.lexico import (
    build_lex_lp,
    independent_missing,
    lex_completion,
    lex_completion_independent,
    solve_minmax_lp,
)

LN9 = math.log(9.0)


def grid_min_max_log_ti(pcm, step=1e-3, span=6 * LN9):
    """Brute-force oracle: smallest achievable max log triad inconsistency.

    Full scan for one variable; for two, a coarse pass plus fine refinement
    around every near-best coarse point (valid because the objective is a
    maximum of absolute affine forms, hence convex with gradient norm <= 2).
    """
    lp = build_lex_lp(pcm)
    cons = lp.active
    nv = len(lp.var_pairs)

    def max_abs(points):
        acc = None
        for con in cons:
            d = np.full(points.shape[1], con.const)
            for v, cf in con.coeffs.items():
                d = d + cf * points[v]
            term = np.abs(d)
            acc = term if acc is None else np.maximum(acc, term)
        return acc

    if nv == 1:
        xs = np.arange(-span, span + step, step)[None, :]
        return float(max_abs(xs).min())
    assert nv == 2
    coarse = 2e-2
    xs = np.arange(-span, span + coarse, coarse)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()])
    vals = max_abs(pts)
    vmin = vals.min()
    keep = pts[:, vals <= vmin + 2 * math.sqrt(2) * coarse]
    best = math.inf
    for col in range(keep.shape[1]):
        cx, cy = keep[0, col], keep[1, col]
        fx = np.arange(cx - coarse, cx + coarse + step, step)
        fy = np.arange(cy - coarse, cy + coarse + step, step)
        FX, FY = np.meshgrid(fx, fy, indexing="ij")
        fpts = np.stack([FX.ravel(), FY.ravel()])
        best = min(best, float(max_abs(fpts).min()))
    return best


class TestWorkedExample:
    def test_fills_and_theta(self, lex4):
        result, stages = lex_completion(lex4)
        assert result.filled[(0, 2)] == pytest.approx(4.0, abs=1e-6)
        assert result.filled[(0, 3)] == pytest.approx(8.0, abs=1e-6)
        assert result.diagnostics["theta"] == pytest.approx([8.0, 2.0, 2.0, 2.0], rel=1e-9)

    def test_stage_levels(self, lex4):
        _result, stages = lex_completion(lex4)
        assert [round(s.level, 6) for s in stages] == [8.0, 2.0]
        assert stages[0].frozen_triads == ((2, 3, 4),)
        assert set(stages[1].frozen_triads) == {(1, 2, 3), (1, 2, 4), (1, 3, 4)}

    def test_first_stage_solver_contract(self, lex4):
        lp = build_lex_lp(lex4)
        level, assignment, forced = solve_minmax_lp(lp)
        assert level == pytest.approx(math.log(8.0), abs=1e-9)
        assert [lp.active[i].triad for i in forced] == [(1, 2, 3)]

    def test_empty_lp_level_zero(self):
        pcm = IncompletePcm.create(3, {(0, 1): 2.0, (0, 2): 4.0, (1, 2): 2.0})
        lp = build_lex_lp(pcm)
        lp.active = []
        level, assignment, forced = solve_minmax_lp(lp)
        assert level == 0.0
        assert forced == []

    def test_complete_input_short_circuits(self):
        pcm = IncompletePcm.create(3, {(0, 1): 2.0, (0, 2): 4.0, (1, 2): 3.0})
        result, stages = lex_completion(pcm)
        assert stages == []
        assert result.filled == {}
        assert result.diagnostics["theta"] == pytest.approx(list(triad_profile(pcm).theta))

    def test_disconnected_rejected(self):
        pcm = IncompletePcm.create(4, {(0, 1): 2.0, (2, 3): 3.0})
        with pytest.raises(DisconnectedGraph):
            lex_completion(pcm)


class TestGridOracle:
    def test_single_missing_matches_grid(self):
        rng = np.random.default_rng(14)
        for _ in range(15):
            pcm = random_incomplete(rng, 4, 1)
            result, _ = lex_completion(pcm)
            got = math.log(result.diagnostics["theta"][0])
            want = grid_min_max_log_ti(pcm)
            assert abs(got - want) <= 2e-3

    def test_two_missing_matches_grid(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            pcm = random_incomplete(rng, 4, 2)
            result, _ = lex_completion(pcm)
            got = math.log(result.diagnostics["theta"][0])
            want = grid_min_max_log_ti(pcm)
            assert abs(got - want) <= 2e-3


class TestIndependentFastPath:
    def test_shared_row_rejected(self, lex4):
        assert not independent_missing(lex4)
        with pytest.raises(NotIndependent):
            lex_completion_independent(lex4)

    def test_disjoint_pattern_matches_lp(self):
        text = """1,2,*,4
1/2,1,1,*
*,1,1,2
1/4,*,1/2,1"""
        pcm = parse_pcm(text)
        assert independent_missing(pcm)
        fast = lex_completion_independent(pcm)
        full, _ = lex_completion(pcm)
        for key in fast.filled:
            assert fast.filled[key] == pytest.approx(full.filled[key], abs=1e-8)
        assert fast.diagnostics["theta"] == pytest.approx(full.diagnostics["theta"], abs=1e-8)

    def test_single_missing_always_independent(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            n = int(rng.integers(3, 6))
            pcm = random_incomplete(rng, n, 1)
            fast = lex_completion_independent(pcm)
            full, _ = lex_completion(pcm)
            key = next(iter(fast.filled))
            assert fast.filled[key] == pytest.approx(full.filled[key], abs=1e-8)

    def test_random_disjoint_patterns(self):
        rng = np.random.default_rng(17)
        done = 0
        while done < 10:
            n = int(rng.integers(4, 7))
            pcm = random_incomplete(rng, n, min(n // 2, random_missing_count(rng, n)))
            if not independent_missing(pcm) or pcm.is_complete():
                continue
            fast = lex_completion_independent(pcm)
            full, _ = lex_completion(pcm)
            assert fast.diagnostics["theta"] == pytest.approx(full.diagnostics["theta"], abs=1e-7)
            done += 1


class TestStageInvariants:
    def test_levels_strictly_decrease(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            n = int(rng.integers(4, 6))
            pcm = random_incomplete(rng, n, random_missing_count(rng, n))
            if pcm.is_complete():
                continue
            _result, stages = lex_completion(pcm)
            levels = [s.level for s in stages]
            assert all(a > b - 1e-9 for a, b in zip(levels, levels[1:]))
            assert all(levels[i] > levels[i + 1] - 1e-7 for i in range(len(levels) - 1))

    def test_stage_count_bounded_by_triads(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            n = int(rng.integers(4, 7))
            pcm = random_incomplete(rng, n, random_missing_count(rng, n))
            if pcm.is_complete():
                continue
            _result, stages = lex_completion(pcm)
            assert len(stages) <= n * (n - 1) * (n - 2) // 6

    def test_theta_lower_bound_from_constant_triads(self):
        rng = np.random.default_rng(20)
        for _ in range(20):
            n = int(rng.integers(4, 6))
            pcm = random_incomplete(rng, n, random_missing_count(rng, n))
            if pcm.is_complete():
                continue
            lp = build_lex_lp(pcm)
            const_levels = [abs(c.const) for c in lp.active if not c.coeffs]
            result, _ = lex_completion(pcm)
            theta1 = result.diagnostics["theta"][0]
            if const_levels:
                assert theta1 >= math.exp(max(const_levels)) - 1e-9

    def test_every_triad_frozen_once(self, lex4):
        _result, stages = lex_completion(lex4)
        seen = [t for s in stages for t in s.frozen_triads]
        assert sorted(seen) == [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]

    def test_degenerate_optimal_face_is_flagged(self):
        # stage 1 is pinned by a constant triad, so the missing entry keeps
        # slack on the optimal face; stage 2 then pins it uniquely
        pcm = IncompletePcm.create(4, {(0, 1): 1 / 3, (0, 3): 0.25, (1, 2): 1 / 3,
                                       (1, 3): 3.0, (2, 3): 0.125})
        result, stages = lex_completion(pcm)
        assert stages[0].degenerate_face
        assert not stages[1].degenerate_face
        assert result.diagnostics["theta"][0] == pytest.approx(72.0, rel=1e-9)
        assert result.diagnostics["theta"][1] == pytest.approx(math.sqrt(18.0), rel=1e-6)

    def test_lexicographic_optimality_against_random_probes(self, lex4):
        result, _ = lex_completion(lex4)
        theta_star = result.diagnostics["theta"]
        rng = np.random.default_rng(33)
        for _ in range(400):
            fills = {(0, 2): math.exp(rng.uniform(-LN9, LN9)),
                     (0, 3): math.exp(rng.uniform(-LN9, LN9))}
            probe = triad_profile(lex4.with_fills(fills)).theta
            assert tuple(np.round(theta_star, 9)) <= tuple(np.round(probe, 9) + 1e-9)
