import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import CDAG_7_ARCS, CDAG_8_ARCS
from pcmkit.core import Gauge, IncompletePcm, Scale
from pcmkit.errors import (
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
from pcmkit.structures import (
    Adjustment,
    CdagSpec,
    EnumerationMode,
    bwm_enumerate_violations,
    bwm_guarantee,
    bwm_llsm_weights,
    bwm_matrix,
    cdag_matrix,
    head_to_head_ingest,
    is_bwm_shape,
    ordinal_violations,
)
from pcmkit.weighting import em_weights, llsm_weights, make_weights


def random_cdag(rng, n):
    while True:
        arcs = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.45:
                    arcs.append((i, j))
        try:
            return CdagSpec(n, tuple(arcs), 3.0)
        except (CycleFound, NotWeaklyConnected):
            continue


class TestCdag:
    def test_seven_vertex_example_matrix(self):
        spec = CdagSpec(7, tuple((i - 1, j - 1) for (i, j) in CDAG_7_ARCS), 3.0)
        pcm = cdag_matrix(spec)
        assert pcm.value(0, 1) == 3.0
        assert pcm.value(1, 0) == pytest.approx(1 / 3)
        assert pcm.value(0, 2) is None
        assert len(pcm.entries) == 11
        assert pcm.missing_count == 21 - 11

    def test_two_vertices_one_arc(self):
        pcm = cdag_matrix(CdagSpec(2, ((0, 1),), 5.0))
        assert pcm.to_array().tolist() == [[1.0, 5.0], [0.2, 1.0]]

    def test_two_cycle_rejected(self):
        with pytest.raises(CycleFound):
            CdagSpec(2, ((0, 1), (1, 0)), 3.0)

    def test_directed_cycle_rejected(self):
        with pytest.raises(CycleFound):
            CdagSpec(3, ((0, 1), (1, 2), (2, 0)), 3.0)

    def test_disconnected_rejected(self):
        with pytest.raises(NotWeaklyConnected):
            CdagSpec(4, ((0, 1), (2, 3)), 3.0)

    def test_alpha_must_dominate(self):
        with pytest.raises(ValueBelowOne):
            CdagSpec(2, ((0, 1),), 1.0)

    def test_topological_labels_put_dominance_above_diagonal(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            spec = random_cdag(rng, int(rng.integers(3, 7)))
            A = cdag_matrix(spec)
            for (i, j), v in A.entries.items():
                assert i < j and v > 1.0

    def test_llsm_ranking_invariant_in_alpha(self):
        # log-weights scale exactly with log(alpha), so the weak order is
        # alpha-free; compare rankings on rounded logs to keep ties stable
        from pcmkit.weighting import llsm_log_y
        rng = np.random.default_rng(32)
        for _ in range(25):
            n = int(rng.integers(3, 8))
            base = random_cdag(rng, n)
            rankings = set()
            for alpha in (2.0, 3.0, 5.0, 9.0):
                spec = CdagSpec(base.n, base.arcs, alpha)
                y = llsm_log_y(cdag_matrix(spec)) / math.log(alpha)
                y = y - y.mean()
                rankings.add(tuple(int(i) for i in np.argsort(-np.round(y, 9), kind="stable")))
            assert len(rankings) == 1


class TestBwmMatrix:
    def test_published_questionnaire(self):
        pcm = bwm_matrix(6, [2, 2, 2, 2, 2], [9, 2, 2, 2])
        assert pcm.value(0, 5) == 2.0
        assert pcm.value(1, 5) == 9.0
        assert pcm.value(1, 2) is None
        assert pcm.missing_count == 6
        assert is_bwm_shape(pcm)

    def test_three_alternatives_complete(self):
        pcm = bwm_matrix(3, [2, 4], [3])
        assert pcm.is_complete()

    def test_missing_count_formula(self):
        for n in range(3, 9):
            pcm = bwm_matrix(n, [2] * (n - 1), [2] * (n - 2))
            assert pcm.missing_count == (n - 2) * (n - 3) // 2

    def test_arity_checked(self):
        with pytest.raises(WrongArity):
            bwm_matrix(6, [2, 2, 2], [2, 2, 2, 2])
        with pytest.raises(WrongArity):
            bwm_matrix(6, [2, 2, 2, 2, 2], [2])

    def test_values_below_one_rejected(self):
        with pytest.raises(ValueBelowOne):
            bwm_matrix(4, [2, 0.5, 2], [2, 2])

    def test_closed_form_weights_match_generic_solver(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            n = int(rng.integers(4, 8))
            best = rng.integers(2, 10, size=n - 1).astype(float)
            others = rng.integers(2, 10, size=n - 2).astype(float)
            best[-1] = max(best.max(), others.max())  # keep a_1n plausible
            pcm = bwm_matrix(n, list(best), list(others))
            closed = bwm_llsm_weights(pcm, Gauge.SUM_ONE).as_array()
            generic = llsm_weights(pcm, Gauge.SUM_ONE).as_array()
            assert np.abs(closed - generic).max() < 1e-12


class TestOrdinalViolations:
    def test_dominance_example_flags_first_pair(self):
        spec = CdagSpec(7, tuple((i - 1, j - 1) for (i, j) in CDAG_7_ARCS), 3.0)
        pcm = cdag_matrix(spec)
        report = ordinal_violations(pcm, llsm_weights(pcm), "llsm")
        assert any(v[0] == 0 and v[1] == 1 for v in report.violations)

    def test_eigen_ranking_depends_on_alpha(self):
        arcs = tuple((i - 1, j - 1) for (i, j) in CDAG_8_ARCS)
        pcm3 = cdag_matrix(CdagSpec(8, arcs, 3.0))
        pcm4 = cdag_matrix(CdagSpec(8, arcs, 4.0))
        rep3 = ordinal_violations(pcm3, em_weights(pcm3), "em")
        rep4 = ordinal_violations(pcm4, em_weights(pcm4), "em")
        assert any(v[:2] == (0, 1) for v in rep3.violations)
        assert not any(v[:2] == (0, 1) for v in rep4.violations)

    def test_consistent_weights_clean(self):
        w = np.array([4.0, 2.0, 1.0])
        entries = {(i, j): w[i] / w[j] for i in range(3) for j in range(i + 1, 3)}
        pcm = IncompletePcm.create(3, entries)
        report = ordinal_violations(pcm, make_weights(w))
        assert report.is_empty()

    def test_ties_are_not_violations(self):
        pcm = IncompletePcm.create(2, {(0, 1): 2.0})
        report = ordinal_violations(pcm, make_weights([1.0, 1.0]))
        assert report.is_empty()

    def test_dimension_checked(self):
        pcm = IncompletePcm.create(3, {(0, 1): 2.0, (1, 2): 2.0})
        with pytest.raises(DimensionMismatch):
            ordinal_violations(pcm, make_weights([1.0, 2.0]))


class TestBwmGuarantee:
    def test_published_example_fails_both(self):
        pcm = bwm_matrix(6, [2, 2, 2, 2, 2], [9, 2, 2, 2])
        rep = bwm_guarantee(pcm)
        assert rep.p == 2.0
        assert rep.max_pref == 9.0
        assert not rep.theorem1_holds          # 9 > 8 = p^3
        assert not rep.theorem2_holds          # a_16 = 2 < 9
        assert not rep.certified()
        assert len(rep.violated_conditions) == 2

    def test_uniform_matrix_certified_by_first_theorem(self):
        p = 3.0
        pcm = bwm_matrix(5, [p, p, p, p ** 2], [p, p, p])
        rep = bwm_guarantee(pcm)
        assert rep.theorem1_holds

    def test_second_theorem_exponent_window(self):
        # on the integer 2..9 scale, 2^(4/(n-3)+3) > 9 holds up to n = 26
        for n in (5, 10, 26):
            assert 2.0 ** (4.0 / (n - 3) + 3.0) > 9.0
        assert 2.0 ** (4.0 / (27 - 3) + 3.0) < 9.0

    def test_second_theorem_certifies_strong_best_worst_gap(self):
        pcm = bwm_matrix(6, [2, 2, 2, 2, 9], [2, 2, 2, 2])
        rep = bwm_guarantee(pcm)
        assert not rep.theorem1_holds          # 9 > 8
        assert rep.theorem2_holds              # a_16 = 9 is maximal and 9 <= 2^(4/3+3)

    def test_shape_checked(self):
        pcm = IncompletePcm.create(4, {(0, 1): 2.0, (2, 3): 2.0, (0, 3): 2.0})
        with pytest.raises(NotBwmShape):
            bwm_guarantee(pcm)

    @pytest.mark.slow
    def test_certificate_soundness_random(self):
        rng = np.random.default_rng(52)
        checked = 0
        for _ in range(10000):
            n = int(rng.integers(4, 8))
            best = rng.integers(2, 10, size=n - 1).astype(float)
            others = rng.integers(2, 10, size=n - 2).astype(float)
            pcm = bwm_matrix(n, list(best), list(others))
            rep = bwm_guarantee(pcm)
            if rep.certified():
                checked += 1
                report = ordinal_violations(pcm, bwm_llsm_weights(pcm))
                assert report.is_empty()
        assert checked > 1000


class TestEnumeration:
    def test_sampled_mode_violation_rate(self):
        total, theorem1, violations = bwm_enumerate_violations(
            mode=EnumerationMode.SAMPLED, sample_count=100000, seed=3)
        assert total == 100000
        assert violations / total <= 1e-4
        assert abs(theorem1 / total - (7 / 8) ** 9) < 0.01

    def test_sampled_deterministic(self):
        a = bwm_enumerate_violations(mode=EnumerationMode.SAMPLED, sample_count=5000, seed=9)
        b = bwm_enumerate_violations(mode=EnumerationMode.SAMPLED, sample_count=5000, seed=9)
        assert a == b

    def test_scale_guarded(self):
        with pytest.raises(ScaleUnsupported):
            bwm_enumerate_violations(scale=Scale.FREE)
        with pytest.raises(ScaleUnsupported):
            bwm_enumerate_violations(n=5)

    @pytest.mark.exhaustive
    def test_exhaustive_counts(self):
        total, theorem1, violations = bwm_enumerate_violations(mode=EnumerationMode.EXHAUSTIVE)
        assert total == 134_217_728
        assert theorem1 == 40_353_607
        assert violations == 56


class TestHeadToHead:
    def test_ratio_and_missing(self):
        wins = [[0, 3, 0], [2, 0, 0], [0, 0, 0]]
        pcm = head_to_head_ingest(wins)
        assert pcm.value(0, 1) == pytest.approx(1.5)
        assert pcm.value(0, 2) is None
        assert pcm.value(1, 2) is None

    def test_additive_zero_adjustment(self):
        wins = [[0, 0], [3, 0]]
        pcm = head_to_head_ingest(wins, Adjustment.ADDITIVE)
        assert pcm.value(0, 1) == pytest.approx(1 / 5)
        assert pcm.exact[(0, 1)] == Fraction(1, 5)

    def test_ceiling_zero_adjustment(self):
        wins = [[0, 0, 7], [3, 0, 0], [0, 0, 0]]
        pcm = head_to_head_ingest(wins, Adjustment.CEILING)
        assert pcm.value(0, 1) == pytest.approx(1.0)       # 1/ceil(3/5)
        assert pcm.value(0, 2) == pytest.approx(2.0)       # ceil(7/5)

    def test_exponent_cap_keeps_rare_meetings_near_one(self):
        wins = [[0, 2, 21], [1, 0, 0], [18, 0, 0]]
        pcm = head_to_head_ingest(wins, exponent_cap=39)
        assert pcm.value(0, 1) == pytest.approx(2.0 ** (3 / 39))
        assert pcm.value(0, 2) == pytest.approx((21 / 18) ** 1.0)

    def test_full_cap_leaves_base_unchanged(self):
        wins = [[0, 26], [13, 0]]
        pcm = head_to_head_ingest(wins, exponent_cap=39)
        assert pcm.value(0, 1) == pytest.approx(2.0)

    def test_validation(self):
        with pytest.raises(NonzeroDiagonal):
            head_to_head_ingest([[1, 0], [0, 0]])
        with pytest.raises(NegativeCount):
            head_to_head_ingest([[0, -1], [0, 0]])
        with pytest.raises(DimensionMismatch):
            head_to_head_ingest([[0, 1, 2], [1, 0, 3]])
