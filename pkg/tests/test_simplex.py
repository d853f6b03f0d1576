import numpy as np
import pytest
from scipy.optimize import linprog

from pcmkit.errors import Infeasible, Unbounded
from pcmkit.simplex import solve_lp


class TestAgainstScipy:
    def test_random_bounded_instances(self):
        rng = np.random.default_rng(0)
        solved = 0
        for _ in range(120):
            nvar = int(rng.integers(1, 6))
            m = int(rng.integers(1, 10))
            A = rng.normal(0, 1, (m, nvar))
            b = rng.normal(0, 2, m)
            c = rng.normal(0, 1, nvar)
            # box rows keep the instance bounded and feasible checks meaningful
            A = np.vstack([A, np.eye(nvar), -np.eye(nvar)])
            b = np.concatenate([b, np.full(nvar, 10.0), np.full(nvar, 10.0)])
            ref = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * nvar, method="highs")
            if not ref.success:
                continue
            got = solve_lp(c, A, b)
            solved += 1
            assert got.objective == pytest.approx(ref.fun, abs=1e-7)
            assert np.all(A @ got.x <= b + 1e-7)
        assert solved > 80

    def test_infeasible_detected(self):
        # x <= -1 and -x <= 0 cannot hold together
        with pytest.raises(Infeasible):
            solve_lp([1.0], [[1.0], [-1.0]], [-1.0, 0.0])

    def test_unbounded_detected(self):
        with pytest.raises(Unbounded):
            solve_lp([-1.0], [[-1.0]], [0.0])

    def test_degenerate_vertex(self):
        # multiple constraints meet at the optimum
        c = [0.0, 0.0, 1.0]
        A = [[1.0, 0.0, -1.0], [-1.0, 0.0, -1.0],
             [0.0, 1.0, -1.0], [0.0, -1.0, -1.0],
             [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]]
        b = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        got = solve_lp(c, A, b)
        assert got.objective == pytest.approx(0.0, abs=1e-9)

    def test_duals_flag_binding_rows(self):
        # min -x - y s.t. x <= 2, y <= 3, x + y <= 4
        c = [-1.0, -1.0]
        A = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        b = [2.0, 3.0, 4.0]
        got = solve_lp(c, A, b)
        assert got.objective == pytest.approx(-4.0, abs=1e-9)
        binding = np.abs(got.duals) > 1e-9
        # row y <= 3 is slack at every optimum of this instance
        assert not binding[1] or got.x[1] == pytest.approx(3.0, abs=1e-7)
        assert binding[2]

    def test_equality_like_pair(self):
        # x <= 1 and -x <= -1 pin x = 1
        got = solve_lp([5.0], [[1.0], [-1.0]], [1.0, -1.0])
        assert got.x[0] == pytest.approx(1.0, abs=1e-9)
        assert got.objective == pytest.approx(5.0, abs=1e-9)

    def test_free_variable_negative_optimum(self):
        # min x s.t. -x <= 5  ->  x = -5
        got = solve_lp([1.0], [[-1.0]], [5.0])
        assert got.x[0] == pytest.approx(-5.0, abs=1e-9)
