import itertools

import numpy as np
from django.test import SimpleTestCase

from solver_app.exceptions import InfeasiblePoint, InvalidProgram
from solver_app.simplex import LinearProgram, Status, check_feasible, solve


def vertex_oracle(lp):
    """
    Brute-force optimum of a bounded program: enumerate every basic solution
    of the inequality system (equalities split in two) and keep the best
    feasible one. Returns None when no vertex is feasible.
    """
    rows, rhs = [], []
    for row, rel, b in zip(lp.matrix, lp.relations, lp.rhs):
        if rel in ('<=', '='):
            rows.append(row)
            rhs.append(b)
        if rel in ('>=', '='):
            rows.append(-row)
            rhs.append(-b)
    n = lp.n_vars
    rows.extend(-np.eye(n))
    rhs.extend(np.zeros(n))
    rows.extend(np.eye(n))
    rhs.extend(lp.upper)
    rows, rhs = np.array(rows), np.array(rhs)

    combos = np.array(list(itertools.combinations(range(len(rows)), n)))
    systems, targets = rows[combos], rhs[combos]
    regular = np.abs(np.linalg.det(systems)) > 1e-9
    points = np.linalg.solve(systems[regular], targets[regular][..., None])[..., 0]
    feasible = np.all(rows @ points.T <= rhs[:, None] + 1e-9, axis=0)
    if not feasible.any():
        return None
    return float((points[feasible] @ lp.objective).max())


def random_program(rng):
    """
    A random program with at most 6 variables, 6 constraints and the box [0, 1]^n.
    Equalities are made feasible through a random interior point.
    """
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    anchor = rng.uniform(0, 1, size=n)
    constraints = []
    for _ in range(m):
        row = rng.uniform(-1, 1, size=n)
        relation = rng.choice(['<=', '<=', '>=', '='])
        if relation == '=':
            b = float(row @ anchor)
        else:
            b = float(rng.uniform(-0.5, 1.5))
        constraints.append((row, str(relation), b))
    objective = rng.uniform(-1, 1, size=n)
    return LinearProgram.from_constraints(objective, constraints, upper=np.ones(n))


class SolveTestCase(SimpleTestCase):
    """
    Test suite for the two-phase simplex solver.
    """

    def test_box_optimum(self):
        """
        max x1 + x2 s.t. x1 <= 1, x2 <= 1 reaches 2.
        """
        lp = LinearProgram.from_constraints(
            [1, 1], [([1, 0], '<=', 1), ([0, 1], '<=', 1)]
        )
        result = solve(lp)
        self.assertEqual(result.status, Status.OPTIMAL)
        self.assertAlmostEqual(result.value, 2.0)
        np.testing.assert_allclose(result.primal, [1, 1])

    def test_unbounded(self):
        """
        max x1 with only x1 >= 0 is unbounded.
        """
        lp = LinearProgram.from_constraints([1], [([1], '>=', 0)])
        self.assertEqual(solve(lp).status, Status.UNBOUNDED)
        self.assertEqual(solve(LinearProgram.from_constraints([1], [])).status, Status.UNBOUNDED)

    def test_infeasible(self):
        """
        x1 <= -1 together with x1 >= 0 is infeasible.
        """
        lp = LinearProgram.from_constraints([1], [([1], '<=', -1), ([1], '>=', 0)])
        self.assertEqual(solve(lp).status, Status.INFEASIBLE)

    def test_equality_and_bounds(self):
        """
        max x1 + 2 x2 with x1 + x2 = 1.5 and both variables in [0, 1] puts x2 at 1.
        """
        lp = LinearProgram.from_constraints([1, 2], [([1, 1], '=', 1.5)], upper=[1, 1])
        result = solve(lp)
        self.assertAlmostEqual(result.value, 2.5)
        np.testing.assert_allclose(result.primal, [0.5, 1.0], atol=1e-9)

    def test_redundant_equalities(self):
        """
        Duplicated equality rows leave a redundant artificial that is dropped.
        """
        lp = LinearProgram.from_constraints(
            [1, 1, 1],
            [([1, 1, 1], '=', 2), ([2, 2, 2], '=', 4), ([1, 0, 0], '<=', 0.5)],
            upper=[1, 1, 1],
        )
        result = solve(lp)
        self.assertEqual(result.status, Status.OPTIMAL)
        self.assertAlmostEqual(result.value, 2.0)

    def test_degenerate_program_terminates(self):
        """
        A classic cycling example under Dantzig's rule still terminates at its optimum.
        """
        lp = LinearProgram.from_constraints(
            [10, -57, -9, -24],
            [
                ([0.5, -5.5, -2.5, 9], '<=', 0),
                ([0.5, -1.5, -0.5, 1], '<=', 0),
                ([1, 0, 0, 0], '<=', 1),
            ],
        )
        result = solve(lp)
        self.assertEqual(result.status, Status.OPTIMAL)
        self.assertAlmostEqual(result.value, 1.0)

    def test_against_vertex_oracle(self):
        """
        300 random bounded programs agree with vertex enumeration within 1e-7,
        including the infeasible ones.
        """
        rng = np.random.default_rng(2024)
        for _ in range(300):
            lp = random_program(rng)
            expected = vertex_oracle(lp)
            result = solve(lp)
            if expected is None:
                self.assertEqual(result.status, Status.INFEASIBLE)
                continue
            self.assertEqual(result.status, Status.OPTIMAL)
            self.assertAlmostEqual(result.value, expected, delta=1e-7)
            self.assertAlmostEqual(check_feasible(lp, result.primal, tolerance=1e-7), result.value)

    def test_deterministic_replay(self):
        """
        Solving the same program twice gives the same primal and pivot count.
        """
        rng = np.random.default_rng(7)
        for _ in range(20):
            lp = random_program(rng)
            first, second = solve(lp), solve(lp)
            self.assertEqual(first.status, second.status)
            self.assertEqual(first.iterations, second.iterations)
            np.testing.assert_array_equal(first.primal, second.primal)


class CheckFeasibleTestCase(SimpleTestCase):
    """
    Test suite for certifying candidate points.
    """

    def setUp(self):
        """
        max x1 + x2 with x1 + 2 x2 <= 2 over [0, 1]^2.
        """
        self.lp = LinearProgram.from_constraints([1, 1], [([1, 2], '<=', 2)], upper=[1, 1])

    def test_origin(self):
        """
        The origin is feasible with objective 0.
        """
        self.assertEqual(check_feasible(self.lp, [0, 0]), 0.0)

    def test_feasible_point(self):
        """
        (1, 0.5) is feasible with objective 1.5.
        """
        self.assertAlmostEqual(check_feasible(self.lp, [1, 0.5]), 1.5)

    def test_bound_violation(self):
        """
        A coordinate above its upper bound names that bound.
        """
        with self.assertRaises(InfeasiblePoint) as ctx:
            check_feasible(self.lp, [1.5, 0])
        self.assertEqual((ctx.exception.kind, ctx.exception.index), ('bound', 0))

    def test_constraint_violation(self):
        """
        (1, 1) breaks the single constraint, index 0.
        """
        with self.assertRaises(InfeasiblePoint) as ctx:
            check_feasible(self.lp, [1, 1])
        self.assertEqual((ctx.exception.kind, ctx.exception.index), ('constraint', 0))

    def test_wrong_length(self):
        """
        Points of the wrong dimension are rejected before any check.
        """
        with self.assertRaises(InvalidProgram):
            check_feasible(self.lp, [0, 0, 0])


class LinearProgramTestCase(SimpleTestCase):
    """
    Test suite for program validation.
    """

    def test_mismatched_rows(self):
        """
        Rows must match the number of variables.
        """
        with self.assertRaises(InvalidProgram):
            LinearProgram(objective=[1, 1], matrix=[[1, 2, 3]], relations=('<=',), rhs=[1], upper=None)

    def test_unknown_relation(self):
        """
        Only <=, = and >= are accepted.
        """
        with self.assertRaises(InvalidProgram):
            LinearProgram.from_constraints([1], [([1], '<', 1)])

    def test_negative_upper_bound(self):
        """
        An upper bound below the zero lower bound is invalid.
        """
        with self.assertRaises(InvalidProgram):
            LinearProgram.from_constraints([1], [], upper=[-1])
