"""
Dense two-phase tableau simplex for

    maximize c.x  subject to  a_i.x (<=, =, >=) b_i,  0 <= x <= u

with u_j finite or infinite. Entering variables follow Dantzig's rule
(lowest index on ties) until the objective stalls for 5 * (m + n)
consecutive pivots, after which Bland's rule takes over for the rest of the
phase. Every claimed optimum is re-checked against the original program.
"""
import enum
import logging
from dataclasses import dataclass

import numpy as np

from channel_app.conf import oneshot_setting
from solver_app.exceptions import InfeasiblePoint, InvalidProgram, NumericalFailure

logger = logging.getLogger(__name__)

RELATIONS = ('<=', '=', '>=')

# Entries this small after a pivot are treated as exact zeros
_ROUNDOFF = 1e-13


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """
    A maximisation program over nonnegative variables with per-variable
    upper bounds (np.inf for none).
    """
    objective: np.ndarray
    matrix: np.ndarray
    relations: tuple
    rhs: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        objective = np.asarray(self.objective, dtype=float)
        n = objective.shape[0] if objective.ndim == 1 else -1
        if n < 1:
            raise InvalidProgram("objective must be a nonempty vector")
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.size == 0:
            matrix = matrix.reshape(0, n)
        if matrix.ndim != 2 or matrix.shape[1] != n:
            raise InvalidProgram(f"constraint rows must have {n} coefficients, got shape {matrix.shape}")
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        relations = tuple(self.relations)
        if matrix.shape[0] != rhs.shape[0] or len(relations) != rhs.shape[0]:
            raise InvalidProgram(
                f"{matrix.shape[0]} rows, {len(relations)} relations and {rhs.shape[0]} right-hand sides"
            )
        unknown = set(relations) - set(RELATIONS)
        if unknown:
            raise InvalidProgram(f"unknown relations {sorted(unknown)}")
        upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if upper.shape != (n,) or np.any(upper < 0) or np.any(np.isnan(upper)):
            raise InvalidProgram("upper bounds must be n values >= 0")
        object.__setattr__(self, 'objective', objective)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'rhs', rhs)
        object.__setattr__(self, 'relations', relations)
        object.__setattr__(self, 'upper', upper)

    @classmethod
    def from_constraints(cls, objective, constraints, upper=None):
        """
        Builds a program from (row, relation, rhs) triples.
        """
        rows = [row for row, _, _ in constraints]
        try:
            matrix = np.array(rows, dtype=float) if rows else np.zeros((0, len(objective)))
        except ValueError as exc:
            raise InvalidProgram(f"constraint rows differ in length: {exc}") from exc
        return cls(
            objective=objective,
            matrix=matrix,
            relations=tuple(rel for _, rel, _ in constraints),
            rhs=[b for _, _, b in constraints],
            upper=upper,
        )

    @property
    def n_vars(self):
        return self.objective.shape[0]

    @property
    def n_constraints(self):
        return self.matrix.shape[0]


class Status(enum.Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass(frozen=True, eq=False)
class LPResult:
    status: Status
    value: float
    primal: np.ndarray
    iterations: int


def check_feasible(lp, point, tolerance=1e-9):
    """
    Certifies a hand-constructed point without solving.

    Returns:
        float: the objective at `point`.

    Raises:
        InfeasiblePoint: naming the first violated bound or constraint.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (lp.n_vars,):
        raise InvalidProgram(f"point has shape {point.shape}, expected ({lp.n_vars},)")
    bound_violation = np.maximum(-point, point - lp.upper)
    worst = int(np.argmax(bound_violation))
    if bound_violation[worst] > tolerance:
        raise InfeasiblePoint('bound', worst, float(bound_violation[worst]))
    violation = _constraint_violations(lp, point)
    if violation.size:
        worst = int(np.argmax(violation))
        if violation[worst] > tolerance:
            raise InfeasiblePoint('constraint', worst, float(violation[worst]))
    return float(lp.objective @ point)


def _constraint_violations(lp, point):
    lhs = lp.matrix @ point
    violation = np.zeros(lp.n_constraints)
    for i, relation in enumerate(lp.relations):
        if relation == '<=':
            violation[i] = lhs[i] - lp.rhs[i]
        elif relation == '>=':
            violation[i] = lp.rhs[i] - lhs[i]
        else:
            violation[i] = abs(lhs[i] - lp.rhs[i])
    return violation


class _Tableau:
    """
    Working tableau; the last row holds reduced costs and, in its last
    column, the current objective value.
    """

    def __init__(self, lp, tolerance):
        self.tolerance = tolerance
        rows = [lp.matrix]
        relations = list(lp.relations)
        rhs = [lp.rhs]
        finite = np.flatnonzero(np.isfinite(lp.upper))
        if finite.size:
            bounds = np.zeros((finite.size, lp.n_vars))
            bounds[np.arange(finite.size), finite] = 1.0
            rows.append(bounds)
            relations += ['<='] * finite.size
            rhs.append(lp.upper[finite])
        a = np.vstack(rows)
        b = np.concatenate(rhs)

        flip = b < 0
        a[flip] *= -1
        b[flip] *= -1
        swap = {'<=': '>=', '>=': '<=', '=': '='}
        relations = [swap[rel] if f else rel for rel, f in zip(relations, flip)]

        m, n = a.shape
        n_slack = sum(rel != '=' for rel in relations)
        n_art = sum(rel != '<=' for rel in relations)
        self.n_original = n
        self.n_structural = n + n_slack
        width = n + n_slack + n_art
        table = np.zeros((m + 1, width + 1))
        table[:m, :n] = a
        table[:m, -1] = b
        basis = []
        slack, art = n, n + n_slack
        for i, rel in enumerate(relations):
            if rel == '<=':
                table[i, slack] = 1.0
                basis.append(slack)
                slack += 1
                continue
            if rel == '>=':
                table[i, slack] = -1.0
                slack += 1
            table[i, art] = 1.0
            basis.append(art)
            art += 1
        self.table = table
        self.basis = basis
        self.iterations = 0

    @property
    def m(self):
        return self.table.shape[0] - 1

    def objective_value(self):
        return self.table[-1, -1]

    def pivot(self, row, col):
        table = self.table
        table[row] /= table[row, col]
        column = table[:, col].copy()
        column[row] = 0.0
        table -= np.outer(column, table[row])
        table[np.abs(table) < _ROUNDOFF] = 0.0
        self.basis[row] = col
        self.iterations += 1

    def _leaving_row(self, col):
        entries = self.table[:-1, col]
        candidates = np.flatnonzero(entries > self.tolerance)
        if not candidates.size:
            return None
        ratios = self.table[candidates, -1] / entries[candidates]
        best = ratios.min()
        tied = candidates[ratios <= best + self.tolerance]
        # Bland's leaving rule: smallest basic variable index among ties
        return int(min(tied, key=lambda i: self.basis[i]))

    def run(self, n_columns, max_pivots, phase):
        """
        Pivots until optimal over the first `n_columns` columns.

        Returns:
            bool: False when the program is unbounded in the entering direction.
        """
        stall_limit = 5 * (self.m + n_columns)
        stall = 0
        bland = False
        while True:
            costs = self.table[-1, :n_columns]
            negative = np.flatnonzero(costs < -self.tolerance)
            if not negative.size:
                return True
            col = int(negative[0]) if bland else int(np.argmin(costs))
            row = self._leaving_row(col)
            if row is None:
                return False
            if self.iterations >= max_pivots:
                raise NumericalFailure(f"no optimum after {max_pivots} pivots")
            before = self.objective_value()
            self.pivot(row, col)
            if self.objective_value() > before + self.tolerance:
                stall = 0
            else:
                stall += 1
                if not bland and stall >= stall_limit:
                    logger.debug("phase %d stalled for %d pivots, switching to Bland's rule", phase, stall)
                    bland = True

    def drop_artificials(self):
        """
        Pivots remaining zero-level artificials out of the basis, deletes
        redundant rows, then removes the artificial columns.
        """
        keep_rows = []
        for i in range(self.m):
            if self.basis[i] < self.n_structural:
                keep_rows.append(i)
                continue
            self.table[i, -1] = 0.0
            row = self.table[i, :self.n_structural]
            candidates = np.flatnonzero(np.abs(row) > self.tolerance)
            if candidates.size:
                self.pivot(i, int(candidates[0]))
                keep_rows.append(i)
        self.table = np.vstack([
            self.table[keep_rows][:, list(range(self.n_structural)) + [-1]],
            self.table[-1:, list(range(self.n_structural)) + [-1]],
        ])
        self.basis = [self.basis[i] for i in keep_rows]

    def primal(self):
        values = np.zeros(self.table.shape[1] - 1)
        for i, var in enumerate(self.basis):
            values[var] = self.table[i, -1]
        return values[:self.n_original]


def solve(lp, pivot_tolerance=None, feasibility_tolerance=None, max_pivots=None):
    """
    Solves `lp` with the two-phase method.

    Returns:
        LPResult: status OPTIMAL with a certified primal, or INFEASIBLE /
        UNBOUNDED with an empty primal.

    Raises:
        NumericalFailure: the optimum violates the original constraints by
        more than the feasibility tolerance, or the pivot budget ran out.
    """
    tolerance = oneshot_setting('PIVOT_TOLERANCE', pivot_tolerance)
    feasibility = oneshot_setting('FEASIBILITY_TOLERANCE', feasibility_tolerance)
    max_pivots = oneshot_setting('MAX_PIVOTS', max_pivots)

    tableau = _Tableau(lp, tolerance)
    n_total = tableau.table.shape[1] - 1
    if n_total > tableau.n_structural:
        # Phase 1: maximise minus the sum of artificials
        artificial_rows = [i for i, var in enumerate(tableau.basis) if var >= tableau.n_structural]
        tableau.table[-1] = -tableau.table[artificial_rows].sum(axis=0)
        tableau.table[-1, tableau.n_structural:-1] = 0.0
        tableau.run(n_total, max_pivots, phase=1)
        shortfall = -tableau.objective_value()
        logger.debug("phase 1 finished after %d pivots, infeasibility %.3e", tableau.iterations, shortfall)
        if shortfall > feasibility:
            return LPResult(Status.INFEASIBLE, float('nan'), np.empty(0), tableau.iterations)
        tableau.drop_artificials()

    costs = np.zeros(tableau.n_structural)
    costs[:lp.n_vars] = lp.objective
    objective_row = np.zeros(tableau.table.shape[1])
    objective_row[:tableau.n_structural] = -costs
    for i, var in enumerate(tableau.basis):
        objective_row += costs[var] * tableau.table[i]
    tableau.table[-1] = objective_row

    if not tableau.run(tableau.n_structural, max_pivots, phase=2):
        return LPResult(Status.UNBOUNDED, float('inf'), np.empty(0), tableau.iterations)

    primal = tableau.primal()
    # Bound noise is clipped; constraint residuals are left for certification
    primal[(primal < 0.0) & (primal > -tolerance)] = 0.0
    over = (primal > lp.upper) & (primal < lp.upper + tolerance)
    primal[over] = lp.upper[over]
    if np.any(primal < 0.0) or np.any(primal > lp.upper):
        raise NumericalFailure("optimum violates a variable bound")
    residual = _constraint_violations(lp, primal)
    worst = float(residual.max()) if residual.size else 0.0
    if worst > feasibility:
        raise NumericalFailure(f"optimum violates a constraint by {worst:.3e}")
    logger.debug("optimal after %d pivots", tableau.iterations)
    return LPResult(Status.OPTIMAL, float(lp.objective @ primal), primal, tableau.iterations)
