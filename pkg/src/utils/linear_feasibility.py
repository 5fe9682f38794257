"""
Strict linear feasibility via scipy's linprog.

A system of strict homogeneous inequalities ``A x < 0`` is decided by maximizing a
common slack ``s`` subject to ``A x + s <= 0`` inside a bounding box. Because the
system is homogeneous, it is strictly feasible exactly when the optimal slack is
positive; we require it to reach ``margin``.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

logger = logging.getLogger(__name__)


@dataclass
class StrictSystem:
    """
    Rows of strict inequalities ``sum(coef * x[var]) < 0`` over ``n_vars`` variables.

    Variables may carry their own box bounds; unbounded variables default to
    ``[-box, box]``.
    """
    n_vars: int
    rows: List[List[Tuple[int, float]]]
    bounds: List[Tuple[float, float]]

    @classmethod
    def create(cls, n_vars: int, box: float = 10.0,
               bounds: Optional[Sequence[Tuple[float, float]]] = None) -> 'StrictSystem':
        return cls(n_vars, [], list(bounds) if bounds is not None else [(-box, box)] * n_vars)

    def less(self, lhs: Sequence[Tuple[int, float]], rhs: Sequence[Tuple[int, float]]):
        """Add ``lhs < rhs`` where both sides are sparse (variable, coefficient) sums."""
        row = {}
        for var, coef in lhs:
            row[var] = row.get(var, 0.0) + coef
        for var, coef in rhs:
            row[var] = row.get(var, 0.0) - coef
        self.rows.append([(var, coef) for var, coef in row.items() if coef != 0.0])

    def matrix(self) -> np.ndarray:
        a = np.zeros((len(self.rows), self.n_vars))
        for r, row in enumerate(self.rows):
            for var, coef in row:
                a[r, var] += coef
        return a

    def violations(self, x: np.ndarray) -> int:
        """Number of rows not strictly satisfied by x."""
        if not self.rows:
            return 0
        return int(np.count_nonzero(self.matrix() @ x >= 0.0))


@dataclass
class SlackSolution:
    feasible: bool
    slack: float
    x: Optional[np.ndarray]


def max_slack(system: StrictSystem, margin: float = 1e-6, objective: Optional[np.ndarray] = None,
              min_slack: Optional[float] = None) -> SlackSolution:
    """
    Maximize the common slack of a strict system.

    Args:
        system: the inequalities
        margin: slack a solution must reach to count as strictly feasible
        objective: optional extra direction; when given, the slack is fixed to at
            least ``min_slack`` and ``objective @ x`` is minimized instead
        min_slack: lower bound on the slack used with ``objective``

    Returns:
        SlackSolution with the optimal point (without the slack column)
    """
    n = system.n_vars
    a = system.matrix()
    if a.shape[0] == 0:
        return SlackSolution(True, float('inf'), np.zeros(n))

    a_ub = np.hstack([a, np.ones((a.shape[0], 1))])
    b_ub = np.zeros(a.shape[0])
    bounds = list(system.bounds)

    if objective is None:
        c = np.zeros(n + 1)
        c[-1] = -1.0
        bounds.append((None, 1.0))
    else:
        c = np.append(np.asarray(objective, dtype=float), 0.0)
        bounds.append((min_slack if min_slack is not None else margin, 1.0))

    result = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method='highs')
    if result.status != 0 or result.x is None:
        logger.debug(f"linprog status {result.status}: {result.message}")
        return SlackSolution(False, float('-inf'), None)

    slack = float(result.x[-1])
    return SlackSolution(slack >= margin, slack, result.x[:-1])
