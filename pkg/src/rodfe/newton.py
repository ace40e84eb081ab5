"""Load-incrementing Newton-Raphson driver with iteration statistics and
local quadratic convergence-rate estimation.

The termination criterion is the plain Euclidean norm test
|f(x)|_2 < tol * sqrt(n) over the full unknown vector.  Per increment the
rate r = |x_{m-1} - x_m| / |x_{m-2} - x_m|^2 is estimated from the last
three iterates whenever at least two corrections were made.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    InsufficientHistory,
    NonConvergence,
    SearchExhausted,
    SingularJacobian,
)

# above this size the (banded) Jacobian is factorized sparsely
_DENSE_LIMIT = 700

# residual blow-up guard: declare divergence instead of iterating to the cap
_DIVERGENCE_NORM = 1.0e20


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1.0e-8
    n_increments: int = 1
    max_iterations: int = 30

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.n_increments < 1:
            raise ValueError("need at least one load increment")
        if self.max_iterations < 3:
            raise ValueError("rate estimation needs at least three iterates")


@dataclass(frozen=True)
class IncrementRecord:
    t: float
    iterations: int  # residual evaluations needed to certify convergence
    corrections: int  # linear solves
    residual_norm: float
    rate: float | None


@dataclass
class NewtonReport:
    tolerance: float
    max_iterations: int
    increments: list = field(default_factory=list)

    @property
    def iteration_counts(self):
        return np.array([inc.iterations for inc in self.increments])

    @property
    def rates(self):
        """Defined, strictly positive per-increment rates (zero rates from
        coincident final iterates would break the geometric statistics)."""
        return np.array(
            [inc.rate for inc in self.increments if inc.rate is not None and inc.rate > 0.0]
        )

    def iteration_mean(self):
        return float(np.mean(self.iteration_counts))

    def iteration_std(self):
        return float(np.std(self.iteration_counts))

    def rate_geometric_mean(self):
        r = self.rates
        if r.size == 0:
            return None
        return float(np.exp(np.mean(np.log(r))))

    def rate_geometric_std(self):
        """Geometric standard deviation; 1 means no variance."""
        r = self.rates
        if r.size == 0:
            return None
        return float(np.exp(np.std(np.log(r))))


def convergence_rate(history):
    """Local quadratic rate from the last three stored iterates."""
    if len(history) < 3:
        raise InsufficientHistory(f"need 3 iterates, have {len(history)}")
    x2, x1, x0 = history[-3], history[-2], history[-1]
    num = np.linalg.norm(x1 - x0)
    den = np.linalg.norm(x2 - x0) ** 2
    if den == 0.0:
        raise InsufficientHistory("identical iterates in the rate denominator")
    return float(num / den)


def _solve_linear(J, f):
    n = J.shape[0]
    try:
        if n <= _DENSE_LIMIT:
            return np.linalg.solve(J.toarray() if sp.issparse(J) else J, f)
        with np.errstate(invalid="ignore"):
            lu = spla.splu(sp.csc_matrix(J))
            dx = lu.solve(f)
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("sparse solve produced non-finite update")
        return dx
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise SingularJacobian(str(exc)) from exc


def newton_solve(problem, cfg, x0=None, callback=None):
    """Solve the load-incremented equilibrium problem.

    ``problem`` provides residual(x, t), jacobian(x, t) and n_unknowns.
    The predictor between increments is the previous converged state.
    ``callback(k, t, x, record)`` runs after every converged increment.
    Returns the final state and a NewtonReport.
    """
    x = problem.initial_state() if x0 is None else np.array(x0, dtype=float)
    n = problem.n_unknowns
    threshold = cfg.tolerance * np.sqrt(n)
    report = NewtonReport(tolerance=cfg.tolerance, max_iterations=cfg.max_iterations)

    for k in range(1, cfg.n_increments + 1):
        t = k / cfg.n_increments
        history = [x.copy()]
        evaluations = 0
        converged = False
        res_norm = np.inf
        for _ in range(cfg.max_iterations + 1):
            f = problem.residual(x, t)
            evaluations += 1
            res_norm = float(np.linalg.norm(f))
            if not np.isfinite(res_norm) or res_norm > _DIVERGENCE_NORM:
                raise NonConvergence(k, evaluations, res_norm)
            if res_norm < threshold:
                converged = True
                break
            if evaluations > cfg.max_iterations:
                break
            J = problem.jacobian(x, t)
            x = x - _solve_linear(J, f)
            history.append(x.copy())
            if len(history) > 3:
                history.pop(0)
        if not converged:
            raise NonConvergence(k, evaluations, res_norm)
        try:
            rate = convergence_rate(history)
        except InsufficientHistory:
            rate = None
        record = IncrementRecord(
            t=t,
            iterations=evaluations,
            corrections=evaluations - 1,
            residual_norm=res_norm,
            rate=rate,
        )
        report.increments.append(record)
        if callback is not None:
            callback(k, t, x, record)
    return x, report


def min_increment_search(problem, cfg, cap=4096, start=1, callback=None):
    """Smallest power-of-two increment count for which every increment of
    the Newton continuation converges."""
    n_inc = start
    while n_inc <= cap:
        try:
            newton_solve(
                problem,
                SolverConfig(
                    tolerance=cfg.tolerance,
                    n_increments=n_inc,
                    max_iterations=cfg.max_iterations,
                ),
            )
            return n_inc
        except (NonConvergence, SingularJacobian) as exc:
            if callback is not None:
                callback(n_inc, exc)
            n_inc *= 2
    raise SearchExhausted(f"no convergence up to {cap} increments")
