"""Ground-truth solvers for small instances.

``brute_force_integer_opt`` enumerates {0,1}^n, ``exact_lp`` solves the
relaxed program with HiGHS and returns a checked dual certificate, and
``verify_threshold_theorem`` tests the complementary-slackness structure of
an optimal primal/dual pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalError, PreconditionError, RefusalError
from .lp import DualCertificate, thresholds
from .model import FractionalAllocation, Instance, IntegerAllocation, group_coefficients

MAX_BRUTE_FORCE_N = 22
MAX_EXACT_N = 200
MAX_EXACT_GROUPS = 4
GAP_TOL = 1e-7


def brute_force_integer_opt(instance: Instance, tol: float = 1e-9,
                            chunk: int = 1 << 16) -> tuple[IntegerAllocation, float]:
    """Exact integer optimum by enumeration.

    Vectors are enumerated in lexicographic order (``y_0`` most significant),
    so among tied optima the lexicographically smallest one is returned.
    """
    n = instance.n
    if n > MAX_BRUTE_FORCE_N:
        raise RefusalError(f"n={n} exceeds the enumeration bound {MAX_BRUTE_FORCE_N}")
    value = instance.ctr * instance.value
    cost = instance.ctr * instance.cpc
    gcoef = group_coefficients(instance)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_obj, best_k = -np.inf, 0
    for start in range(0, 1 << n, chunk):
        ks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        Y = ((ks[:, None] >> shifts[None, :]) & 1).astype(float)
        obj = Y @ value
        feas = Y @ cost <= instance.budget + tol
        if instance.n_groups:
            feas &= np.all(Y @ gcoef <= tol, axis=1)
        obj = np.where(feas, obj, -np.inf)
        top = obj.max()
        if top > best_obj + 1e-12 * max(1.0, abs(top)):
            best_obj = top
            best_k = int(ks[np.argmax(obj >= top - 1e-12 * max(1.0, abs(top)))])
    y = (best_k >> shifts) & 1
    return IntegerAllocation(y), float(best_obj)


@dataclass(frozen=True)
class ExactLPResult:
    allocation: FractionalAllocation
    duals: DualCertificate
    objective: float
    dual_objective: float

    @property
    def x(self) -> np.ndarray:
        return self.allocation.x

    @property
    def gap(self) -> float:
        return self.dual_objective - self.objective


def exact_lp(instance: Instance, enforce_size: bool = True) -> ExactLPResult:
    """Solve the relaxed LP and its dual.

    The returned certificate has ``alpha, beta`` from the HiGHS row duals and
    box duals ``delta_i = max(0, ctr_i (v_i - alpha cpc_i - sum_g beta_g (mu_g - g_i)))``,
    so it is dual feasible by construction; the duality gap is then checked.
    """
    n, G = instance.n, instance.n_groups
    if enforce_size and (n > MAX_EXACT_N or G > MAX_EXACT_GROUPS):
        raise RefusalError(f"exact_lp limited to n <= {MAX_EXACT_N}, |G| <= {MAX_EXACT_GROUPS}")
    if n == 0:
        return ExactLPResult(FractionalAllocation(np.zeros(0)),
                             DualCertificate(0.0, np.zeros(G), np.zeros(0)), 0.0, 0.0)
    c = -(instance.ctr * instance.value)
    A_ub = np.vstack([instance.ctr * instance.cpc, group_coefficients(instance).T])
    b_ub = np.concatenate([[instance.budget], np.zeros(G)])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(0.0, 1.0)] * n, method="highs")
    if res.status != 0:
        raise NumericalError(f"HiGHS failed: {res.message}")
    x = np.clip(res.x, 0.0, 1.0)
    # minimizing -c^T x with <= rows: marginals are nonpositive
    row_duals = np.maximum(-np.asarray(res.ineqlin.marginals), 0.0)
    duals = DualCertificate.completing(instance, row_duals[0], row_duals[1:])
    objective = float(-c @ x)
    dual_obj = duals.objective(instance.budget)
    scale = max(1.0, abs(objective))
    if dual_obj - objective > GAP_TOL * scale or objective - dual_obj > GAP_TOL * scale:
        raise NumericalError(
            f"duality gap {dual_obj - objective:.3e} exceeds tolerance at objective {objective}")
    return ExactLPResult(FractionalAllocation(x), duals, objective, dual_obj)


@dataclass(frozen=True)
class ThresholdReport:
    passed: bool
    duality_gap: float
    thresholds: np.ndarray
    zero_violations: list[int]
    one_violations: list[int]
    strict_violations: list[int]
    skipped: list[int]

    @property
    def violations(self) -> list[int]:
        return sorted(set(self.zero_violations + self.one_violations + self.strict_violations))


def verify_threshold_theorem(instance: Instance, primal, duals: DualCertificate,
                             tol: float = 1e-6, gap_tol: float = GAP_TOL) -> ThresholdReport:
    """Check ``x_i = 0 => T_i <= cpc_i`` and ``x_i = 1 => T_i >= cpc_i``.

    Also checks ``T_i > cpc_i`` wherever ``delta_i > tol``.  Queries with
    ``ctr_i = 0`` are skipped.  Raises :class:`RefusalError` when the pair is
    not optimal to within ``gap_tol``.
    """
    x = np.asarray(getattr(primal, "x", primal), dtype=float)
    if duals.alpha <= 0:
        raise PreconditionError("threshold verification needs alpha > 0")
    primal_obj = float((x * instance.ctr) @ instance.value)
    gap = duals.objective(instance.budget) - primal_obj
    if abs(gap) > gap_tol * max(1.0, abs(primal_obj)):
        raise RefusalError(f"primal/dual pair is not optimal: duality gap {gap:.3e}")
    T = thresholds(instance, duals).t
    active = instance.ctr > 0
    cpc = instance.cpc
    zero = active & (x <= tol) & ~(T <= cpc + tol)
    one = active & (x >= 1 - tol) & ~(T >= cpc - tol)
    strict = active & (duals.delta > tol) & ~(T > cpc)
    as_list = lambda mask: [int(i) for i in np.flatnonzero(mask)]
    return ThresholdReport(
        passed=not (zero.any() or one.any() or strict.any()),
        duality_gap=float(gap),
        thresholds=T,
        zero_violations=as_list(zero),
        one_violations=as_list(one),
        strict_violations=as_list(strict),
        skipped=as_list(~active),
    )
