"""Primal-dual interior-point solver for covering LPs.

Solves

    minimize    c . t
    subject to  A t >= b,   t >= lb

with ``A >= 0`` and ``c >= 0``.  Bounds are absorbed by the shift
``x = t - lb`` and the inequalities by surplus variables ``s = A x - b'``,
giving a standard-form problem in ``(x, s) >= 0`` solved with Mehrotra's
predictor-corrector method on the reduced ``n x n`` normal equations.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import DimensionMismatch, TooLarge

MAX_ITER = 200
TARGET_TOL = 1e-8
REPORT_TOL = 1e-6
DIVERGENCE_LIMIT = 1e12
STAGNATION_WINDOW = 30
_STEP_FRACTION = 0.995


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class LinearProgram:
    A: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    c: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        lb = np.atleast_1d(np.asarray(self.lb, dtype=float))
        c = np.ones(A.shape[1]) if self.c is None else np.atleast_1d(np.asarray(self.c, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "c", c)

    @property
    def shape(self):
        return self.A.shape

    def validate(self):
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise DimensionMismatch(f"b has shape {self.b.shape}, expected ({m},)")
        if self.lb.shape != (n,):
            raise DimensionMismatch(f"lb has shape {self.lb.shape}, expected ({n},)")
        if self.c.shape != (n,):
            raise DimensionMismatch(f"c has shape {self.c.shape}, expected ({n},)")
        for name in ("A", "b", "lb", "c"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} must be finite")
        if np.any(self.A < 0):
            raise ValueError("constraint matrix entries must be non-negative")
        if np.any(self.c < 0):
            raise ValueError("objective coefficients must be non-negative")
        if np.any(self.lb < 0):
            raise ValueError("lower bounds must be non-negative")
        return self

    def objective(self, t):
        return float(self.c @ t)

    def is_feasible(self, t, rtol=1e-6, btol=1e-9):
        """Post-hoc certificate, independent of how ``t`` was obtained."""
        slack = rtol * max(float(np.max(np.abs(self.b), initial=0.0)), 1.0)
        return bool(np.all(self.A @ t >= self.b - slack) and np.all(t >= self.lb - btol))


@dataclass
class IterationRecord:
    primal_objective: float
    dual_objective: float
    mu: float
    residuals: tuple


@dataclass
class LpSolution:
    t: np.ndarray
    objective: float
    status: LpStatus
    kkt_residuals: tuple = (math.inf, math.inf, math.inf)
    iterations: int = 0
    duals: np.ndarray = None
    history: list = field(default_factory=list)
    infeasible_rows: tuple = ()

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def _step_length(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def _bounds(A, bs, c, c_lb, x, y):
    """Objective bounds from feasibility-restored copies of the iterates.

    Scaling ``x`` up until ``A x >= b'`` gives a primal feasible point; scaling
    ``y`` down until ``A^T y <= c`` gives a dual feasible point.  Weak duality
    then holds between the two values at every iteration.
    """
    ax = A @ x
    need = bs > 0
    if np.any(need & (ax <= 0)):
        primal = math.inf
    else:
        factor = max(1.0, float(np.max(bs[need] / ax[need], initial=1.0)))
        primal = c_lb + factor * float(c @ x)
    yp = np.maximum(y, 0.0)
    aty = A.T @ yp
    pos = c > 0
    if np.any(~pos & (aty > 0)):
        dual = c_lb
    else:
        ratio = float(np.max(aty[pos] / c[pos], initial=0.0))
        dual = c_lb + float(bs @ yp) / max(1.0, ratio)
    return primal, dual


def _solve_newton(A, x, z, s, y, r_p, r_d, r_xz, r_sy):
    w = y / s
    M = (A.T * w) @ A
    M[np.diag_indices_from(M)] += z / x
    rhs = r_d + r_xz / x + A.T @ (r_sy / s) - A.T @ (w * r_p)
    try:
        dx = cho_solve(cho_factor(M, check_finite=False), rhs, check_finite=False)
    except LinAlgError:
        dx = np.linalg.lstsq(M, rhs, rcond=None)[0]
    dy = w * (-r_p - A @ dx) + r_sy / s
    ds = (r_sy - s * dy) / y
    dz = (r_xz - z * dx) / x
    return dx, ds, dy, dz


def solve(lp: LinearProgram, max_iter=MAX_ITER, tol=TARGET_TOL) -> LpSolution:
    """Solve a covering LP by the Mehrotra predictor-corrector method."""
    lp.validate()
    A_full, c, lb = lp.A, lp.c, lp.lb
    m_full, n = A_full.shape
    bs_full = lp.b - A_full @ lb
    zero_rows = ~np.any(A_full > 0, axis=1)
    infeasible = np.flatnonzero(zero_rows & (bs_full > 0))
    if len(infeasible):
        return LpSolution(lb.copy(), lp.objective(lb), LpStatus.INFEASIBLE,
                          infeasible_rows=tuple(int(i) for i in infeasible))
    keep = ~zero_rows
    A, bs = A_full[keep], bs_full[keep]
    m = A.shape[0]
    c_lb = float(c @ lb)
    if m == 0:
        return LpSolution(lb.copy(), c_lb, LpStatus.OPTIMAL, (0.0, 0.0, 0.0),
                          duals=np.zeros(m_full))

    x = np.ones(n)
    s = A @ x - bs
    s = np.where(s > 1.0, s, 1.0)
    y = np.ones(m)
    z = np.ones(n)
    b_scale = 1.0 + float(np.max(np.abs(bs)))
    c_scale = 1.0 + float(np.max(np.abs(c)))
    history = []
    best_primal = []
    status = LpStatus.ITERATION_LIMIT
    residuals = (math.inf, math.inf, math.inf)
    it = 0
    for it in range(max_iter + 1):
        r_p = A @ x - s - bs
        r_d = A.T @ y + z - c
        comp = float(x @ z + s @ y)
        mu = comp / (n + m)
        residuals = (
            float(np.max(np.abs(r_p))) / b_scale,
            float(np.max(np.abs(r_d))) / c_scale,
            comp / (1.0 + abs(float(c @ x))),
        )
        primal_obj, dual_obj = _bounds(A, bs, c, c_lb, x, y)
        history.append(IterationRecord(primal_obj, dual_obj, mu, residuals))
        if max(residuals) <= tol:
            status = LpStatus.OPTIMAL
            break
        if abs(float(bs @ y)) > DIVERGENCE_LIMIT or float(np.max(y)) > DIVERGENCE_LIMIT:
            status = LpStatus.INFEASIBLE
            break
        best_primal.append(residuals[0])
        if (len(best_primal) > STAGNATION_WINDOW and residuals[0] > tol
                and min(best_primal[-STAGNATION_WINDOW:]) >= 0.999 * best_primal[-STAGNATION_WINDOW - 1]):
            status = LpStatus.INFEASIBLE
            break
        if it == max_iter:
            break

        # predictor
        dx, ds, dy, dz = _solve_newton(A, x, z, s, y, r_p, r_d, -x * z, -s * y)
        ap = min(_step_length(x, dx), _step_length(s, ds))
        ad = min(_step_length(z, dz), _step_length(y, dy))
        mu_aff = ((x + ap * dx) @ (z + ad * dz) + (s + ap * ds) @ (y + ad * dy)) / (n + m)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        # corrector
        r_xz = -x * z - dx * dz + sigma * mu
        r_sy = -s * y - ds * dy + sigma * mu
        dx, ds, dy, dz = _solve_newton(A, x, z, s, y, r_p, r_d, r_xz, r_sy)
        ap = min(1.0, _STEP_FRACTION * min(_step_length(x, dx), _step_length(s, ds)))
        ad = min(1.0, _STEP_FRACTION * min(_step_length(z, dz), _step_length(y, dy)))
        x = x + ap * dx
        s = s + ap * ds
        y = y + ad * dy
        z = z + ad * dz

    t = lb + np.maximum(x, 0.0)
    duals = np.zeros(m_full)
    duals[keep] = y
    return LpSolution(t, lp.objective(t), status, residuals, it, duals, history)


def vertex_oracle(lp: LinearProgram, max_vars=12, max_constraints=20,
                  max_combinations=2_000_000, chunk=20_000) -> LpSolution:
    """Exact optimum by enumerating every vertex of the feasible region.

    A vertex is the intersection of ``n`` linearly independent hyperplanes
    drawn from the ``m`` constraint rows and ``n`` bounds.  Meant for tests.
    """
    lp.validate()
    m, n = lp.A.shape
    if n > max_vars or m > max_constraints:
        raise TooLarge(f"vertex enumeration capped at {max_vars} vars / "
                       f"{max_constraints} constraints, got {n} / {m}")
    total = math.comb(m + n, n)
    if total > max_combinations:
        raise TooLarge(f"{total} candidate vertices exceed the cap of {max_combinations}")
    G = np.vstack([lp.A, np.eye(n)])
    h = np.concatenate([lp.b, lp.lb])
    scale = max(1.0, float(np.max(np.abs(h))))
    best_t, best_obj = None, math.inf
    combos = itertools.combinations(range(m + n), n)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        Gs, hs = G[block], h[block]
        ok = np.abs(np.linalg.det(Gs)) > 1e-12
        if not np.any(ok):
            continue
        ts = np.linalg.solve(Gs[ok], hs[ok][..., None])[..., 0]
        feasible = (np.all(ts @ lp.A.T >= lp.b - 1e-9 * scale, axis=1)
                    & np.all(ts >= lp.lb - 1e-9 * scale, axis=1))
        if not np.any(feasible):
            continue
        objs = ts[feasible] @ lp.c
        k = int(np.argmin(objs))
        if objs[k] < best_obj:
            best_obj, best_t = float(objs[k]), ts[feasible][k]
    if best_t is None:
        return LpSolution(lp.lb.copy(), lp.objective(lp.lb), LpStatus.INFEASIBLE)
    return LpSolution(best_t, best_obj, LpStatus.OPTIMAL, (0.0, 0.0, 0.0))


def write_lp_text(lp: LinearProgram, path=None):
    """Serialize as ``n_rows n_cols``, A row-major, b, lb (then c if not all ones)."""
    m, n = lp.A.shape
    lines = [f"{m} {n}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in lp.A]
    lines.append(" ".join(repr(float(v)) for v in lp.b))
    lines.append(" ".join(repr(float(v)) for v in lp.lb))
    if not np.all(lp.c == 1.0):
        lines.append(" ".join(repr(float(v)) for v in lp.c))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="ascii")
    return text


def read_lp_text(source) -> LinearProgram:
    """Parse the text format; ``source`` is a path or the text itself."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text(encoding="ascii")
    rows = [line.split() for line in source.splitlines() if line.strip() and not line.startswith("#")]
    m, n = (int(v) for v in rows[0])
    if len(rows) < m + 3:
        raise DimensionMismatch(f"expected {m + 3} data lines, got {len(rows)}")
    A = np.array(rows[1:m + 1], dtype=float).reshape(m, n)
    b = np.array(rows[m + 1], dtype=float)
    lb = np.array(rows[m + 2], dtype=float)
    c = np.array(rows[m + 3], dtype=float) if len(rows) > m + 3 else None
    return LinearProgram(A, b, lb, c).validate()
