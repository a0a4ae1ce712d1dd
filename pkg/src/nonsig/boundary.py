"""Numerical boundary scans: extremal mutual information at fixed CHSH score.

The optimizer works in correlator space, where normalization and the
non-signaling marginals hold identically.  For a target score s it fixes the
canonical CHSH expression to s by parametrizing that affine subspace
directly, keeps the other seven signed expressions at or below s (so the
relabeling-maximized score is exactly s), and enforces the 16 positivity
facets through a quadratic penalty with geometric growth.  The inner solver
is gradient descent with Armijo backtracking (spectral trial steps), run on
all restarts at once as one batched array program; the entropy kink at p = 0
is softened on a schedule so iterates can slide along positivity facets, and
every reported value is re-evaluated exactly after an exact feasibility
repair.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .behavior import (
    CHSH_SLOT_SIGNS,
    Behavior,
    BehaviorError,
    Correlators,
    OUTCOME_VALUES,
    correlator_table,
    validate,
)

TSIRELSON = 2.0 * np.sqrt(2.0)

#: Probability floor used inside entropy *gradients* only; values use exact 0 log 0 = 0.
GRAD_FLOOR = 1e-12

_MU_SCHEDULE = (10.0, 1e2, 1e3, 1e4, 1e5, 1e6)
_INNER_ITERS = (60, 60, 80, 80, 100, 120)
_GTOLS = (1e-4, 3e-5, 1e-5, 3e-6, 1e-6, 3e-7)
#: Softening width of the entropy kink at p = 0, by stage.  The subproblems
#: stay smooth while iterates slide along positivity facets; the final stages
#: approach the exact kinked objective and the reported values are always
#: re-evaluated exactly.
_EPS_SCHEDULE = (1e-2, 3e-3, 1e-3, 1e-4, 1e-6, 1e-9)
_POLISH_OUTERS = 3  # warm-started solves rerun only the stiff tail of the schedule

_LOG2E = 1.0 / np.log(2.0)


class FeasibleSet(Enum):
    NS = "ns"
    SYM = "sym"
    C = "c"


class ScanMode(Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class ScanConfig:
    """Grid scan configuration; ``qtilde_cap`` adds the four arcsin facets."""

    set: FeasibleSet
    mode: ScanMode
    s_lo: float
    s_hi: float
    grid_points: int
    restarts: int = 50
    tol: float = 1e-8
    seed: int = 0
    qtilde_cap: bool = False

    def __post_init__(self):
        if not self.s_lo < self.s_hi:
            raise BehaviorError("scan needs s_lo < s_hi")
        if self.grid_points < 2:
            raise BehaviorError("scan needs at least 2 grid points")
        _check_s_range(self.s_lo, self.qtilde_cap)
        _check_s_range(self.s_hi, self.qtilde_cap)


@dataclass(frozen=True)
class ScanPoint:
    s: float
    i: float
    argopt: Correlators
    converged: bool


@dataclass(frozen=True)
class BoundaryCurve:
    points: tuple[ScanPoint, ...]
    config: ScanConfig

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def i(self) -> np.ndarray:
        return np.array([p.i for p in self.points])

    def argopt_vectors(self) -> np.ndarray:
        return np.array([p.argopt.vector() for p in self.points])


@dataclass(frozen=True)
class OptResult:
    i: float
    argopt: Correlators
    converged: bool


def _check_s_range(s: float, qtilde_cap: bool) -> None:
    hi = TSIRELSON if qtilde_cap else 4.0
    if not -1e-12 <= s <= hi + 1e-12:
        raise BehaviorError(f"S = {s} is infeasible for this set (range [0, {hi}])")


# ---------------------------------------------------------------------------
# problem geometry


def _embedding(set_: FeasibleSet) -> np.ndarray:
    """Map from free coordinates to the full 8-vector [A0,A1,B0,B1,C00,C01,C10,C11]."""
    if set_ is FeasibleSet.NS:
        return np.eye(8)
    if set_ is FeasibleSet.SYM:
        e = np.zeros((8, 5))
        e[0, 0] = e[2, 0] = 1.0  # A0 = B0
        e[1, 1] = e[3, 1] = 1.0  # A1 = B1
        e[4, 2] = 1.0            # C00
        e[5, 3] = e[6, 3] = 1.0  # C01 = C10
        e[7, 4] = 1.0            # C11
        return e
    e = np.zeros((8, 4))
    e[4:, :] = np.eye(4)
    return e


def _positivity_matrix() -> np.ndarray:
    """p_j = (1 + M_j . x) / 4 for the 16 outcomes, rows ordered (x, y, a, b)."""
    m = np.zeros((16, 8))
    j = 0
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    av, bv = OUTCOME_VALUES[a], OUTCOME_VALUES[b]
                    m[j, x] = av
                    m[j, 2 + y] = bv
                    m[j, 4 + 2 * x + y] = av * bv
                    j += 1
    return m


_POS_M = _positivity_matrix()
_SLOT_W = np.zeros((8, 8))
_SLOT_W[:, 4:] = CHSH_SLOT_SIGNS.reshape(8, 4)


def _null_basis(w: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to w, shape (d, d-1)."""
    _, _, vt = np.linalg.svd(w[None, :])
    return vt[1:].T


@dataclass(frozen=True)
class _Job:
    set: FeasibleSet
    mode: ScanMode
    s: float
    qtilde_cap: bool
    emb: np.ndarray       # (8, d)
    pinv: np.ndarray      # (d, 8)
    null: np.ndarray      # (d, d-1)
    anchor_v: np.ndarray  # (d,)
    anchor_x: np.ndarray  # (8,)
    ca: np.ndarray        # (23,) anchor slacks: 16 positivity then 7 dominance
    az: np.ndarray        # (23, d-1) slack jacobian in z-coordinates
    sigma: float          # +1 minimizes I, -1 maximizes


def _make_job(set_: FeasibleSet, mode: ScanMode, s: float, qtilde_cap: bool) -> _Job:
    _check_s_range(s, qtilde_cap)
    if qtilde_cap and set_ is not FeasibleSet.C:
        raise BehaviorError("the arcsin cap is implemented on the correlation space only")
    emb = _embedding(set_)
    pinv = np.linalg.pinv(emb)
    w_v = emb.T @ _SLOT_W[0]
    null = _null_basis(w_v)
    anchor_x = np.array([0.0, 0.0, 0.0, 0.0, s / 4.0, s / 4.0, s / 4.0, -s / 4.0])
    anchor_v = pinv @ anchor_x
    # slack c(z) = ca + az @ z stays affine in the reduced coordinates
    lift = emb @ null  # (8, d-1), z -> x displacement
    ca = np.concatenate([0.25 * (1.0 + anchor_x @ _POS_M.T), s - anchor_x @ _SLOT_W[1:].T])
    az = np.concatenate([0.25 * _POS_M @ lift, -_SLOT_W[1:] @ lift])
    return _Job(
        set=set_,
        mode=mode,
        s=float(s),
        qtilde_cap=qtilde_cap,
        emb=emb,
        pinv=pinv,
        null=null,
        anchor_v=anchor_v,
        anchor_x=anchor_x,
        ca=ca,
        az=az,
        sigma=1.0 if mode is ScanMode.MIN else -1.0,
    )


# ---------------------------------------------------------------------------
# objective and penalty


def _plogp_clip(p: np.ndarray) -> np.ndarray:
    q = np.clip(p, 0.0, None)
    return q * np.log2(q + 1e-300)


def _info_from_x(x: np.ndarray) -> np.ndarray:
    """Mutual information for batched correlator 8-vectors (exact value)."""
    p16 = 0.25 * (1.0 + x @ _POS_M.T)
    joint = 0.25 * _plogp_clip(p16).sum(axis=-1)
    pa = 0.5 * (1.0 + x[..., :2, None] * OUTCOME_VALUES)   # (..., x, a)
    pb = 0.5 * (1.0 + x[..., 2:4, None] * OUTCOME_VALUES)  # (..., y, b)
    return joint - 0.5 * _plogp_clip(pa).sum(axis=(-1, -2)) - 0.5 * _plogp_clip(pb).sum(axis=(-1, -2))


def _entropy_slope(p: np.ndarray) -> np.ndarray:
    """d(p log2 p)/dp, consistent with the clipped value: zero where p <= 0,
    log floored at GRAD_FLOOR on the feasible side."""
    return np.where(p > 0.0, np.log2(np.clip(p, GRAD_FLOOR, None)) + _LOG2E, 0.0)


def info_gradient(x) -> np.ndarray:
    """Analytic gradient of the mutual information with respect to the 8 correlators.

    Matches central finite differences at interior points; probabilities are
    floored at ``GRAD_FLOOR`` inside the logarithms.
    """
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    xb = np.atleast_2d(x)
    p16 = 0.25 * (1.0 + xb @ _POS_M.T)
    grad = (_entropy_slope(p16) @ _POS_M) / 16.0
    pa = 0.5 * (1.0 + xb[:, :2, None] * OUTCOME_VALUES)
    pb = 0.5 * (1.0 + xb[:, 2:4, None] * OUTCOME_VALUES)
    grad[:, :2] -= 0.25 * (_entropy_slope(pa) * OUTCOME_VALUES).sum(axis=-1)
    grad[:, 2:4] -= 0.25 * (_entropy_slope(pb) * OUTCOME_VALUES).sum(axis=-1)
    return grad[0] if squeeze else grad


def _qtilde_exprs(c4: np.ndarray) -> np.ndarray:
    t = np.arcsin(np.clip(c4, -1.0, 1.0))
    return t.sum(axis=-1, keepdims=True) - 2.0 * t


def _arcsin_slope(c4: np.ndarray) -> np.ndarray:
    # consistent with the clipped arcsin: flat outside the cube
    inside = np.abs(c4) < 1.0
    return np.where(inside, 1.0 / np.sqrt(np.clip(1.0 - c4**2, 1e-12, None)), 0.0)


def _soft_plogp(p: np.ndarray, eps: float) -> np.ndarray:
    """p log2 p with the kink at p = 0 rounded over a width ~eps."""
    q = 0.5 * (p + np.sqrt(p * p + eps * eps))
    return q * np.log2(q + 1e-300)


def _soft_slope(p: np.ndarray, eps: float) -> np.ndarray:
    q = 0.5 * (p + np.sqrt(p * p + eps * eps))
    dq = 0.5 * (1.0 + p / np.sqrt(p * p + eps * eps))
    return (np.log2(np.clip(q, GRAD_FLOOR, None)) + _LOG2E) * dq


def _soft_info(x: np.ndarray, eps: float) -> np.ndarray:
    p16 = 0.25 * (1.0 + x @ _POS_M.T)
    joint = 0.25 * _soft_plogp(p16, eps).sum(axis=-1)
    pa = 0.5 * (1.0 + x[..., :2, None] * OUTCOME_VALUES)
    pb = 0.5 * (1.0 + x[..., 2:4, None] * OUTCOME_VALUES)
    return (
        joint
        - 0.5 * _soft_plogp(pa, eps).sum(axis=(-1, -2))
        - 0.5 * _soft_plogp(pb, eps).sum(axis=(-1, -2))
    )


def _penalty_value(job: _Job, z: np.ndarray, mu: float, eps: float) -> np.ndarray:
    x = _x_from_z(job, z)
    f = job.sigma * _soft_info(x, eps)
    p16 = 0.25 * (1.0 + x @ _POS_M.T)
    f += mu * (np.clip(-p16, 0.0, None) ** 2).sum(axis=-1)
    slots = x @ _SLOT_W[1:].T
    f += mu * (np.clip(slots - job.s, 0.0, None) ** 2).sum(axis=-1)
    if job.qtilde_cap:
        e = _qtilde_exprs(x[..., 4:])
        f += mu * (np.clip(np.abs(e) - np.pi, 0.0, None) ** 2).sum(axis=-1)
    return f


def _penalty_value_grad(job: _Job, z: np.ndarray, mu: float, eps: float):
    x = _x_from_z(job, z)
    p16 = 0.25 * (1.0 + x @ _POS_M.T)

    joint = 0.25 * _soft_plogp(p16, eps).sum(axis=-1)
    pa = 0.5 * (1.0 + x[:, :2, None] * OUTCOME_VALUES)
    pb = 0.5 * (1.0 + x[:, 2:4, None] * OUTCOME_VALUES)
    info = (
        joint
        - 0.5 * _soft_plogp(pa, eps).sum(axis=(-1, -2))
        - 0.5 * _soft_plogp(pb, eps).sum(axis=(-1, -2))
    )

    gx = (_soft_slope(p16, eps) @ _POS_M) / 16.0
    gx[:, :2] -= 0.25 * (_soft_slope(pa, eps) * OUTCOME_VALUES).sum(axis=-1)
    gx[:, 2:4] -= 0.25 * (_soft_slope(pb, eps) * OUTCOME_VALUES).sum(axis=-1)
    gx *= job.sigma
    f = job.sigma * info

    viol_p = np.clip(-p16, 0.0, None)
    f += mu * (viol_p**2).sum(axis=-1)
    gx -= (0.5 * mu) * (viol_p @ _POS_M)

    slots = x @ _SLOT_W[1:].T
    viol_s = np.clip(slots - job.s, 0.0, None)
    f += mu * (viol_s**2).sum(axis=-1)
    gx += (2.0 * mu) * (viol_s @ _SLOT_W[1:])

    if job.qtilde_cap:
        c4 = x[:, 4:]
        e = _qtilde_exprs(c4)
        up = np.clip(e - np.pi, 0.0, None)
        dn = np.clip(-e - np.pi, 0.0, None)
        f += mu * (up**2 + dn**2).sum(axis=-1)
        u = up - dn
        gt = 2.0 * (u.sum(axis=-1, keepdims=True) - 2.0 * u)
        gx[:, 4:] += mu * gt * _arcsin_slope(c4)

    gz = (gx @ job.emb) @ job.null
    return f, gz


# ---------------------------------------------------------------------------
# inner solver


def _project_arcsin_facet(job: _Job, z: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Drop the gradient component that pushes across an active arcsin facet.

    The facet is curved, so at large mu a raw step into it gets rejected down
    to microscopic lengths and tangential progress dies with it.  Projecting
    the gradient keeps rows sliding along the facet; the normal drift is
    handled by the penalty equilibrium and the final repair.
    """
    x = _x_from_z(job, z)
    c4 = x[:, 4:]
    e = _qtilde_exprs(c4)
    worst = np.argmax(np.abs(e), axis=1)
    rows = np.arange(len(z))
    active = np.abs(e[rows, worst]) >= np.pi - 1e-6
    if not active.any():
        return grad
    sign = np.sign(e[rows, worst])
    coeff = np.ones((len(z), 4))
    coeff[rows, worst] = -1.0
    gx = np.zeros((len(z), 8))
    gx[:, 4:] = sign[:, None] * coeff * _arcsin_slope(c4)
    gn = (gx @ job.emb) @ job.null
    norms = np.linalg.norm(gn, axis=1)
    dots = (grad * gn).sum(axis=1)
    mask = active & (dots < 0.0) & (norms > 1e-12)
    if mask.any():
        grad = grad.copy()
        grad[mask] -= (dots[mask] / norms[mask] ** 2)[:, None] * gn[mask]
    return grad


def _gradient_descent(
    job: _Job, z: np.ndarray, alpha: np.ndarray, mu: float, eps: float, max_iter: int, gtol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Armijo-backtracked gradient descent on the penalty, batched over rows.

    A row is done when its gradient norm drops below ``gtol`` or its value
    stalls (no measurable progress over a 15-iteration window, the realistic
    endpoint on the stiff boundary-hugging subproblems).  Rows whose line
    search collapses are frozen.  Step sizes persist across calls through
    ``alpha``.
    """
    r = z.shape[0]
    stuck = np.zeros(r, dtype=bool)
    stalled = np.zeros(r, dtype=bool)
    f, grad = _penalty_value_grad(job, z, mu, eps)
    if job.qtilde_cap:
        grad = _project_arcsin_facet(job, z, grad)
    z_prev = z.copy()
    g_prev = grad.copy()
    f_mark = f.copy()
    for it in range(max_iter):
        gn2 = (grad * grad).sum(axis=1)
        small_grad = gn2 <= gtol * gtol
        active = ~small_grad & ~stuck & ~stalled
        if not active.any():
            break
        idx = np.flatnonzero(active)
        remaining = idx.copy()
        for _trial in range(30):
            if remaining.size == 0:
                break
            cand = z[remaining] - alpha[remaining, None] * grad[remaining]
            fc = _penalty_value(job, cand, mu, eps)
            ok = fc <= f[remaining] - 1e-4 * alpha[remaining] * gn2[remaining]
            good = remaining[ok]
            z[good] = cand[ok]
            f[good] = fc[ok]
            alpha[remaining[~ok]] *= 0.5
            remaining = remaining[~ok]
        stuck[remaining] = True
        moved = np.setdiff1d(idx, remaining, assume_unique=True)
        if moved.size:
            f, grad_new = _penalty_value_grad(job, z, mu, eps)
            if job.qtilde_cap:
                grad_new = _project_arcsin_facet(job, z, grad_new)
            # spectral (Barzilai-Borwein) trial step for the next line search
            dz = z[moved] - z_prev[moved]
            dg = grad_new[moved] - g_prev[moved]
            denom = (dg * dg).sum(axis=1)
            num = (dz * dg).sum(axis=1)
            bb = np.divide(num, denom, out=alpha[moved].copy(), where=denom > 1e-300)
            alpha[moved] = np.clip(np.abs(bb), 1e-8, 1.0)
            z_prev[moved] = z[moved]
            g_prev[moved] = grad_new[moved]
            grad = grad_new
        if (it + 1) % 15 == 0:
            stalled |= (f_mark - f) <= 5e-12 * (1.0 + np.abs(f))
            f_mark = f.copy()
    gn2 = (grad * grad).sum(axis=1)
    return z, (gn2 <= gtol * gtol) | stalled, f


def _solve(job: _Job, z0: np.ndarray, outers: int = len(_MU_SCHEDULE), tol: float = 1e-8):
    """Run the penalty schedule (last ``outers`` stages) from stacked starts.

    Returns the solved iterates stacked on top of the untouched starts (a
    start can beat its own descendant when the softened early stages walk off
    an exact corner optimum), with matching convergence flags.  ``tol`` is the
    final-stage progress threshold below which a point counts as converged.
    """
    z = np.array(z0, dtype=float)
    met = np.zeros(z.shape[0], dtype=bool)
    alpha = np.full(z.shape[0], 0.05)
    f_prev = None
    for k in range(len(_MU_SCHEDULE) - outers, len(_MU_SCHEDULE)):
        np.clip(alpha, 1e-6, None, out=alpha)
        z, met, f = _gradient_descent(
            job, z, alpha, _MU_SCHEDULE[k], _EPS_SCHEDULE[k], _INNER_ITERS[k],
            max(_GTOLS[k], tol),
        )
        if k == len(_MU_SCHEDULE) - 1 and f_prev is not None:
            # a final stage that barely moved the value is converged in practice
            met |= np.abs(f_prev - f) <= tol * (1.0 + np.abs(f))
        f_prev = f
    return np.concatenate([z, z0]), np.concatenate([met, met])


# ---------------------------------------------------------------------------
# feasibility: starts and repair


def _x_from_z(job: _Job, z: np.ndarray) -> np.ndarray:
    return (job.anchor_v + z @ job.null.T) @ job.emb.T


def _shrink_lambda(job: _Job, z: np.ndarray, margin: float) -> np.ndarray:
    """Largest scaling of z (toward the anchor at z = 0) keeping the linear facets.

    Slacks are affine in z, so the bound is exact; each facet is kept at
    >= margin * (its anchor slack).
    """
    slack_move = z @ job.az.T  # (r, 23), slack(lam*z) = ca + lam*slack_move
    budget = (1.0 - margin) * job.ca
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_j = np.where(slack_move < -1e-13, budget / (-slack_move), np.inf)
    lam = np.minimum(1.0, lam_j.min(axis=-1))
    return np.clip(lam, 0.0, 1.0)


def _project_active(job: _Job, z: np.ndarray) -> np.ndarray:
    """Cyclic projection onto the facets the anchor itself sits on.

    Where the anchor slack is zero, shrinking toward it cannot repair a
    violation; the violating component must be projected out instead (this
    happens at the edges of the score range, where the anchor is extremal).
    """
    active = job.ca <= 1e-12
    if not active.any():
        return z
    rows = job.az[active]
    norms2 = (rows * rows).sum(axis=1)
    keep = norms2 > 1e-20
    rows, norms2 = rows[keep], norms2[keep]
    if not len(rows):
        return z
    for _ in range(12):
        viol = z @ rows.T
        if viol.min() >= -1e-14:
            break
        jmin = viol.argmin(axis=1)
        amount = np.clip(-viol[np.arange(len(z)), jmin], 0.0, None) / norms2[jmin]
        z = z + amount[:, None] * rows[jmin]
    return z


def _qtilde_lambda(job: _Job, z: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Shrink further until the arcsin facets hold; bisection on the scaling."""

    def margin_at(l: np.ndarray) -> np.ndarray:
        x = _x_from_z(job, l[:, None] * z)
        return np.pi - np.abs(_qtilde_exprs(x[:, 4:])).max(axis=-1)

    ok = margin_at(lam) >= -1e-12
    lo = np.where(ok, lam, 0.0)
    hi = lam.copy()
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        good = margin_at(mid) >= -1e-12
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    return np.where(ok, lam, lo)


def _repair(job: _Job, z: np.ndarray) -> np.ndarray:
    """Pull iterates back inside the feasible set, exactly, preserving the score."""
    z = _project_active(job, z)
    lam = _shrink_lambda(job, z, margin=0.0)
    if job.qtilde_cap:
        lam = _qtilde_lambda(job, z, lam)
    return _x_from_z(job, lam[:, None] * z)


def _random_starts(job: _Job, n: int, rng: np.random.Generator) -> np.ndarray:
    """Spread starts inside the feasible slice: random directions from the
    anchor, stepped a random fraction of the distance to the nearest facet."""
    dz = job.null.shape[1]
    u = rng.standard_normal((n, dz))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    active = job.ca <= 1e-12
    if active.any():
        # anchor sits on a facet (score at the edge of its range); sample
        # inside the tangent cone instead of bouncing off immediately
        basis = _null_basis_rows(job.az[active])
        u = u @ basis @ basis.T if basis.shape[1] else np.zeros_like(u)
        norms = np.linalg.norm(u, axis=1, keepdims=True)
        u = np.divide(u, norms, out=np.zeros_like(u), where=norms > 1e-12)
    slope = u @ job.az.T
    with np.errstate(divide="ignore", invalid="ignore"):
        t_j = np.where(slope < -1e-12, job.ca / (-slope), np.inf)
    t_max = np.minimum(t_j.min(axis=-1), 8.0)
    beta = rng.uniform(0.2, 0.95, size=n)
    z0 = (beta * t_max)[:, None] * u
    if job.qtilde_cap:
        lam = _qtilde_lambda(job, z0, np.ones(n))
        z0 *= lam[:, None]
    return z0


def _null_basis_rows(rows: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the joint null space of the given row vectors."""
    _, sv, vt = np.linalg.svd(rows)
    rank = int((sv > 1e-10).sum())
    return vt[rank:].T


def _z_from_vector(job: _Job, vec8: np.ndarray) -> np.ndarray:
    """Project an 8-correlator vector into a feasible z start for this job."""
    v = job.pinv @ vec8
    z = ((v - job.anchor_v) @ job.null)[None, :]
    z = _project_active(job, z)
    lam = _shrink_lambda(job, z, margin=0.0)
    if job.qtilde_cap:
        lam = _qtilde_lambda(job, z, lam)
    return lam[:, None] * z


def _product_starts(job: _Job) -> list[np.ndarray]:
    """Exact product behaviors with score s, added to MIN starts for s <= 2.

    Plain descent cannot carve the last digits into these deterministic-margin
    corners, and they are ordinary feasible points of the slice.
    """
    if job.mode is not ScanMode.MIN or job.s > 2.0 + 1e-12:
        return []
    s = job.s
    out = []
    if job.set in (FeasibleSet.NS, FeasibleSet.SYM):
        if s <= 1.0:
            q = np.sqrt(s)
            a = np.array([q, 0.0])
        else:
            q = 1.0 - np.sqrt(2.0 - s)
            a = np.array([1.0, q])
        out.append(np.concatenate([a, a, np.outer(a, a).ravel()]))
    if job.set is FeasibleSet.NS:
        a = np.array([1.0, 1.0])
        b = np.array([s / 2.0, 0.0])
        out.append(np.concatenate([a, b, np.outer(a, b).ravel()]))
        out.append(np.concatenate([b, a, np.outer(b, a).ravel()]))
    return out


def _finish(job: _Job, z: np.ndarray, met: np.ndarray) -> tuple[float, np.ndarray, bool]:
    """Repair all rows, evaluate exactly, return the best (i, x, converged)."""
    x = _repair(job, z)
    vals = _info_from_x(x)
    best = int(np.argmin(job.sigma * vals))
    return float(vals[best]), x[best], bool(met[best])


# ---------------------------------------------------------------------------
# public entry points


def optimize_at_s(
    set_: FeasibleSet | str,
    mode: ScanMode | str,
    s: float,
    restarts: int = 50,
    seed: int = 0,
    *,
    qtilde_cap: bool = False,
    extra_starts: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    tol: float = 1e-8,
) -> OptResult:
    """Extremize the mutual information at CHSH score exactly s.

    Multi-start local search; deterministic given ``seed``.  ``extra_starts``
    may carry warm-start correlator 8-vectors, which are projected onto the
    feasible slice before use.
    """
    set_ = FeasibleSet(set_) if isinstance(set_, str) else set_
    mode = ScanMode(mode) if isinstance(mode, str) else mode
    if restarts < 1:
        raise BehaviorError("need at least one restart")
    job = _make_job(set_, mode, s, qtilde_cap)
    if rng is None:
        rng = np.random.default_rng([seed])
    z0 = _starts(job, restarts, rng, extra_starts)
    z, met = _solve(job, z0, tol=tol)
    i, x, converged = _finish(job, z, met)
    return OptResult(i=i, argopt=Correlators.from_vector(x), converged=converged)


def _starts(job: _Job, restarts: int, rng: np.random.Generator, extra_starts=None) -> np.ndarray:
    blocks = [_random_starts(job, restarts, rng)]
    for vec in _product_starts(job):
        blocks.append(_z_from_vector(job, vec))
    if extra_starts is not None:
        blocks.extend(
            _z_from_vector(job, np.asarray(v, dtype=float)) for v in np.atleast_2d(extra_starts)
        )
    return np.concatenate(blocks)


def _polish(job: _Job, vec8: np.ndarray, tol: float = 1e-8) -> tuple[float, np.ndarray, bool]:
    z0 = _z_from_vector(job, vec8)
    z, met = _solve(job, z0, outers=_POLISH_OUTERS, tol=tol)
    return _finish(job, z, met)


def _candidate_value(job: _Job, vec8: np.ndarray) -> float:
    z = _z_from_vector(job, vec8)
    return float(_info_from_x(_repair(job, z))[0])


def _scan_grid(config: ScanConfig) -> np.ndarray:
    return np.linspace(config.s_lo, config.s_hi, config.grid_points)


def _scan_chunk(payload) -> list[tuple[int, float, np.ndarray, bool]]:
    cfg, indices = payload
    config = _config_from_tuple(cfg)
    grid = _scan_grid(config)
    out = []
    for idx in indices:
        job = _make_job(config.set, config.mode, float(grid[idx]), config.qtilde_cap)
        rng = np.random.default_rng([config.seed, idx])
        z0 = _starts(job, config.restarts, rng)
        z, met = _solve(job, z0, tol=config.tol)
        i, x, conv = _finish(job, z, met)
        out.append((idx, i, x, conv))
    return out


def _config_tuple(c: ScanConfig):
    return (c.set.value, c.mode.value, c.s_lo, c.s_hi, c.grid_points, c.restarts, c.tol, c.seed, c.qtilde_cap)


def _config_from_tuple(t) -> ScanConfig:
    return ScanConfig(
        set=FeasibleSet(t[0]), mode=ScanMode(t[1]), s_lo=t[2], s_hi=t[3],
        grid_points=t[4], restarts=t[5], tol=t[6], seed=t[7], qtilde_cap=t[8],
    )


def _pool_size() -> int:
    env = os.environ.get("NONSIG_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(os.cpu_count() or 1, 8))


def scan(config: ScanConfig) -> BoundaryCurve:
    """Scan the grid, then sweep warm starts both ways along it.

    Grid points are independent work items (grid-index-seeded RNG streams, so
    the result does not depend on worker scheduling); the two warm-start
    sweeps afterwards are sequential and deterministic.  Per-point failures
    are reported through ``converged=False``, never by aborting the scan.
    """
    grid = _scan_grid(config)
    n = config.grid_points
    workers = _pool_size()
    results: dict[int, tuple[float, np.ndarray, bool]] = {}
    if workers > 1 and n >= 8:
        chunks = [(_config_tuple(config), list(ix)) for ix in np.array_split(np.arange(n), 4 * workers) if len(ix)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_scan_chunk, chunks):
                for idx, i, x, conv in part:
                    results[idx] = (i, x, conv)
    else:
        for idx, i, x, conv in _scan_chunk((_config_tuple(config), list(range(n)))):
            results[idx] = (i, x, conv)

    vals = [results[k] for k in range(n)]
    for order, step in ((range(1, n), 1), (range(n - 2, -1, -1), -1)):
        for idx in order:
            prev_i, prev_x, _ = vals[idx - step]
            cur_i, cur_x, cur_conv = vals[idx]
            job = _make_job(config.set, config.mode, float(grid[idx]), config.qtilde_cap)
            sigma = job.sigma
            if sigma * _candidate_value(job, prev_x) < sigma * cur_i - 1e-9 or not cur_conv:
                i2, x2, conv2 = _polish(job, prev_x, tol=config.tol)
                if sigma * i2 < sigma * cur_i:
                    vals[idx] = (i2, x2, conv2 or cur_conv)

    points = []
    for idx in range(n):
        i, x, conv = vals[idx]
        points.append(
            ScanPoint(s=float(grid[idx]), i=float(i), argopt=Correlators.from_vector(x), converged=bool(conv))
        )
    return BoundaryCurve(points=tuple(points), config=config)


def vertical_fill_check(s: float, n_samples: int = 200, *, seed: int = 0, restarts: int = 20) -> bool:
    """Verify that the vertical segment at score s is filled by behaviors.

    Mixes the minimizing and maximizing behaviors found at s (same canonical
    labeling); every mixture must keep the score at s and the sampled
    information values must cover [i_min, i_max] without gaps beyond the
    sampling resolution.
    """
    lo = optimize_at_s(FeasibleSet.NS, ScanMode.MIN, s, restarts=restarts, seed=seed)
    hi = optimize_at_s(FeasibleSet.NS, ScanMode.MAX, s, restarts=restarts, seed=seed + 1)
    lams = np.linspace(0.0, 1.0, n_samples)
    x_lo, x_hi = lo.argopt.vector(), hi.argopt.vector()
    xs = (1.0 - lams[:, None]) * x_lo + lams[:, None] * x_hi
    from .functionals import _s_max_ab

    smax = _s_max_ab(xs[:, 4:].reshape(-1, 2, 2))
    if np.max(np.abs(smax - s)) > 1e-6:
        return False
    ivals = _info_from_x(xs)
    lo_i, hi_i = min(lo.i, hi.i), max(lo.i, hi.i)
    if ivals.min() < lo_i - 1e-6 or ivals.max() > hi_i + 1e-6:
        return False
    span = hi_i - lo_i
    if span < 1e-9:
        return True
    gap_bound = span * max(6.0, 2.0 * np.log2(n_samples)) / n_samples + 1e-9
    gaps = np.diff(np.sort(ivals))
    covered = (ivals.min() <= lo_i + gap_bound) and (ivals.max() >= hi_i - gap_bound)
    return bool(covered and gaps.max() <= gap_bound)


def argopt_behavior(point: ScanPoint) -> Behavior:
    """Validated behavior for a scan point's optimizer output."""
    return validate(correlator_table(point.argopt), tol=1e-9)
