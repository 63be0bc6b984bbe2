"""Weighted l1 minimization over an l2 ball of measurements.

Solves

    minimize  sum_i w_i |x_i|   subject to  ||phi @ x - u||_2 <= epsilon

with ADMM on the splitting x = y, c phi @ x = z:

* y-step: weighted soft thresholding,
* z-step: projection onto the ball {z : ||z - u|| <= epsilon},
* x-step: the least-squares coupling (I + phi^T phi) x = y - p + phi^T (z - q).

The problem is rescaled to ||u|| = 1 and mean(w) = 1 before iterating
(neither changes the minimizer). Every ``polish_every`` iterations the
support and signs of the iterate are used to solve the optimality
conditions exactly; iteration stops early once that face solution carries
a dual certificate of optimality.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .core import MeasurementInstance
from .exceptions import InfeasibleReference, NotConvergedWarning
from .validation import check_matrix, check_vector, check_weights


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 5000
    tol_primal: float = 1e-7
    tol_dual: float = 1e-7
    step_parameter: float = 1.0
    adaptive_step: bool = False
    polish: bool = True
    polish_every: int = 20

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be positive")
        for name in ("tol_primal", "tol_dual", "step_parameter"):
            value = getattr(self, name)
            if not value > 0 or not np.isfinite(value):
                raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass
class SolverResult:
    xhat: np.ndarray
    objective: float
    feasibility_gap: float
    iterations_used: int
    converged: bool
    polished: bool = False
    merit_history: np.ndarray = field(default=None, repr=False)


def feasibility_tolerance(u):
    """Absolute slack allowed on ||phi @ x - u|| <= epsilon."""
    return max(1e-6, 1e-6 * float(np.linalg.norm(u)))


def optimality_tolerance(objective):
    return 1e-4 * (1.0 + objective)


def weighted_l1(x, w):
    return float(np.sum(w * np.abs(x)))


def soft_threshold(v, thresholds):
    """Proximal map of the weighted l1 norm, sign(v) * max(|v| - t, 0)."""
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - thresholds, 0.0)


def project_l2_ball(z, center, radius):
    """Euclidean projection of z onto {y : ||y - center||_2 <= radius}."""
    z = np.asarray(z, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    diff = z - center
    norm = np.linalg.norm(diff)
    if norm <= radius:
        return z.copy()
    return center + diff * (radius / norm)


class Workspace:
    """Per-matrix data reused across solves on the same phi.

    The measurement block of the splitting is rescaled by ``block_scale`` so
    that its smallest nonzero singular value is 1; the constraint
    ``||c phi x - c u|| <= c eps`` is the same set, but the two blocks of the
    consensus step become comparably conditioned.
    """

    def __init__(self, phi):
        self.phi = check_matrix(phi)
        m, d = self.phi.shape
        sv = np.linalg.svd(self.phi, compute_uv=False)
        nonzero = sv[sv > 1e-10 * sv[0]] if sv[0] > 0 else np.ones(1)
        self.block_scale = float(np.clip(1.0 / nonzero[-1], 1e-4, 1e4))
        a = self.block_scale * self.phi
        self.scaled = a
        if m < d:
            # Woodbury: (I + A^T A)^-1 = I - A^T (I + A A^T)^-1 A
            self.inverse = np.eye(d) - a.T @ np.linalg.solve(np.eye(m) + a @ a.T, a)
        else:
            self.inverse = np.linalg.inv(np.eye(d) + a.T @ a)


CERTIFICATE_RTOL = 1e-9


def _face_solution(phi, u, eps, w, support, signs):
    """Minimize the weighted l1 norm on one face: fixed support and signs.

    With c = w_S * signs and G = phi_S^T phi_S the minimizer is
    x_S = x_ls - t G^-1 c, where x_ls is the least-squares solution and t
    puts the residual on the ball boundary. Returns (x, certified) or None
    when the face is unusable. ``certified`` means a dual certificate shows
    x is a global minimizer.
    """
    sub = phi[:, support]
    x_ls, _, rank, _ = np.linalg.lstsq(sub, u, rcond=None)
    if rank < support.size:
        return None
    r_ls = float(np.linalg.norm(sub @ x_ls - u))
    if r_ls > eps + 1e-12:
        return None
    c = w[support] * signs
    g = np.linalg.solve(sub.T @ sub, c)
    curvature = float(c @ g)
    if curvature <= 0:
        return None
    t = np.sqrt(max(eps * eps - r_ls * r_ls, 0.0) / curvature)
    xs = x_ls - t * g
    if np.any(np.sign(xs) != signs):
        return None
    x = np.zeros(phi.shape[1])
    x[support] = xs

    off = np.ones(phi.shape[1], dtype=bool)
    off[support] = False
    if t > 0:
        # multiplier 1/t on the constraint; phi_S^T r = -t c holds by construction
        dual = (phi @ x - u) / t
    elif eps == 0:
        dual = -(sub @ g)
    else:
        return x, False
    certified = bool(np.all(np.abs(phi[:, off].T @ dual) <= w[off] * (1 + CERTIFICATE_RTOL)))
    if not certified and eps == 0:
        certified = _equality_certificate(sub, phi[:, off], dual, w[off])
    return x, certified


def _equality_certificate(sub, off_cols, dual, w_off):
    """Search the dual affine set of an equality-constrained face.

    With epsilon = 0 any v with sub^T v = sub^T dual certifies the face if
    |off_cols^T v| <= w_off, and the minimum-norm ``dual`` need not be the
    one that works. Minimizes max |off_cols^T v| / w_off over that set by
    linear programming.
    """
    _, sv, vt = np.linalg.svd(sub.T)
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    null = vt[rank:].T
    if null.shape[1] == 0 or off_cols.shape[1] == 0:
        return False
    base = (off_cols.T @ dual) / w_off
    move = (off_cols.T @ null) / w_off[:, None]
    k = null.shape[1]
    # variables (z, tau): minimize tau subject to -tau <= base + move z <= tau
    ones = np.ones((move.shape[0], 1))
    a_ub = np.vstack([np.hstack([move, -ones]), np.hstack([-move, -ones])])
    b_ub = np.concatenate([-base, base])
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * k + [(0, None)],
                  method="highs")
    return bool(res.status == 0 and res.x[-1] <= 1 + CERTIFICATE_RTOL)


GROW_STEPS = 10


def _grow_support(phi, u, eps, w, support, signs):
    """Greedily extend a support whose least-squares residual misses the ball.

    Each step adds the inactive column most correlated (relative to its
    weight) with the residual; ``signs`` is filled in for added columns.
    Returns the grown support, or None if no extension was needed or found.
    """
    m = phi.shape[0]
    supp = support
    for _ in range(GROW_STEPS):
        sub = phi[:, supp]
        coef, _, _, _ = np.linalg.lstsq(sub, u, rcond=None)
        r = u - sub @ coef
        if np.linalg.norm(r) <= eps + 1e-12:
            return None if supp is support else supp
        if supp.size >= m:
            return None
        score = np.abs(phi.T @ r) / w
        score[supp] = -1.0
        j = int(np.argmax(score))
        signs[j] = np.sign(phi[:, j] @ r)
        supp = np.sort(np.append(supp, j))
    sub = phi[:, supp]
    coef, _, _, _ = np.linalg.lstsq(sub, u, rcond=None)
    return supp if np.linalg.norm(u - sub @ coef) <= eps + 1e-12 else None


def _polish(phi, u, eps, w, y, p=None):
    """Best face solution suggested by the iterate y, as (x, certified) or None.

    Candidate supports are supp(y), its largest entries when supp(y) is too
    big, supp(y) plus the inactive coordinate whose multiplier in ``p`` is
    closest to its bound, and supp(y) grown greedily until its least-squares
    fit reaches the ball.
    """
    m = phi.shape[0]
    support = np.flatnonzero(y)
    signs = np.sign(y)
    candidates = []
    if 0 < support.size <= m:
        candidates.append(support)
    if support.size > 1:
        k = min(support.size - 1, m)
        top = np.sort(np.argsort(-np.abs(y), kind="stable")[:k])
        candidates.append(top)
    if p is not None and support.size < m:
        off = np.flatnonzero(y == 0)
        if off.size:
            j = off[np.argmax(np.abs(p[off]) / w[off])]
            if p[j] != 0:
                signs[j] = np.sign(p[j])
                candidates.append(np.sort(np.append(support, j)))
    if 0 < support.size < m:
        grown = _grow_support(phi, u, eps, w, support, signs)
        if grown is not None:
            candidates.append(grown)
    best = None
    for supp in candidates:
        found = _face_solution(phi, u, eps, w, supp, signs[supp])
        if found is None:
            continue
        if found[1]:
            return found
        if best is None or weighted_l1(found[0], w) < weighted_l1(best[0], w):
            best = found
    return best


def _admm(workspace, u, eps, w, opts, x0, polish_every):
    """ADMM iterations on the rescaled problem; returns (y, k, status, merits).

    status is "converged", "certified" (an exact face solution was verified
    optimal, y is then that solution) or "max_iter".
    """
    a = workspace.scaled
    c = workspace.block_scale
    ub = c * u
    eb = c * eps
    m, d = a.shape
    rho = float(opts.step_parameter)
    inv = workspace.inverse
    y = np.zeros(d) if x0 is None else x0.copy()
    z = project_l2_ball(a @ y, ub, eb)
    p = np.zeros(d)
    q = np.zeros(m)
    merits = []
    k = 0
    for k in range(1, opts.max_iterations + 1):
        x = inv @ (y - p + a.T @ (z - q))
        ax = a @ x
        y_old, z_old = y, z
        y = soft_threshold(x + p, w / rho)
        z = project_l2_ball(ax + q, ub, eb)
        rx = x - y
        rz = ax - z
        p = p + rx
        q = q + rz

        dy = y - y_old
        dz = z - z_old
        # He-Yuan fixed-point residual: non-increasing while rho is fixed
        merits.append(rho * (dy @ dy + dz @ dz + rx @ rx + rz @ rz))

        r_norm = np.sqrt(rx @ rx + rz @ rz)
        s_norm = rho * np.linalg.norm(dy + a.T @ dz)
        eps_pri = np.sqrt(d + m) * opts.tol_primal + opts.tol_primal * max(
            np.sqrt(x @ x + ax @ ax), np.sqrt(y @ y + z @ z))
        eps_dual = np.sqrt(d) * opts.tol_dual + opts.tol_dual * rho * np.linalg.norm(
            p + a.T @ q)
        if r_norm <= eps_pri and s_norm <= eps_dual:
            return y, k, "converged", np.asarray(merits)

        if polish_every and k % polish_every == 0:
            found = _polish(workspace.phi, u, eps, w, y, p * rho)
            if found is not None and found[1]:
                return found[0], k, "certified", np.asarray(merits)

        if opts.adaptive_step and k % 10 == 0:
            scale = 1.0
            if r_norm > 10 * s_norm:
                scale = 2.0
            elif s_norm > 10 * r_norm:
                scale = 0.5
            if scale != 1.0:
                rho *= scale
                p /= scale
                q /= scale
    return y, k, "max_iter", np.asarray(merits)


def solve_weighted_l1(instance, w=None, opts=None, *, workspace=None, x0=None):
    """Minimize sum_i w_i |x_i| subject to ||phi @ x - u||_2 <= epsilon.

    Parameters
    ----------
    instance : MeasurementInstance
    w : array_like of shape (d,), optional
        Strictly positive weights. Unit weights (plain l1) if omitted.
    opts : SolverOptions, optional
    workspace : Workspace, optional
        Reusable per-matrix data for `instance.phi`.
    x0 : array_like of shape (d,), optional
        Warm start.

    Returns
    -------
    SolverResult
        If the iteration cap is reached the last iterate is returned with
        ``converged=False`` and a :class:`NotConvergedWarning` is issued.
    """
    opts = opts or SolverOptions()
    phi, u, eps = instance.phi, instance.u, instance.epsilon
    m, d = phi.shape
    w = np.ones(d) if w is None else check_weights(w, d)
    if x0 is not None:
        x0 = check_vector(x0, d, name="x0")
    if workspace is None or workspace.phi is not phi:
        workspace = Workspace(phi)

    u_norm = float(np.linalg.norm(u))
    tol_feas = feasibility_tolerance(u)
    if u_norm <= eps:
        # zero is feasible and attains the global minimum 0
        xhat = np.zeros(d)
        return SolverResult(xhat, 0.0, u_norm - eps, 0, True, False, np.zeros(0))

    scale = u_norm
    u_s = u / scale
    eps_s = eps / scale
    w_s = w / np.mean(w)
    x0_s = None if x0 is None else x0 / scale

    y, iters, status, merits = _admm(workspace, u_s, eps_s, w_s, opts, x0_s,
                                     opts.polish_every if opts.polish else 0)
    polished = status == "certified"
    certified = polished
    if opts.polish and not polished:
        found = _polish(phi, u_s, eps_s, w_s, y)
        if found is not None:
            candidate, certified = found
            obj_y = weighted_l1(y, w_s)
            if certified or weighted_l1(candidate, w_s) <= obj_y + optimality_tolerance(obj_y):
                y = candidate
                polished = True

    xhat = y * scale
    gap = float(np.linalg.norm(phi @ xhat - u) - eps)
    converged = (status == "converged" or certified) and gap <= tol_feas
    if not converged:
        warnings.warn(
            f"weighted l1 solve stopped after {iters} iterations "
            f"(feasibility gap {gap:.3g})", NotConvergedWarning, stacklevel=2)
    return SolverResult(xhat, weighted_l1(xhat, w), gap, iters, converged,
                        polished, merits)


@dataclass(frozen=True)
class VerificationReport:
    feasible: bool
    objective: float
    beats_reference: Optional[bool] = None


def verify_solution(instance, w, xhat, reference=None):
    """Check feasibility of xhat and compare its objective with a feasible reference."""
    phi, u, eps = instance.phi, instance.u, instance.epsilon
    d = phi.shape[1]
    w = np.ones(d) if w is None else check_weights(w, d)
    xhat = check_vector(xhat, d, name="xhat")
    tol_feas = feasibility_tolerance(u)
    objective = weighted_l1(xhat, w)
    feasible = bool(np.linalg.norm(phi @ xhat - u) <= eps + tol_feas)
    beats = None
    if reference is not None:
        reference = check_vector(reference, d, name="reference")
        if np.linalg.norm(phi @ reference - u) > eps + tol_feas:
            raise InfeasibleReference("reference point violates the measurement constraint")
        beats = bool(objective <= weighted_l1(reference, w) + optimality_tolerance(objective))
    return VerificationReport(feasible, objective, beats)


def solve_l1(phi, u, epsilon, w=None, opts=None):
    """Convenience wrapper taking raw arrays instead of a MeasurementInstance."""
    return solve_weighted_l1(MeasurementInstance(phi, u, epsilon), w, opts)
