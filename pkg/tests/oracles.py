"""Independent reference computations used only by the test suite.

None of these share code paths with the package under test.
"""

from itertools import combinations

import mpmath
import numba
import numpy as np


@numba.njit(cache=True)
def _ellipsoid_project(p, phi, u, eps, u_basis, sv, pinv):
    # Euclidean projection of p onto {x : ||phi x - u|| <= eps}.
    r0 = phi @ p - u
    norm0 = np.sqrt(np.sum(r0 * r0))
    if norm0 <= eps:
        return p.copy()
    if eps == 0.0:
        return p - pinv @ r0
    rt = u_basis.T @ r0
    m = rt.shape[0]
    s2 = np.zeros(m)
    s2[:sv.shape[0]] = sv * sv
    lo = 0.0
    hi = 1.0
    while True:
        acc = 0.0
        for i in range(m):
            v = rt[i] / (1.0 + hi * s2[i])
            acc += v * v
        if np.sqrt(acc) <= eps or hi > 1e300:
            break
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        acc = 0.0
        for i in range(m):
            v = rt[i] / (1.0 + mid * s2[i])
            acc += v * v
        if np.sqrt(acc) > eps:
            lo = mid
        else:
            hi = mid
    r = np.empty(m)
    for i in range(m):
        r[i] = rt[i] / (1.0 + hi * s2[i])
    return p - hi * (phi.T @ (u_basis @ r))


@numba.njit(cache=True)
def _subgradient(phi, u, eps, w, n_iter, u_basis, sv, pinv):
    d = phi.shape[1]
    x = _ellipsoid_project(np.zeros(d), phi, u, eps, u_basis, sv, pinv)
    radius = max(np.sqrt(np.sum(x * x)), 1e-3)
    best_x = x.copy()
    best_f = np.sum(w * np.abs(x))
    for k in range(1, n_iter + 1):
        g = w * np.sign(x)
        gn = np.sqrt(np.sum(g * g))
        if gn == 0.0:
            break
        step = 0.5 * radius / np.sqrt(k)
        x = _ellipsoid_project(x - step * g / gn, phi, u, eps, u_basis, sv, pinv)
        f = np.sum(w * np.abs(x))
        if f < best_f:
            best_f = f
            best_x = x.copy()
    return best_x, best_f


def projected_subgradient(phi, u, eps, w=None, n_iter=50_000):
    """Minimize sum w|x| over {||phi x - u|| <= eps} by projected subgradient.

    Diminishing steps 0.5 R / sqrt(k); the best iterate is returned.
    """
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    w = np.ones(phi.shape[1]) if w is None else np.ascontiguousarray(w, dtype=np.float64)
    u_basis, sv, _ = np.linalg.svd(phi, full_matrices=True)
    pinv = np.linalg.pinv(phi)
    return _subgradient(phi, u, float(eps), w, n_iter, np.ascontiguousarray(u_basis),
                        np.ascontiguousarray(sv), np.ascontiguousarray(pinv))


def ric_by_svd(phi, s):
    """delta_s from singular values of every s-column submatrix, one SVD each."""
    d = phi.shape[1]
    delta = 0.0
    for cols in combinations(range(d), s):
        sv = np.linalg.svd(phi[:, list(cols)], compute_uv=False)
        delta = max(delta, sv[0] ** 2 - 1.0, 1.0 - sv[-1] ** 2)
    return delta


def best_s_term_by_enumeration(x, s):
    """Closest vector with at most s nonzeros, by checking every support."""
    d = len(x)
    best, best_err = None, np.inf
    for k in range(s + 1):
        for supp in combinations(range(d), k):
            y = np.zeros(d)
            y[list(supp)] = x[list(supp)]
            err = np.linalg.norm(x - y)
            if err < best_err - 1e-15:
                best, best_err = y, err
    return best, best_err


mpmath.mp.dps = 50


def mp_constants(delta, alpha_form="sqrt"):
    """(rho, alpha, C, C', C'') at 50 significant digits."""
    dl = mpmath.mpf(delta)
    rho = mpmath.sqrt(2) * dl / (1 - dl)
    if alpha_form == "sqrt":
        alpha = 2 * mpmath.sqrt(1 + dl) / mpmath.sqrt(1 - dl)
    else:
        alpha = 2 * mpmath.sqrt(1 + dl) / (1 - dl)
    return rho, alpha, 2 * alpha / (1 - rho), 2 * (1 + rho) / (1 - rho), 2 * alpha / (1 + rho)


def mp_recursion(mu, eps, delta, K):
    """E(1..K) of the error recursion in 50-digit arithmetic."""
    rho, alpha, C, _, _ = mp_constants(delta)
    mu = mpmath.mpf(mu)
    eps = mpmath.mpf(eps)
    E = [C * eps]
    for _ in range(K - 1):
        r = E[-1] / (mu - E[-1])
        E.append((1 + r) * alpha * eps / (1 - rho * r))
    return E


def mp_fixed_point(mu, eps, delta):
    """Smaller root of the fixed-point equation, by root finding rather than the closed form."""
    rho, alpha, _, _, _ = mp_constants(delta)
    mu = mpmath.mpf(mu)
    eps = mpmath.mpf(eps)

    def g(L):
        r = L / (mu - L)
        return (1 + r) * alpha * eps / (1 - rho * r) - L

    # the smaller root lies below C'' eps <= mu/2
    return mpmath.findroot(g, (mpmath.mpf(0), 2 * alpha * eps / (1 + rho) * (1 + mpmath.mpf("1e-30"))),
                           solver="anderson")
